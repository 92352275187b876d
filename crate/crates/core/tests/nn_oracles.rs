use goalpinn_core::adaptive::{train_epochs, AdamConfig, OptimizerState};
use goalpinn_core::geometry::Domain;
use goalpinn_core::nn::gradcheck::{check_jets, check_param_gradient, random_points};
use goalpinn_core::nn::{
    ActivationKind, Architecture, JetOrder, JetSeed, Network, NetworkSpec, ParameterVector, PointJet, PointLoss,
};
use goalpinn_core::problem::{LossKind, ProblemDefinition, ScalarFunction, TrainingLoss};
use goalpinn_core::rng::substream;

/// Matrix-by-matrix forward pass written from the architecture description.
fn naive_forward(net: &Network, x: &[f64]) -> f64 {
    let spec = net.spec();
    let p = net.params();
    let act = |s: f64| match spec.activation {
        ActivationKind::Tanh => s.tanh(),
        _ => 0.5 * s * libm::erfc(-s / std::f64::consts::SQRT_2),
    };
    let affine = |l: usize, h: &[f64]| -> Vec<f64> {
        let lay = net.layout().layers()[l];
        (0..lay.fan_out)
            .map(|r| {
                let mut s = p[lay.bias_offset + r];
                for c in 0..lay.fan_in {
                    s += p[lay.weight_offset + r * lay.fan_in + c] * h[c];
                }
                s
            })
            .collect()
    };
    let n_layers = spec.hidden_widths.len() + 1;
    let mut h = x.to_vec();
    match spec.architecture {
        Architecture::Mlp => {
            for l in 0..n_layers - 1 {
                h = affine(l, &h).into_iter().map(act).collect();
            }
        }
        Architecture::Resnet => {
            h = affine(0, &h);
            let mut l = 1;
            while l + 1 < n_layers {
                let a: Vec<f64> = affine(l, &h).into_iter().map(act).collect();
                let b: Vec<f64> = affine(l + 1, &a).into_iter().map(act).collect();
                h = h.iter().zip(&b).map(|(x, y)| x + y).collect();
                l += 2;
            }
        }
    }
    affine(n_layers - 1, &h)[0]
}

fn specs() -> Vec<NetworkSpec> {
    let mut v = Vec::new();
    for act in [ActivationKind::Tanh, ActivationKind::Gelu] {
        v.push(NetworkSpec::mlp(3, vec![7, 5, 6], act));
        v.push(NetworkSpec::resnet(2, 8, 2, act));
    }
    v
}

#[test]
fn eval_matches_hand_rolled_forward_pass() {
    let mut rng = substream(11, 0);
    for spec in specs() {
        let net = Network::init(spec.clone(), &mut rng).unwrap();
        let pts = random_points(50, spec.input_dim, &mut rng);
        let batch = net.eval_batch(&pts).unwrap();
        for (i, x) in pts.chunks(spec.input_dim).enumerate() {
            let naive = naive_forward(&net, x);
            // Summation order differs, so allow a few ulps of an O(1) output.
            assert!((batch[i] - naive).abs() < 1e-13 * (1.0 + naive.abs()), "{spec:?}: {} vs {naive}", batch[i]);
            assert_eq!(net.eval(x).unwrap(), batch[i]);
        }
    }
}

#[test]
fn jets_of_resnet_match_finite_differences() {
    let mut rng = substream(5, 1);
    let net = Network::init(NetworkSpec::resnet(2, 16, 2, ActivationKind::Tanh), &mut rng).unwrap();
    let pts = random_points(100, 2, &mut rng);
    let s = check_jets(&net, &pts).unwrap();
    assert!(s.passed(), "{:?}", s.failures);
    assert_eq!(s.checked, 300);
}

fn pinn_fixture(seed: u64) -> (Network, TrainingLoss) {
    let mut rng = substream(seed, 2);
    let problem = ProblemDefinition {
        domain: Domain::cube(2, -1.0, 1.0),
        source: ScalarFunction::HalfPiCosProduct { amp: 4.9 },
        boundary: ScalarFunction::SinProduct { amp: 0.3 },
        exact_u: None,
    };
    let net = Network::init(NetworkSpec::resnet(2, 8, 2, ActivationKind::Gelu), &mut rng).unwrap();
    let inner = problem.domain.sample_interior_uniform(32, &mut rng).unwrap();
    let outer = problem.domain.sample_boundary_uniform(32, &mut rng).unwrap();
    let loss = TrainingLoss::new(LossKind::Pinn, &problem, inner, outer, 10.0, false).unwrap();
    (net, loss)
}


#[test]
fn pinn_loss_gradient_matches_finite_differences() {
    let (net, loss) = pinn_fixture(3);
    let (_, grad) = loss.value_and_gradient(&net).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..net.param_count() {
        let at = |t: f64| {
            let mut n = net.clone();
            n.params_mut()[i] += t;
            loss.value(&n).unwrap()
        };
        let h = 1e-5;
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let (ok, rel) = goalpinn_core::nn::gradcheck::judge(grad[i], fd, 1e-5);
        let ok = ok || {
            // Eighth-order fallback at a coarser step.
            let c = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
            let h = 1e-2;
            let r: f64 = c.iter().enumerate().map(|(k, c)| c * (at((k + 1) as f64 * h) - at(-((k + 1) as f64) * h))).sum::<f64>() / h;
            goalpinn_core::nn::gradcheck::judge(grad[i], r, 1e-5).0
        };
        assert!(ok, "parameter {i}: {} vs {fd}", grad[i]);
        worst = worst.max(rel);
    }
    assert!(worst < 1e-5);
}

#[test]
fn zero_integrand_gives_zero_gradient() {
    let problem = ProblemDefinition {
        domain: Domain::cube(2, 0.0, 1.0),
        source: ScalarFunction::Zero,
        boundary: ScalarFunction::Zero,
        exact_u: None,
    };
    let spec = NetworkSpec::resnet(2, 6, 1, ActivationKind::Tanh);
    let net = Network::new(spec.clone(), ParameterVector(vec![0.0; spec.param_count()])).unwrap();
    let mut rng = substream(1, 1);
    let inner = problem.domain.sample_interior_uniform(20, &mut rng).unwrap();
    let outer = problem.domain.sample_boundary_uniform(20, &mut rng).unwrap();
    for kind in [LossKind::Pinn, LossKind::DeepRitz] {
        let loss = TrainingLoss::new(kind, &problem, inner.clone(), outer.clone(), 100.0, false).unwrap();
        let (v, g) = loss.value_and_gradient(&net).unwrap();
        assert_eq!(v, 0.0);
        assert!(g.iter().all(|&x| x == 0.0));
    }
}

struct ValueSquared;

impl PointLoss for ValueSquared {
    fn order(&self) -> JetOrder {
        JetOrder::Value
    }

    fn point(&self, _: usize, jet: PointJet<'_>, seed: &mut JetSeed) -> f64 {
        seed.value = 2.0 * jet.value;
        jet.value * jet.value
    }
}

#[test]
fn fully_frozen_network_has_zero_gradient() {
    let mut rng = substream(2, 2);
    let spec = NetworkSpec::mlp(2, vec![5, 5], ActivationKind::Tanh);
    let net = Network::init(spec.clone(), &mut rng).unwrap();
    let frozen = Network::with_mask(spec.clone(), net.parameter_vector().clone(), vec![true; spec.param_count()]).unwrap();
    let (v, g) = frozen.param_gradient(&[0.3, -0.2], &ValueSquared).unwrap();
    assert!(v > 0.0);
    assert!(g.iter().all(|&x| x == 0.0));
}

#[test]
fn partial_masks_zero_exactly_the_frozen_entries() {
    let mut rng = substream(4, 2);
    let spec = NetworkSpec::resnet(2, 5, 2, ActivationKind::Gelu);
    let net = Network::init(spec.clone(), &mut rng).unwrap();
    let mask: Vec<bool> = (0..spec.param_count()).map(|i| i % 3 == 1).collect();
    let masked = Network::with_mask(spec.clone(), net.parameter_vector().clone(), mask.clone()).unwrap();
    let pts = random_points(10, 2, &mut rng);
    let (_, full) = net.param_gradient(&pts, &ValueSquared).unwrap();
    let (_, part) = masked.param_gradient(&pts, &ValueSquared).unwrap();
    for i in 0..spec.param_count() {
        if mask[i] {
            assert_eq!(part[i], 0.0);
        } else {
            assert_eq!(part[i], full[i]);
        }
    }
    let s = check_param_gradient(&masked, &pts, &ValueSquared).unwrap();
    assert!(s.passed());
}

#[test]
fn frozen_adjoint_keeps_hidden_layers_through_training() {
    let (u, loss) = pinn_fixture(8);
    let mut zp = u.derive_frozen_adjoint();
    let out = u.layout().layers().last().copied().unwrap();
    for i in 0..u.param_count() {
        assert_eq!(zp.freeze_mask()[i], i < out.weight_offset);
    }
    let mut opt = OptimizerState::new(zp.param_count(), AdamConfig::default());
    train_epochs(&mut zp, &loss, &mut opt, 100).unwrap();
    for i in 0..out.weight_offset {
        assert_eq!(zp.params()[i].to_bits(), u.params()[i].to_bits());
    }
    assert!(zp.params()[out.weight_offset..].iter().any(|&v| v != 0.0));
}

#[test]
fn evaluation_is_deterministic() {
    let spec = NetworkSpec::resnet(2, 16, 2, ActivationKind::Tanh);
    let a = Network::init(spec.clone(), &mut substream(9, 1)).unwrap();
    let b = Network::init(spec.clone(), &mut substream(9, 1)).unwrap();
    let c = Network::init(spec, &mut substream(10, 1)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.params(), c.params());
    let pts = random_points(300, 2, &mut substream(1, 5));
    let ja = a.eval_jets(&pts, JetOrder::Laplacian).unwrap();
    let jb = b.eval_jets(&pts, JetOrder::Laplacian).unwrap();
    assert_eq!(ja, jb);
}
