//! Finite-difference verification of jets and parameter gradients.
//!
//! The references only ever call the value channel, so they share no code
//! with the derivative propagation they check.
//!
//! Tolerance convention: relative error against the larger magnitude, except
//! that references below `1e-6` in magnitude are compared with an absolute
//! tolerance of `1e-8`. A plain central difference at the base step is tried
//! first; on failure a Richardson-extrapolated difference at a coarser step is
//! tried before an entry is reported.

use rand::distr::{Distribution, Uniform};

use super::{ActivationKind, JetOrder, JetSeed, Network, NetworkSpec, PointJet, PointLoss};
use crate::rng::{substream, Rng};
use crate::Result;

pub const JET_TOLERANCE: f64 = 1e-6;
pub const PARAM_TOLERANCE: f64 = 1e-5;
const SMALL_REFERENCE: f64 = 1e-6;
const SMALL_ABS_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub what: String,
    pub computed: f64,
    pub reference: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckSummary {
    pub checked: usize,
    /// Largest relative error among entries judged relatively.
    pub max_rel_err: f64,
    pub failures: Vec<Mismatch>,
}

impl CheckSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn merge(&mut self, other: CheckSummary) {
        self.checked += other.checked;
        self.max_rel_err = self.max_rel_err.max(other.max_rel_err);
        self.failures.extend(other.failures);
    }

    /// Records one comparison. `refine` recomputes the reference more
    /// accurately and is only called if the first comparison fails.
    fn record(&mut self, what: impl FnOnce() -> String, computed: f64, reference: f64, tol: f64, refine: impl FnOnce() -> f64) {
        self.checked += 1;
        let (ok, rel) = judge(computed, reference, tol);
        if ok {
            self.max_rel_err = self.max_rel_err.max(rel);
            return;
        }
        let better = refine();
        let (ok, rel) = judge(computed, better, tol);
        if ok {
            self.max_rel_err = self.max_rel_err.max(rel);
        } else {
            self.max_rel_err = self.max_rel_err.max(rel);
            self.failures.push(Mismatch {
                what: what(),
                computed,
                reference: better,
            });
        }
    }
}

/// `(passes, relative error)`; the relative error is 0 for small references.
pub fn judge(computed: f64, reference: f64, rel_tol: f64) -> (bool, f64) {
    if !computed.is_finite() || !reference.is_finite() {
        return (false, f64::INFINITY);
    }
    let diff = (computed - reference).abs();
    if reference.abs() < SMALL_REFERENCE {
        return (diff < SMALL_ABS_TOLERANCE, 0.0);
    }
    let rel = diff / computed.abs().max(reference.abs());
    (rel < rel_tol, rel)
}

fn central_first(f: &dyn Fn(f64) -> f64, h: f64) -> f64 {
    (f(h) - f(-h)) / (2.0 * h)
}

fn central_second(f: &dyn Fn(f64) -> f64, f0: f64, h: f64) -> f64 {
    (f(h) - 2.0 * f0 + f(-h)) / (h * h)
}

// Richardson extrapolation of the central difference over the steps
// h, 2h, 3h, 4h, written out as the resulting eighth-order stencil. The
// coarse base step keeps roundoff near 1e-12 relative to |f|.
const FIRST_8: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const SECOND_8: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];

fn richardson_first(f: &dyn Fn(f64) -> f64, h: f64) -> f64 {
    let mut acc = 0.0;
    for (k, c) in FIRST_8.iter().enumerate() {
        let t = (k + 1) as f64 * h;
        acc += c * (f(t) - f(-t));
    }
    acc / h
}

fn richardson_second(f: &dyn Fn(f64) -> f64, f0: f64, h: f64) -> f64 {
    let mut acc = SECOND_8[0] * f0;
    for (k, c) in SECOND_8.iter().enumerate().skip(1) {
        let t = k as f64 * h;
        acc += c * (f(t) + f(-t));
    }
    acc / (h * h)
}

/// Compares `eval_jets` gradients and Laplacians with differences of `eval`.
pub fn check_jets(net: &Network, points: &[f64]) -> Result<CheckSummary> {
    let dim = net.input_dim();
    let jets = net.eval_jets(points, JetOrder::Laplacian)?;
    let mut summary = CheckSummary::default();
    for (p, x) in points.chunks(dim).enumerate() {
        let u0 = net.eval(x)?;
        let mut lap_plain = 0.0;
        let mut partials = Vec::with_capacity(dim);
        for k in 0..dim {
            let along = |t: f64| {
                let mut y = x.to_vec();
                y[k] += t;
                net.eval(&y).expect("dimension checked")
            };
            partials.push((central_first(&along, 1e-4), central_second(&along, u0, 1e-4)));
            lap_plain += partials[k].1;
        }
        for k in 0..dim {
            let along = |t: f64| {
                let mut y = x.to_vec();
                y[k] += t;
                net.eval(&y).expect("dimension checked")
            };
            summary.record(
                || format!("point {p}: d/dx{}", k + 1),
                jets.grad(p)[k],
                partials[k].0,
                JET_TOLERANCE,
                || richardson_first(&along, 1e-2),
            );
        }
        let refine_lap = || {
            (0..dim)
                .map(|k| {
                    let along = |t: f64| {
                        let mut y = x.to_vec();
                        y[k] += t;
                        net.eval(&y).expect("dimension checked")
                    };
                    richardson_second(&along, u0, 1e-2)
                })
                .sum()
        };
        summary.record(
            || format!("point {p}: laplacian"),
            jets.laplacian[p],
            lap_plain,
            JET_TOLERANCE,
            refine_lap,
        );
    }
    Ok(summary)
}

/// Compares `param_gradient` with differences of the loss over `θ`.
pub fn check_param_gradient<L: PointLoss>(net: &Network, points: &[f64], loss: &L) -> Result<CheckSummary> {
    let (_, grad) = net.param_gradient(points, loss)?;
    let value_only = ValueOfLoss(loss);
    let loss_at = |i: usize, t: f64| -> f64 {
        let mut shifted = net.clone();
        shifted.params_mut()[i] += t;
        // Differences never touch the mask; evaluate without it.
        shifted.set_freeze_mask(vec![false; net.param_count()]).expect("same length");
        value_only.eval(&shifted, points)
    };
    let mut summary = CheckSummary::default();
    for i in 0..net.param_count() {
        let reference = if net.freeze_mask()[i] {
            0.0
        } else {
            central_first(&|t| loss_at(i, t), 1e-5)
        };
        summary.record(
            || format!("parameter {i}"),
            grad[i],
            reference,
            PARAM_TOLERANCE,
            || {
                if net.freeze_mask()[i] {
                    0.0
                } else {
                    richardson_first(&|t| loss_at(i, t), 1e-2)
                }
            },
        );
    }
    Ok(summary)
}

/// Evaluates `Σ ℓ_i` from full jets, independent of the reverse pass.
struct ValueOfLoss<'a, L>(&'a L);

impl<L: PointLoss> ValueOfLoss<'_, L> {
    fn eval(&self, net: &Network, points: &[f64]) -> f64 {
        let jets = net.eval_jets(points, self.0.order()).expect("dimension checked");
        let mut seed = JetSeed {
            value: 0.0,
            grad: vec![0.0; net.input_dim()],
            laplacian: 0.0,
        };
        (0..jets.len())
            .map(|i| {
                let jet = PointJet {
                    value: jets.value[i],
                    grad: jets.grad(i),
                    laplacian: jets.laplacian[i],
                };
                self.0.point(i, jet, &mut seed)
            })
            .sum()
    }
}

/// Smooth loss touching every channel:
/// `ℓ_i = a(u − s_i)² + b|∇u|² + c(Δu − t_i)²`.
pub struct ProbeLoss {
    pub value_weight: f64,
    pub grad_weight: f64,
    pub laplacian_weight: f64,
    pub value_targets: Vec<f64>,
    pub laplacian_targets: Vec<f64>,
}

impl PointLoss for ProbeLoss {
    fn order(&self) -> JetOrder {
        JetOrder::Laplacian
    }

    fn point(&self, i: usize, jet: PointJet<'_>, seed: &mut JetSeed) -> f64 {
        let ev = jet.value - self.value_targets[i];
        let el = jet.laplacian - self.laplacian_targets[i];
        let g2: f64 = jet.grad.iter().map(|g| g * g).sum();
        seed.value = 2.0 * self.value_weight * ev;
        for (s, g) in seed.grad.iter_mut().zip(jet.grad) {
            *s = 2.0 * self.grad_weight * g;
        }
        seed.laplacian = 2.0 * self.laplacian_weight * el;
        self.value_weight * ev * ev + self.grad_weight * g2 + self.laplacian_weight * el * el
    }
}

impl ProbeLoss {
    pub fn random(n: usize, rng: &mut Rng) -> Self {
        let u = Uniform::new(-1.0, 1.0).expect("valid range");
        ProbeLoss {
            value_weight: 1.0,
            grad_weight: 0.5,
            laplacian_weight: 0.25,
            value_targets: (0..n).map(|_| u.sample(rng)).collect(),
            laplacian_targets: (0..n).map(|_| u.sample(rng)).collect(),
        }
    }
}

pub fn random_points(n: usize, dim: usize, rng: &mut Rng) -> Vec<f64> {
    let u = Uniform::new(-1.0, 1.0).expect("valid range");
    (0..n * dim).map(|_| u.sample(rng)).collect()
}

/// Outcome of the self-verification suite.
#[derive(Clone, Debug, Default)]
pub struct GradcheckReport {
    pub jets: CheckSummary,
    pub params: CheckSummary,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.jets.passed() && self.params.passed()
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub specs: Vec<NetworkSpec>,
    /// Random networks per spec.
    pub nets_per_spec: usize,
    /// Jet check points per network.
    pub points_per_net: usize,
    /// Points in the loss used for the parameter-gradient check.
    pub loss_points: usize,
}

impl SuiteOptions {
    /// Small resnet and MLP with both activations, all in two dimensions.
    pub fn standard() -> Self {
        let mut specs = Vec::new();
        for act in [ActivationKind::Tanh, ActivationKind::Gelu] {
            specs.push(NetworkSpec::mlp(2, vec![8, 8, 8], act));
            specs.push(NetworkSpec::resnet(2, 8, 2, act));
        }
        SuiteOptions {
            specs,
            nets_per_spec: 1,
            points_per_net: 100,
            loss_points: 16,
        }
    }
}

pub fn run_suite(options: &SuiteOptions, seed: u64) -> Result<GradcheckReport> {
    let mut report = GradcheckReport::default();
    for (s, spec) in options.specs.iter().enumerate() {
        for k in 0..options.nets_per_spec {
            let mut rng = substream(seed, (s * 1000 + k) as u64);
            let net = Network::init(spec.clone(), &mut rng)?;
            let points = random_points(options.points_per_net, spec.input_dim, &mut rng);
            report.jets.merge(check_jets(&net, &points)?);
            let loss_points = random_points(options.loss_points, spec.input_dim, &mut rng);
            let loss = ProbeLoss::random(options.loss_points, &mut rng);
            report.params.merge(check_param_gradient(&net, &loss_points, &loss)?);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn judge_uses_absolute_tolerance_for_tiny_references() {
        assert!(judge(5e-9, 0.0, 1e-6).0);
        assert!(!judge(5e-8, 0.0, 1e-6).0);
        assert!(judge(1.0 + 1e-7, 1.0, 1e-6).0);
        assert!(!judge(1.0 + 1e-5, 1.0, 1e-6).0);
        assert!(!judge(f64::NAN, 1.0, 1e-6).0);
    }

    #[test]
    fn standard_suite_passes() {
        let report = run_suite(&SuiteOptions::standard(), 42).unwrap();
        assert!(report.passed(), "{:?} {:?}", report.jets.failures, report.params.failures);
        assert!(report.jets.checked >= 4 * 100 * 3);
    }

    #[test]
    fn flipped_curvature_is_detected() {
        let mut options = SuiteOptions::standard();
        options.specs = vec![NetworkSpec::mlp(2, vec![8, 8], ActivationKind::TanhFaultyCurvature)];
        let report = run_suite(&options, 1).unwrap();
        assert!(!report.jets.passed());
    }

    #[test]
    fn one_dimensional_shallow_net_passes() {
        let mut options = SuiteOptions::standard();
        options.specs = vec![NetworkSpec::mlp(1, vec![5], ActivationKind::Tanh)];
        let report = run_suite(&options, 3).unwrap();
        assert!(report.passed());
    }
}
