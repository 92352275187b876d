//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line
//! and fails when its criterion does.
//!
//! Training criteria run at a reduced point scale (see `scaled`) so that
//! the whole suite fits a single-core machine. The epoch budgets, network
//! shapes and event schedules are the case defaults. Hard runtime bounds
//! are enforced; the wall-clock targets of the training criteria depend on
//! the machine and are only reported.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use goalpinn_cli::args::ReplayArgs;
use goalpinn_cli::commands::{cmd_replay, execute_run, TRACE_FILE};
use goalpinn_cli::plot::final_abs_error;
use goalpinn_cli::resolve::baseline_for;
use goalpinn_cli::summary::median;
use goalpinn_core::adaptive::{run, RunOptions, Sampling, Trace, TrainConfig};
use goalpinn_core::estimator::{estimate, eta_simple, indicator_index, EstimatorReport, EstimatorRules};
use goalpinn_core::geometry::{resample_from_indicator, Domain, PointBatch, Quadrature};
use goalpinn_core::nn::gradcheck::{run_suite, SuiteOptions};
use goalpinn_core::nn::{ActivationKind, FnField, Jet2, Network, NetworkSpec, ParameterVector};
use goalpinn_core::problem::{case_definitions, deep_ritz_loss, functional_mc, pinn_loss, ProblemDefinition, ScalarFunction};
use goalpinn_core::rng::substream;
use rand::Rng as _;

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn verdict(n: u32, pass: bool, detail: &str) {
    // Written past the test harness capture so every verdict shows up.
    let line = format!("criterion {n}: {} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    std::io::stdout().write_all(line.as_bytes()).unwrap();
    assert!(pass, "criterion {n} not met: {detail}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Case defaults with fewer collocation and quadrature points.
fn scaled(case_id: u32, sampling: Sampling, seed: u64) -> TrainConfig {
    let case = case_definitions(case_id).unwrap();
    let mut cfg = TrainConfig::for_case(&case, sampling, seed);
    if sampling != Sampling::DwrRefine {
        cfg.n_interior = 500;
    }
    cfg.m_boundary = 100;
    cfg.adjoint_n_interior = 500;
    cfg.adjoint_m_boundary = 100;
    cfg.quadrature.gauss_nodes = 32;
    cfg.quadrature.functional_points = 5_000;
    cfg.quadrature.estimator_interior = 5_000;
    cfg.quadrature.estimator_boundary = 1_000;
    cfg
}

struct Finished {
    trace: Trace,
    points: usize,
    elapsed: Duration,
}

type Key = (u32, Sampling, u64, usize);

/// Serializes the training criteria and keeps their runs for reuse.
fn runs() -> &'static Mutex<HashMap<Key, (Trace, usize, Duration)>> {
    static RUNS: OnceLock<Mutex<HashMap<Key, (Trace, usize, Duration)>>> = OnceLock::new();
    RUNS.get_or_init(|| Mutex::new(HashMap::new()))
}

fn train(case_id: u32, cfg: &TrainConfig) -> Finished {
    let key = (case_id, cfg.sampling, cfg.seed, cfg.n_interior);
    let mut cache = runs().lock().unwrap_or_else(|e| e.into_inner());
    if let Some((trace, points, elapsed)) = cache.get(&key) {
        return Finished {
            trace: trace.clone(),
            points: *points,
            elapsed: *elapsed,
        };
    }
    let case = case_definitions(case_id).unwrap();
    let start = Instant::now();
    let out = run(&case, cfg, &RunOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let points = out.nets.final_interior.len();
    eprintln!(
        "case {case_id} {:?} seed {} ({} pts): final |J error| {:.3e} in {:.0}s",
        cfg.sampling,
        cfg.seed,
        points,
        out.trace.last().unwrap().j_error.abs(),
        elapsed.as_secs_f64()
    );
    cache.insert(key, (out.trace.clone(), points, elapsed));
    Finished {
        trace: out.trace,
        points,
        elapsed,
    }
}

#[test]
fn criterion_01_gradients_match_finite_differences() {
    let mut specs = Vec::new();
    for act in [ActivationKind::Tanh, ActivationKind::Gelu] {
        specs.push(NetworkSpec::mlp(2, vec![8, 8, 8], act));
        specs.push(NetworkSpec::resnet(2, 8, 2, act));
    }
    // Ten networks with ten points each: 100 pairs per architecture and activation.
    let options = SuiteOptions {
        specs,
        nets_per_spec: 10,
        points_per_net: 10,
        loss_points: 16,
    };
    let start = Instant::now();
    let report = run_suite(&options, 2024).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = report.passed() && secs < 30.0;
    verdict(
        1,
        pass,
        &format!(
            "jets max rel {:.2e} over {}, params max rel {:.2e} over {}, {secs:.1}s",
            report.jets.max_rel_err, report.jets.checked, report.params.max_rel_err, report.params.checked
        ),
    );
}

fn naive_f(amp: f64, x: &[f64]) -> f64 {
    amp * x.iter().map(|v| (PI * v / 2.0).cos()).product::<f64>()
}

fn naive_g(amp: f64, x: &[f64]) -> f64 {
    amp * x.iter().map(|v| v.sin()).product::<f64>()
}

#[test]
fn criterion_02_losses_match_oracles() {
    let start = Instant::now();
    let mut rng = substream(77, 1);
    let mut worst = 0.0f64;
    for config in 0..50 {
        let dim = 2 + config % 2;
        let act = if config % 2 == 0 { ActivationKind::Tanh } else { ActivationKind::Gelu };
        let spec = if config % 3 == 0 {
            NetworkSpec::mlp(dim, vec![6, 6], act)
        } else {
            NetworkSpec::resnet(dim, 6, 1 + config % 2, act)
        };
        let net = Network::init(spec, &mut rng).unwrap();
        let domain = Domain::cube(dim, -1.0, 1.0);
        let (fa, ga) = (rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0));
        let problem = ProblemDefinition {
            domain: domain.clone(),
            source: ScalarFunction::HalfPiCosProduct { amp: fa },
            boundary: ScalarFunction::SinProduct { amp: ga },
            exact_u: None,
        };
        let (n, m) = (rng.random_range(1..200), rng.random_range(1..80));
        let lambda = rng.random_range(1.0..300.0);
        let inner = domain.sample_interior_uniform(n, &mut rng).unwrap();
        let outer = domain.sample_boundary_uniform(m, &mut rng).unwrap();
        let (vol, area) = domain.measures();
        let (mut res, mut energy, mut bnd) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let x = inner.point(i);
            let j = net.eval_jet(x).unwrap();
            let f = naive_f(fa, x);
            res += (j.laplacian + f).powi(2);
            energy += 0.5 * j.grad.iter().map(|g| g * g).sum::<f64>() - f * j.value;
        }
        for k in 0..m {
            let y = outer.point(k);
            bnd += (net.eval(y).unwrap() - naive_g(ga, y)).powi(2);
        }
        let pinn = res / n as f64 + lambda * bnd / m as f64;
        let ritz = vol * energy / n as f64 + lambda * area * bnd / (2.0 * m as f64);
        worst = worst
            .max(rel(pinn_loss(&net, &inner, &outer, lambda, &problem).unwrap(), pinn))
            .max(rel(deep_ritz_loss(&net, &inner, &outer, lambda, &problem, false).unwrap(), ritz));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        2,
        worst < 1e-13 && secs < 10.0,
        &format!("worst relative deviation {worst:.2e} over 50 configurations, {secs:.2}s"),
    );
}

fn parabola(x: &[f64]) -> Jet2 {
    Jet2 {
        value: 0.5 * x[0] * (1.0 - x[0]),
        grad: vec![0.5 - x[0]],
        laplacian: -1.0,
    }
}

#[test]
fn criterion_03_one_dimensional_error_identity() {
    let start = Instant::now();
    let problem = ProblemDefinition {
        domain: Domain::cube(1, 0.0, 1.0),
        source: ScalarFunction::Constant(1.0),
        boundary: ScalarFunction::Zero,
        exact_u: None,
    };
    let rules = EstimatorRules {
        interior: Quadrature::gauss_box(&[0.0], &[1.0], 64),
        boundary: Quadrature::gauss_box_faces(&[0.0], &[1.0], 64),
    };
    let z = FnField { dim: 1, jet: parabola };
    let mut worst = 0.0f64;
    for eps in [0.5, 0.1, -0.02, 1e-4] {
        let trial = FnField {
            dim: 1,
            jet: move |x: &[f64]| {
                let mut j = parabola(x);
                let (s, c) = (3.0 * PI * x[0]).sin_cos();
                j.value += eps * s;
                j.grad[0] += eps * 3.0 * PI * c;
                j.laplacian -= eps * 9.0 * PI * PI * s;
                j
            },
        };
        let eta = eta_simple(&trial, &z, 100.0, &problem, &rules).unwrap();
        worst = worst.max((eta + 2.0 * eps / (3.0 * PI)).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(3, worst < 1e-6 && secs < 5.0, &format!("max |η − J(u − ũ)| = {worst:.2e}, {secs:.2}s"));
}

#[test]
fn criterion_04_estimator_reductions_and_index() {
    let start = Instant::now();
    let problem = ProblemDefinition {
        domain: Domain::cube(2, -1.0, 1.0),
        source: ScalarFunction::HalfPiCosProduct { amp: PI * PI / 2.0 },
        boundary: ScalarFunction::SinProduct { amp: 0.2 },
        exact_u: None,
    };
    let mut rng = substream(5, 6);
    let inner = problem.domain.sample_interior_uniform(400, &mut rng).unwrap();
    let outer = problem.domain.sample_boundary_uniform(100, &mut rng).unwrap();
    let rules = EstimatorRules::uniform(&problem, &inner, &outer).unwrap();
    let spec = NetworkSpec::resnet(2, 8, 1, ActivationKind::Tanh);
    let net = |s: u64| Network::init(spec.clone(), &mut substream(s, 1)).unwrap();
    let zero = Network::new(spec.clone(), ParameterVector(vec![0.0; spec.param_count()])).unwrap();
    let (u, z) = (net(11), net(12));

    let with_zero = estimate(&u, &z, Some(&zero), 100.0, &problem, &rules).unwrap();
    let reduces = with_zero.eta_localized.to_bits() == with_zero.eta_simple.to_bits();
    let same = estimate(&u, &z, Some(&z.clone()), 100.0, &problem, &rules).unwrap();
    let annihilates = same.eta_localized == 0.0 && same.mu_interior.iter().chain(&same.mu_boundary).all(|&m| m == 0.0);

    let mut min_index = f64::INFINITY;
    for _ in 0..1000 {
        let n = rng.random_range(1..50);
        let m = rng.random_range(0..20);
        let report = EstimatorReport {
            mu_interior: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            mu_boundary: (0..m).map(|_| rng.random_range(-1.0..1.0)).collect(),
            interior_weights: vec![rng.random_range(0.01..1.0); n],
            boundary_weights: vec![rng.random_range(0.01..1.0); m],
            ..Default::default()
        };
        min_index = min_index.min(indicator_index(&report).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        4,
        reduces && annihilates && min_index >= 1.0 && secs < 5.0,
        &format!("z′ = 0 reduces: {reduces}, z′ = z annihilates: {annihilates}, min index {min_index:.4}, {secs:.2}s"),
    );
}

/// Upper quantile of χ²_k (Wilson–Hilferty).
fn chi2_critical(k: usize, z: f64) -> f64 {
    let a = 2.0 / (9.0 * k as f64);
    k as f64 * (1.0 - a + z * a.sqrt()).powi(3)
}

#[test]
fn criterion_05_sampler_statistics() {
    let start = Instant::now();
    let n = 100_000;
    let classes = 100;
    let pool = PointBatch::new(1, (0..n).map(|i| (i % classes) as f64).collect()).unwrap();
    let out = resample_from_indicator(&pool, &vec![1.0; n], n, &mut substream(31, 1)).unwrap();
    let mut counts = vec![0usize; classes];
    for &x in out.points() {
        counts[x as usize] += 1;
    }
    let e = n as f64 / classes as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let chi2_ok = chi2 < chi2_critical(classes - 1, 2.3263);

    let mut rng = substream(32, 1);
    let pool = PointBatch::new(1, (0..1_000_000).map(|_| rng.random::<f64>()).collect()).unwrap();
    let out = resample_from_indicator(&pool, pool.points(), n, &mut rng).unwrap();
    let mean = out.points().iter().sum::<f64>() / n as f64;
    let sigma = (1.0 / 18.0 / n as f64).sqrt();
    let mean_ok = (mean - 2.0 / 3.0).abs() < 3.0 * sigma;

    let annulus = Domain::Annulus {
        dim: 5,
        r_inner: 1.0,
        r_outer: 2.0,
    };
    let batch = annulus.sample_interior_uniform(n, &mut substream(33, 1)).unwrap();
    let mut r: Vec<f64> = (0..n).map(|i| batch.point(i).iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    r.sort_by(f64::total_cmp);
    let ks = r
        .iter()
        .enumerate()
        .map(|(i, &ri)| {
            let f = (ri.powi(5) - 1.0) / 31.0;
            (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    let ks_ok = ks < 1.628 / (n as f64).sqrt();
    let secs = start.elapsed().as_secs_f64();
    verdict(
        5,
        chi2_ok && mean_ok && ks_ok && secs < 30.0,
        &format!("χ² {chi2:.1}, mean {mean:.5} (σ {sigma:.1e}), annulus KS {ks:.2e}, {secs:.2}s"),
    );
}

#[test]
fn criterion_06_estimator_tracks_case_1_error() {
    let mut effectivity = Vec::new();
    let mut signs = Vec::new();
    let mut elapsed = Vec::new();
    for &seed in &SEEDS[..3] {
        let done = train(1, &scaled(1, Sampling::DwrResample, seed));
        let logged: Vec<_> = done.trace.rows.iter().filter(|r| r.eta_simple.is_some()).collect();
        let late: Vec<_> = logged.iter().filter(|r| r.epoch >= 300).collect();
        let inside = late
            .iter()
            .filter(|r| (0.5..=2.0).contains(&(r.eta_simple.unwrap() / r.j_error)))
            .count();
        let mid: Vec<_> = logged.iter().filter(|r| r.epoch >= 100).collect();
        let agree = mid.iter().filter(|r| r.eta_simple.unwrap().signum() == r.j_error.signum()).count();
        effectivity.push(inside as f64 / late.len() as f64);
        signs.push(agree as f64 / mid.len() as f64);
        elapsed.push(done.elapsed.as_secs_f64());
    }
    let (eff, sign, secs) = (median(&effectivity), median(&signs), median(&elapsed));
    verdict(
        6,
        eff >= 0.8 && sign >= 0.7,
        &format!("median effectivity share {eff:.3} (≥ 0.8), sign share {sign:.3} (≥ 0.7), median run {secs:.0}s (target 600s)"),
    );
}

fn compare_case(case_id: u32) -> (f64, f64, f64) {
    let mut adaptive = Vec::new();
    let mut uniform = Vec::new();
    let mut secs = 0.0;
    for &seed in &SEEDS {
        let a = train(case_id, &scaled(case_id, Sampling::DwrResample, seed));
        let u = train(case_id, &scaled(case_id, Sampling::Uniform, seed));
        adaptive.push(final_abs_error(&a.trace, 1).unwrap());
        uniform.push(final_abs_error(&u.trace, 1).unwrap());
        secs += (a.elapsed + u.elapsed).as_secs_f64();
    }
    (median(&adaptive), median(&uniform), secs)
}

#[test]
fn criterion_07_resampling_is_no_worse_than_uniform() {
    let mut pass = true;
    let mut total = 0.0;
    let mut parts = Vec::new();
    for case_id in [1, 2, 4, 5] {
        let (a, u, secs) = compare_case(case_id);
        pass &= a <= u;
        total += secs;
        parts.push(format!("case {case_id}: {a:.2e} vs {u:.2e}"));
    }
    verdict(7, pass, &format!("median final |J error| adaptive vs uniform; {}; {total:.0}s (target 3600s)", parts.join(", ")));
}

#[test]
fn criterion_08_high_dimensional_improvement() {
    let mut adaptive = Vec::new();
    let mut uniform = Vec::new();
    let mut secs = 0.0;
    for &seed in &SEEDS {
        let a = train(3, &scaled(3, Sampling::DwrResample, seed));
        let u = train(3, &scaled(3, Sampling::Uniform, seed));
        adaptive.push(final_abs_error(&a.trace, 10).unwrap());
        uniform.push(final_abs_error(&u.trace, 10).unwrap());
        secs += (a.elapsed + u.elapsed).as_secs_f64();
    }
    let (a, u) = (median(&adaptive), median(&uniform));
    let ratio = u / a;
    verdict(
        8,
        ratio >= 3.0,
        &format!("10-epoch mean |J error| adaptive {a:.2e}, uniform {u:.2e}, ratio {ratio:.2} (≥ 3), {secs:.0}s (target 1800s)"),
    );
}

#[test]
fn criterion_09_refinement_at_matched_point_count() {
    let mut adaptive = Vec::new();
    let mut uniform = Vec::new();
    let mut counts = Vec::new();
    for &seed in &SEEDS {
        let cfg = scaled(2, Sampling::DwrRefine, seed);
        let a = train(2, &cfg);
        let u = train(2, &baseline_for(&cfg));
        counts.push((a.points, u.points));
        adaptive.push(final_abs_error(&a.trace, 1).unwrap());
        uniform.push(final_abs_error(&u.trace, 1).unwrap());
    }
    let exact = counts.iter().all(|&(a, u)| a == 2200 && u == 2200);
    let (a, u) = (median(&adaptive), median(&uniform));
    verdict(
        9,
        exact && a <= u,
        &format!("final points {counts:?}, median |J error| refine {a:.2e} vs uniform {u:.2e}"),
    );
}

#[test]
fn criterion_10_replay_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let mut identical = true;
    for (case_id, sampling) in [(5, Sampling::DwrResample), (2, Sampling::DwrRefine)] {
        let case = case_definitions(case_id).unwrap();
        let mut cfg = scaled(case_id, sampling, 9);
        cfg.epochs = 240;
        cfg.adjoint_pretrain_epochs = 60;
        cfg.z_prime_train_epochs = 20;
        match sampling {
            Sampling::DwrRefine => {
                cfg.n_interior = 40;
                cfg.refine_interval = Some(80);
                cfg.refine_count = Some(30);
            }
            _ => cfg.resample_epochs = vec![100],
        }
        let first = dir.path().join(format!("case{case_id}"));
        execute_run(&case, &cfg, &first).unwrap();
        let again = dir.path().join(format!("case{case_id}_replay"));
        let replay = cmd_replay(&ReplayArgs {
            manifest: first.join("manifest.json"),
            out: again.clone(),
        });
        identical &= replay.is_ok()
            && std::fs::read(first.join(TRACE_FILE)).unwrap() == std::fs::read(again.join(TRACE_FILE)).unwrap();
    }
    verdict(10, identical, "traces of a resampling and a refinement run replayed from their manifests");
}

/// Least-squares slope of log(rms error) against log(n).
fn mc_slope(case_id: u32) -> f64 {
    let case = case_definitions(case_id).unwrap();
    let u = case.problem.exact_u.as_ref().unwrap();
    let field = u.field(case.problem.domain.dim());
    let sizes = [500usize, 2_000, 8_000, 32_000];
    let reps = 40;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (k, &n) in sizes.iter().enumerate() {
        let mut sq = 0.0;
        for r in 0..reps {
            let mut rng = substream(1000 + case_id as u64, (k * reps + r) as u64);
            let pts = case.problem.domain.sample_interior_uniform(n, &mut rng).unwrap();
            let j = functional_mc(&field, &case.goal, &case.problem.domain, &pts).unwrap();
            sq += (j - case.j_reference).powi(2);
        }
        xs.push((n as f64).ln());
        ys.push((sq / reps as f64).sqrt().ln());
    }
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

#[test]
fn criterion_11_reference_values() {
    let c1 = case_definitions(1).unwrap().j_reference;
    let closed = (c1 - 16.0 / (PI * PI)).abs() < 1e-12;
    let slopes: Vec<f64> = [2, 3, 4].iter().map(|&c| mc_slope(c)).collect();
    let slopes_ok = slopes.iter().all(|s| (-0.65..=-0.35).contains(s));
    verdict(
        11,
        closed && slopes_ok,
        &format!("case 1 J_ref − 16/π² = {:.1e}; MC slopes cases 2–4 {slopes:.3?}", c1 - 16.0 / (PI * PI)),
    );
}
