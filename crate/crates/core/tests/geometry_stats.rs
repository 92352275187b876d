use goalpinn_core::geometry::{resample_from_indicator, Domain, PointBatch};
use goalpinn_core::rng::substream;
use rand::Rng as _;
use std::f64::consts::PI;

fn annulus() -> Domain {
    Domain::Annulus {
        dim: 5,
        r_inner: 1.0,
        r_outer: 2.0,
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Upper `α` quantile of χ²_k by the Wilson–Hilferty approximation.
fn chi2_critical(k: usize, z: f64) -> f64 {
    let k = k as f64;
    let a = 2.0 / (9.0 * k);
    k * (1.0 - a + z * a.sqrt()).powi(3)
}

#[test]
fn square_interior_mean_is_the_center() {
    let n = 100_000;
    let batch = Domain::cube(2, 0.0, PI).sample_interior_uniform(n, &mut substream(1, 1)).unwrap();
    let sigma = (PI * PI / 12.0 / n as f64).sqrt();
    for k in 0..2 {
        let mean: f64 = (0..n).map(|i| batch.point(i)[k]).sum::<f64>() / n as f64;
        assert!((mean - PI / 2.0).abs() < 3.0 * sigma, "axis {k}: {mean}");
    }
}

#[test]
fn annulus_radial_cdf_passes_ks() {
    let n = 100_000;
    let batch = annulus().sample_interior_uniform(n, &mut substream(2, 1)).unwrap();
    let mut r: Vec<f64> = (0..n).map(|i| norm(batch.point(i))).collect();
    r.sort_by(f64::total_cmp);
    let cdf = |r: f64| (r.powi(5) - 1.0) / 31.0;
    let d = r
        .iter()
        .enumerate()
        .map(|(i, &ri)| {
            let f = cdf(ri);
            (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < 1.628 / (n as f64).sqrt(), "KS statistic {d}");
}

#[test]
fn rectangle_boundary_face_counts_follow_face_lengths() {
    let m = 100_000;
    let dom = Domain::Hyperrectangle {
        lower: vec![0.0, 0.0],
        upper: vec![1.0, 2.0],
    };
    let b = dom.sample_boundary_uniform(m, &mut substream(3, 1)).unwrap();
    // Faces x=0, x=1 have length 2; faces y=0, y=2 have length 1.
    let mut counts = [0usize; 4];
    for i in 0..m {
        let p = b.point(i);
        assert!(p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 2.0);
        let face = if p[0] == 0.0 {
            0
        } else if p[0] == 1.0 {
            1
        } else if p[1] == 0.0 {
            2
        } else {
            3
        };
        counts[face] += 1;
    }
    for (c, p) in counts.iter().zip([1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]) {
        let sigma = (m as f64 * p * (1.0 - p)).sqrt();
        assert!((*c as f64 - m as f64 * p).abs() < 3.0 * sigma, "{counts:?}");
    }
}

#[test]
fn annulus_boundary_split_and_radii() {
    let m = 100_000;
    let b = annulus().sample_boundary_uniform(m, &mut substream(4, 1)).unwrap();
    let mut outer = 0;
    for i in 0..m {
        let r = norm(b.point(i));
        assert!((r - 1.0).abs() < 1e-12 || (r - 2.0).abs() < 1e-12, "{r}");
        if r > 1.5 {
            outer += 1;
        }
    }
    let p = 16.0 / 17.0;
    let sigma = (m as f64 * p * (1.0 - p)).sqrt();
    assert!((outer as f64 - m as f64 * p).abs() < 3.0 * sigma);
}

#[test]
fn measures_agree_with_hit_rate_estimates() {
    let n = 1_000_000;
    let mut rng = substream(5, 1);
    for dom in [annulus(), Domain::Hyperrectangle { lower: vec![0.0, -1.0, 2.0], upper: vec![0.5, 1.0, 3.0] }] {
        let (lo, hi) = dom.bounding_box();
        let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
        let mut hits = 0usize;
        let mut x = vec![0.0; lo.len()];
        for _ in 0..n {
            for k in 0..lo.len() {
                x[k] = rng.random_range(lo[k]..hi[k]);
            }
            if dom.contains(&x) {
                hits += 1;
            }
        }
        let est = box_vol * hits as f64 / n as f64;
        assert!((est / dom.volume() - 1.0).abs() < 0.01, "{dom:?}: {est} vs {}", dom.volume());
    }
    let v = annulus().volume();
    let omega5 = 8.0 * std::f64::consts::PI.powi(2) / 15.0;
    assert!((v - omega5 * 31.0).abs() < 1e-10);
}

#[test]
fn constant_indicator_resamples_uniformly() {
    let p = 100;
    let n = 100_000;
    // Pool of n rows falling into p equally populated classes.
    let pool = PointBatch::new(1, (0..n).map(|i| (i % p) as f64).collect()).unwrap();
    let out = resample_from_indicator(&pool, &vec![0.7; n], n, &mut substream(6, 1)).unwrap();
    let mut counts = vec![0usize; p];
    for &x in out.points() {
        counts[x as usize] += 1;
    }
    let e = n as f64 / p as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    assert!(chi2 < chi2_critical(p - 1, 2.3263), "χ² = {chi2}");
}

#[test]
fn linear_indicator_has_mean_two_thirds() {
    let mut rng = substream(7, 1);
    let pool_size = 2_000_000;
    let pool = PointBatch::new(1, (0..pool_size).map(|_| rng.random::<f64>()).collect()).unwrap();
    let n = 100_000;
    let out = resample_from_indicator(&pool, pool.points(), n, &mut rng).unwrap();
    let mean = out.points().iter().sum::<f64>() / n as f64;
    let sigma = (1.0 / 18.0 / n as f64).sqrt();
    assert!((mean - 2.0 / 3.0).abs() < 3.0 * sigma, "{mean}");
}

#[test]
fn weighted_resample_average_recovers_pool_average() {
    let mut rng = substream(8, 1);
    let pool_size = 200_000;
    let pool = PointBatch::new(1, (0..pool_size).map(|_| rng.random::<f64>()).collect()).unwrap();
    let phi = |x: f64| (3.0 * x).sin() + x * x;
    let target = pool.points().iter().map(|&x| phi(x)).sum::<f64>() / pool_size as f64;
    let mu: Vec<f64> = pool.points().iter().map(|&x| 0.2 + x).collect();
    let n = 100_000;
    let out = resample_from_indicator(&pool, &mu, n, &mut rng).unwrap();
    let w = out.weights().unwrap();
    let sw: f64 = w.iter().sum();
    let est = out.points().iter().zip(w).map(|(&x, w)| w * phi(x)).sum::<f64>() / sw;
    let var: f64 = out.points().iter().zip(w).map(|(&x, w)| (w * (phi(x) - est)).powi(2)).sum::<f64>() / (sw * sw);
    assert!((est - target).abs() < 3.0 * var.sqrt(), "{est} vs {target} (σ {})", var.sqrt());
}

#[test]
fn samplers_are_seed_deterministic() {
    for dom in [annulus(), Domain::cube(3, -1.0, 1.0)] {
        let a = dom.sample_interior_uniform(100, &mut substream(9, 3)).unwrap();
        let b = dom.sample_interior_uniform(100, &mut substream(9, 3)).unwrap();
        assert_eq!(a, b);
        let c = dom.sample_boundary_uniform(100, &mut substream(9, 3)).unwrap();
        let d = dom.sample_boundary_uniform(100, &mut substream(9, 3)).unwrap();
        assert_eq!(c, d);
    }
}
