use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::PointBatch;
use crate::rng::Rng;
use crate::{Error, Result};

/// Draws `n` pool rows i.i.d. with replacement, row `i` with probability
/// `|μ_i| / Σ|μ_j|`. The returned batch carries the importance weights
/// `(1/P) / p_i` relative to the uniform pool.
pub fn resample_from_indicator(pool: &PointBatch, indicator: &[f64], n: usize, rng: &mut Rng) -> Result<PointBatch> {
    let p = pool.len();
    if indicator.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: indicator.len(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    if p < n {
        return Err(Error::Config(format!("pool of {p} points is smaller than the {n} requested")));
    }
    if indicator.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateDensity);
    }
    let mass: Vec<f64> = indicator.iter().map(|v| v.abs()).collect();
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateDensity);
    }
    let pick = WeightedIndex::new(&mass).map_err(|_| Error::DegenerateDensity)?;
    let d = pool.dim();
    let mut points = Vec::with_capacity(n * d);
    let mut weights = Vec::with_capacity(n);
    for _ in 0..n {
        let i = pick.sample(rng);
        points.extend_from_slice(pool.point(i));
        weights.push(total / (p as f64 * mass[i]));
    }
    PointBatch::with_weights(d, points, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn zero_half_is_never_drawn() {
        let pool = PointBatch::new(1, (0..100).map(f64::from).collect()).unwrap();
        let mu: Vec<f64> = (0..100).map(|i| if i < 50 { 0.0 } else { -2.0 }).collect();
        let out = resample_from_indicator(&pool, &mu, 40, &mut substream(1, 9)).unwrap();
        assert!(out.points().iter().all(|&x| x >= 50.0));
        assert!(out.weights().unwrap().iter().all(|&w| (w - 0.5).abs() < 1e-15));
    }

    #[test]
    fn degenerate_inputs() {
        let pool = PointBatch::new(1, vec![0.0, 1.0]).unwrap();
        let mut rng = substream(1, 1);
        assert!(matches!(resample_from_indicator(&pool, &[0.0, 0.0], 1, &mut rng), Err(Error::DegenerateDensity)));
        assert!(matches!(resample_from_indicator(&pool, &[f64::NAN, 1.0], 1, &mut rng), Err(Error::DegenerateDensity)));
        assert!(resample_from_indicator(&pool, &[1.0, 1.0], 3, &mut rng).is_err());
        assert!(resample_from_indicator(&pool, &[1.0], 1, &mut rng).is_err());
    }
}
