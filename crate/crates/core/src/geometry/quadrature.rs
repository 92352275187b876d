use std::f64::consts::PI;

use super::PointBatch;
use crate::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Three-term recurrence for P_n and its derivative.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let step = pn / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Weighted point set approximating `∫ φ` over a region.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    pub dim: usize,
    /// Row-major coordinates.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.len() != dim * weights.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * weights.len(),
                got: points.len(),
            });
        }
        Ok(Quadrature { dim, points, weights })
    }

    /// Monte Carlo rule: every point gets `measure / N`.
    pub fn uniform(batch: &PointBatch, measure: f64) -> Result<Self> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let w = measure / batch.len() as f64;
        Self::new(batch.dim(), batch.points().to_vec(), vec![w; batch.len()])
    }

    /// Tensor Gauss–Legendre rule with `n` nodes per axis.
    pub fn gauss_box(lower: &[f64], upper: &[f64], n: usize) -> Self {
        let d = lower.len();
        let (x, w) = gauss_legendre(n);
        let total = n.pow(d as u32);
        let mut points = Vec::with_capacity(total * d);
        let mut weights = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rest = flat;
            let mut weight = 1.0;
            for k in 0..d {
                let i = rest % n;
                rest /= n;
                let half = 0.5 * (upper[k] - lower[k]);
                points.push(lower[k] + half * (x[i] + 1.0));
                weight *= half * w[i];
            }
            weights.push(weight);
        }
        Quadrature { dim: d, points, weights }
    }

    /// Gauss–Legendre rule on the surface of a box, `n` nodes per face axis.
    pub fn gauss_box_faces(lower: &[f64], upper: &[f64], n: usize) -> Self {
        let d = lower.len();
        let mut out = Quadrature {
            dim: d,
            points: Vec::new(),
            weights: Vec::new(),
        };
        for axis in 0..d {
            let lo: Vec<f64> = (0..d).filter(|&k| k != axis).map(|k| lower[k]).collect();
            let hi: Vec<f64> = (0..d).filter(|&k| k != axis).map(|k| upper[k]).collect();
            let face = if d == 1 {
                Quadrature {
                    dim: 1,
                    points: Vec::new(),
                    weights: vec![1.0],
                }
            } else {
                Self::gauss_box(&lo, &hi, n)
            };
            for side in [lower[axis], upper[axis]] {
                for (j, w) in face.weights.iter().enumerate() {
                    let mut it = face.points[j * (d - 1)..(j + 1) * (d - 1)].iter();
                    for k in 0..d {
                        out.points.push(if k == axis { side } else { *it.next().expect("face coordinate") });
                    }
                    out.weights.push(*w);
                }
            }
        }
        out
    }

    /// Polar rule on a disk in the plane: Gauss–Legendre in the radius,
    /// trapezoid (spectrally accurate for periodic integrands) in the angle.
    pub fn gauss_disk(center: &[f64], radius: f64, n_radial: usize, n_angular: usize) -> Self {
        let (x, w) = gauss_legendre(n_radial);
        let mut points = Vec::with_capacity(2 * n_radial * n_angular);
        let mut weights = Vec::with_capacity(n_radial * n_angular);
        let dphi = 2.0 * PI / n_angular as f64;
        for (xi, wi) in x.iter().zip(&w) {
            let r = 0.5 * radius * (xi + 1.0);
            let wr = 0.5 * radius * wi * r;
            for k in 0..n_angular {
                let phi = (k as f64 + 0.5) * dphi;
                points.push(center[0] + r * phi.cos());
                points.push(center[1] + r * phi.sin());
                weights.push(wr * dphi);
            }
        }
        Quadrature { dim: 2, points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Sum of weights, i.e. the measure the rule integrates over.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ w_i v_i`, summed in index order.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_fn(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        (0..self.len()).map(|i| self.weights[i] * f(self.point(i))).sum()
    }
}
