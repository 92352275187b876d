use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Open01};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::PointBatch;
use crate::rng::Rng;
use crate::{Error, Result};

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    PI.powf(h) / libm::tgamma(h + 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Hyperrectangle { lower: Vec<f64>, upper: Vec<f64> },
    Annulus { dim: usize, r_inner: f64, r_outer: f64 },
}

impl Domain {
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Domain::Hyperrectangle {
            lower: vec![lo; dim],
            upper: vec![hi; dim],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Hyperrectangle { lower, upper } => {
                if lower.is_empty() || lower.len() != upper.len() {
                    return Err(Error::Config("hyperrectangle bounds must be nonempty and of equal length".into()));
                }
                if lower.iter().zip(upper).any(|(l, u)| !(l < u)) {
                    return Err(Error::Config("hyperrectangle needs lower < upper componentwise".into()));
                }
            }
            Domain::Annulus { dim, r_inner, r_outer } => {
                if *dim == 0 || !(0.0 < *r_inner && r_inner < r_outer) {
                    return Err(Error::Config("annulus needs dim > 0 and 0 < r_inner < r_outer".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Hyperrectangle { lower, .. } => lower.len(),
            Domain::Annulus { dim, .. } => *dim,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Domain::Hyperrectangle { lower, upper } => lower.iter().zip(upper).map(|(l, u)| u - l).product(),
            Domain::Annulus { dim, r_inner, r_outer } => {
                let d = *dim as i32;
                unit_ball_volume(*dim) * (r_outer.powi(d) - r_inner.powi(d))
            }
        }
    }

    pub fn boundary_measure(&self) -> f64 {
        match self {
            Domain::Hyperrectangle { .. } => 2.0 * self.face_measures().iter().sum::<f64>(),
            Domain::Annulus { dim, r_inner, r_outer } => {
                let d = *dim as i32;
                *dim as f64 * unit_ball_volume(*dim) * (r_outer.powi(d - 1) + r_inner.powi(d - 1))
            }
        }
    }

    /// `(|Ω|, |∂Ω|)`.
    pub fn measures(&self) -> (f64, f64) {
        (self.volume(), self.boundary_measure())
    }

    /// Measure of the face orthogonal to axis `k` (one of the pair).
    fn face_measures(&self) -> Vec<f64> {
        match self {
            Domain::Hyperrectangle { lower, upper } => (0..lower.len())
                .map(|k| (0..lower.len()).filter(|&j| j != k).map(|j| upper[j] - lower[j]).product())
                .collect(),
            Domain::Annulus { .. } => Vec::new(),
        }
    }

    /// Strict interior membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Hyperrectangle { lower, upper } => {
                x.len() == lower.len() && x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| l < v && v < u)
            }
            Domain::Annulus { dim, r_inner, r_outer } => {
                let r = norm(x);
                x.len() == *dim && *r_inner < r && r < *r_outer
            }
        }
    }

    /// Distance of `x` from the boundary set, for points inside or on `Ω̄`.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            Domain::Hyperrectangle { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| (v - l).abs().min((u - v).abs()))
                .fold(f64::INFINITY, f64::min),
            Domain::Annulus { r_inner, r_outer, .. } => {
                let r = norm(x);
                (r - r_inner).abs().min((r_outer - r).abs())
            }
        }
    }

    /// Axis-aligned bounding box.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Hyperrectangle { lower, upper } => (lower.clone(), upper.clone()),
            Domain::Annulus { dim, r_outer, .. } => (vec![-r_outer; *dim], vec![*r_outer; *dim]),
        }
    }

    pub fn sample_interior_uniform(&self, n: usize, rng: &mut Rng) -> Result<PointBatch> {
        if n == 0 {
            return Err(Error::EmptyBatch);
        }
        let d = self.dim();
        let mut points = Vec::with_capacity(n * d);
        match self {
            Domain::Hyperrectangle { lower, upper } => {
                for _ in 0..n {
                    for k in 0..d {
                        let u: f64 = Open01.sample(rng);
                        points.push(lower[k] + (upper[k] - lower[k]) * u);
                    }
                }
            }
            Domain::Annulus { r_inner, r_outer, .. } => {
                let di = d as i32;
                let (a, b) = (r_inner.powi(di), r_outer.powi(di));
                for _ in 0..n {
                    let u: f64 = Open01.sample(rng);
                    let r = (a + u * (b - a)).powf(1.0 / d as f64);
                    push_on_sphere(&mut points, d, r, rng);
                }
            }
        }
        PointBatch::new(d, points)
    }

    pub fn sample_boundary_uniform(&self, m: usize, rng: &mut Rng) -> Result<PointBatch> {
        if m == 0 {
            return Err(Error::EmptyBatch);
        }
        let d = self.dim();
        let mut points = Vec::with_capacity(m * d);
        match self {
            Domain::Hyperrectangle { lower, upper } => {
                let faces = self.face_measures();
                // Faces 2k (lower) and 2k+1 (upper) share the same measure.
                let pick = WeightedIndex::new(faces.iter().flat_map(|&f| [f, f])).expect("positive face measures");
                for _ in 0..m {
                    let face = pick.sample(rng);
                    let axis = face / 2;
                    for k in 0..d {
                        if k == axis {
                            points.push(if face % 2 == 0 { lower[k] } else { upper[k] });
                        } else {
                            let u: f64 = Open01.sample(rng);
                            points.push(lower[k] + (upper[k] - lower[k]) * u);
                        }
                    }
                }
            }
            Domain::Annulus { r_inner, r_outer, .. } => {
                let di = d as i32;
                let outer_share = r_outer.powi(di - 1) / (r_outer.powi(di - 1) + r_inner.powi(di - 1));
                for _ in 0..m {
                    let u: f64 = Open01.sample(rng);
                    let r = if u < outer_share { *r_outer } else { *r_inner };
                    push_on_sphere(&mut points, d, r, rng);
                }
            }
        }
        PointBatch::new(d, points)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn push_on_sphere(points: &mut Vec<f64>, d: usize, r: f64, rng: &mut Rng) {
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm(&g);
        if n > 1e-300 {
            points.extend(g.iter().map(|v| r * v / n));
            return;
        }
    }
}

/// Part of the domain a goal functional looks at.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubRegion {
    WholeDomain,
    /// Closed ball.
    Ball { center: Vec<f64>, radius: f64 },
}

impl SubRegion {
    pub fn indicator(&self, x: &[f64]) -> f64 {
        match self {
            SubRegion::WholeDomain => 1.0,
            SubRegion::Ball { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                if r2 <= radius * radius {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Whether the region lies in the closure of `domain`.
    pub fn inside(&self, domain: &Domain) -> bool {
        match self {
            SubRegion::WholeDomain => true,
            SubRegion::Ball { center, radius } => {
                center.len() == domain.dim()
                    && match domain {
                        Domain::Hyperrectangle { lower, upper } => center
                            .iter()
                            .zip(lower.iter().zip(upper))
                            .all(|(c, (l, u))| c - radius >= *l && c + radius <= *u),
                        Domain::Annulus { r_inner, r_outer, .. } => {
                            let r = norm(center);
                            r - radius >= *r_inner && r + radius <= *r_outer
                        }
                    }
            }
        }
    }
}
