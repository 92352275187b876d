//! Network-based dual weighted residual estimators.
//!
//! With primal `u`, adjoint `z` and a weight field `w`, the local indicator is
//!
//! ```text
//! μ(x) = f w − ∇u·∇w        (interior)
//! μ(y) = −λ (u − g) w        (boundary)
//! ```
//!
//! The simple estimator uses `w = z`; the localized one uses `w = z − z′`
//! where `z′` lives in the derivative set of the primal network. Both are
//! integrated with the same quadrature rules, so they share every jet of `u`
//! and `z`.

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::geometry::{PointBatch, Quadrature};
use crate::nn::{JetBatch, JetField, JetOrder};
use crate::problem::ProblemDefinition;
use crate::{Error, Result};

/// Interior and boundary rules the estimators are integrated with.
#[derive(Clone, Debug)]
pub struct EstimatorRules {
    pub interior: Quadrature,
    pub boundary: Quadrature,
}

impl EstimatorRules {
    /// Monte Carlo rules on uniform batches: `|Ω|/N` and `|∂Ω|/M` weights.
    pub fn uniform(problem: &ProblemDefinition, interior: &PointBatch, boundary: &PointBatch) -> Result<Self> {
        let (vol, area) = problem.domain.measures();
        Ok(EstimatorRules {
            interior: Quadrature::uniform(interior, vol)?,
            boundary: Quadrature::uniform(boundary, area)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Interior,
    Boundary,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub eta_simple: f64,
    pub eta_localized: f64,
    #[serde(skip)]
    pub mu_interior: Vec<f64>,
    #[serde(skip)]
    pub mu_boundary: Vec<f64>,
    #[serde(skip)]
    pub interior_weights: Vec<f64>,
    #[serde(skip)]
    pub boundary_weights: Vec<f64>,
    /// `None` when the localized estimator vanishes.
    pub indicator_index: Option<f64>,
}

impl EstimatorReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Per-point localized indicators, interior points first, as
    /// `x1,...,xd,mu`.
    pub fn write_indicator_csv<W: Write>(&self, rules: &EstimatorRules, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let d = rules.interior.dim;
        let mut header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
        header.push("mu".into());
        w.write_record(&header)?;
        for (rule, mu) in [(&rules.interior, &self.mu_interior), (&rules.boundary, &self.mu_boundary)] {
            for (i, m) in mu.iter().enumerate() {
                let mut row: Vec<String> = rule.point(i).iter().map(|v| format!("{v:e}")).collect();
                row.push(format!("{m:e}"));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `Σ|w_i μ_i| / |Σ w_i μ_i|` over interior and boundary contributions.
pub fn indicator_index(report: &EstimatorReport) -> Result<f64> {
    index_of(
        &report.mu_interior,
        &report.interior_weights,
        &report.mu_boundary,
        &report.boundary_weights,
    )
}

fn index_of(mu_i: &[f64], w_i: &[f64], mu_b: &[f64], w_b: &[f64]) -> Result<f64> {
    let mut abs = 0.0;
    let mut sum = 0.0;
    for (m, w) in mu_i.iter().zip(w_i).chain(mu_b.iter().zip(w_b)) {
        abs += (w * m).abs();
        sum += w * m;
    }
    if sum == 0.0 || !sum.is_finite() {
        return Err(Error::UndefinedIndicatorIndex);
    }
    Ok(abs / sum.abs())
}

fn check_dims(fields: &[&dyn JetField], problem: &ProblemDefinition) -> Result<()> {
    let d = problem.domain.dim();
    for f in fields {
        if f.input_dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: f.input_dim(),
            });
        }
    }
    Ok(())
}

/// `z − z′` channelwise, or `z` itself when `z′` is absent.
fn weight_jets(z: &JetBatch, z_prime: Option<&JetBatch>) -> JetBatch {
    match z_prime {
        None => z.clone(),
        Some(zp) => JetBatch {
            dim: z.dim,
            order: z.order,
            value: z.value.iter().zip(&zp.value).map(|(a, b)| a - b).collect(),
            grad: z.grad.iter().zip(&zp.grad).map(|(a, b)| a - b).collect(),
            laplacian: z.laplacian.iter().zip(&zp.laplacian).map(|(a, b)| a - b).collect(),
        },
    }
}

fn interior_mu(f: &[f64], u: &JetBatch, w: &JetBatch) -> Result<Vec<f64>> {
    (0..u.len())
        .map(|i| {
            let dot: f64 = u.grad(i).iter().zip(w.grad(i)).map(|(a, b)| a * b).sum();
            let m = f[i] * w.value[i] - dot;
            finite(m, "interior indicator", i)
        })
        .collect()
}

fn boundary_mu(lambda: f64, g: &[f64], u: &JetBatch, w: &JetBatch) -> Result<Vec<f64>> {
    (0..u.len())
        .map(|j| finite(-lambda * (u.value[j] - g[j]) * w.value[j], "boundary indicator", j))
        .collect()
}

fn finite(v: f64, context: &str, point: usize) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical {
            context: context.into(),
            epoch: None,
            point: Some(point),
        })
    }
}

/// Adjoint-side data frozen on a set of rules: the jets of `z` and `z′` and
/// the problem data at every node. Evaluating a primal network then costs one
/// gradient-order pass over the interior rule and one value pass over the
/// boundary rule.
#[derive(Clone, Debug)]
pub struct PreparedEstimator {
    rules: EstimatorRules,
    lambda: f64,
    f: Vec<f64>,
    g: Vec<f64>,
    z_in: JetBatch,
    z_bd: JetBatch,
    /// `z − z′` jets, when `z′` is given.
    w_in: Option<JetBatch>,
    w_bd: Option<JetBatch>,
}

impl PreparedEstimator {
    pub fn new(
        z: &dyn JetField,
        z_prime: Option<&dyn JetField>,
        lambda: f64,
        problem: &ProblemDefinition,
        rules: EstimatorRules,
    ) -> Result<Self> {
        check_dims(&[z], problem)?;
        if let Some(zp) = z_prime {
            check_dims(&[zp], problem)?;
        }
        if rules.interior.is_empty() || rules.boundary.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let ip = &rules.interior.points;
        let bp = &rules.boundary.points;
        let f = (0..rules.interior.len()).map(|i| problem.source.value(rules.interior.point(i))).collect();
        let g = (0..rules.boundary.len()).map(|j| problem.boundary.value(rules.boundary.point(j))).collect();
        let z_in = z.field_jets(ip, JetOrder::Gradient)?;
        let z_bd = z.field_jets(bp, JetOrder::Value)?;
        let (w_in, w_bd) = match z_prime {
            None => (None, None),
            Some(zp) => (
                Some(weight_jets(&z_in, Some(&zp.field_jets(ip, JetOrder::Gradient)?))),
                Some(weight_jets(&z_bd, Some(&zp.field_jets(bp, JetOrder::Value)?))),
            ),
        };
        Ok(PreparedEstimator {
            rules,
            lambda,
            f,
            g,
            z_in,
            z_bd,
            w_in,
            w_bd,
        })
    }

    pub fn rules(&self) -> &EstimatorRules {
        &self.rules
    }

    pub fn has_localized(&self) -> bool {
        self.w_in.is_some()
    }

    /// Estimators for primal `u`. Without `z′` the localized fields repeat
    /// the simple ones.
    pub fn evaluate(&self, u: &dyn JetField) -> Result<EstimatorReport> {
        if u.input_dim() != self.rules.interior.dim {
            return Err(Error::DimensionMismatch {
                expected: self.rules.interior.dim,
                got: u.input_dim(),
            });
        }
        let u_in = u.field_jets(&self.rules.interior.points, JetOrder::Gradient)?;
        let u_bd = u.field_jets(&self.rules.boundary.points, JetOrder::Value)?;
        let simple_in = interior_mu(&self.f, &u_in, &self.z_in)?;
        let simple_bd = boundary_mu(self.lambda, &self.g, &u_bd, &self.z_bd)?;
        let eta_simple = self.rules.interior.integrate(&simple_in) + self.rules.boundary.integrate(&simple_bd);
        let (mu_interior, mu_boundary) = match (&self.w_in, &self.w_bd) {
            (Some(wi), Some(wb)) => (
                interior_mu(&self.f, &u_in, wi)?,
                boundary_mu(self.lambda, &self.g, &u_bd, wb)?,
            ),
            _ => (simple_in, simple_bd),
        };
        let eta_localized = self.rules.interior.integrate(&mu_interior) + self.rules.boundary.integrate(&mu_boundary);
        let w_i = &self.rules.interior.weights;
        let w_b = &self.rules.boundary.weights;
        let indicator_index = index_of(&mu_interior, w_i, &mu_boundary, w_b).ok();
        Ok(EstimatorReport {
            eta_simple,
            eta_localized,
            mu_interior,
            mu_boundary,
            interior_weights: w_i.clone(),
            boundary_weights: w_b.clone(),
            indicator_index,
        })
    }
}

/// Both estimators and all localized indicators on the given rules.
pub fn estimate(
    u: &dyn JetField,
    z: &dyn JetField,
    z_prime: Option<&dyn JetField>,
    lambda: f64,
    problem: &ProblemDefinition,
    rules: &EstimatorRules,
) -> Result<EstimatorReport> {
    check_dims(&[u], problem)?;
    PreparedEstimator::new(z, z_prime, lambda, problem, rules.clone())?.evaluate(u)
}

/// `⟨f, z⟩ − ⟨∇u, ∇z⟩ − λ⟨u − g, z⟩_∂Ω`.
pub fn eta_simple(
    u: &dyn JetField,
    z: &dyn JetField,
    lambda: f64,
    problem: &ProblemDefinition,
    rules: &EstimatorRules,
) -> Result<f64> {
    Ok(estimate(u, z, None, lambda, problem, rules)?.eta_simple)
}

/// `⟨f, z − z′⟩ − ⟨∇u, ∇(z − z′)⟩ − λ⟨u − g, z − z′⟩_∂Ω`.
pub fn eta_localized(
    u: &dyn JetField,
    z: &dyn JetField,
    z_prime: &dyn JetField,
    lambda: f64,
    problem: &ProblemDefinition,
    rules: &EstimatorRules,
) -> Result<f64> {
    Ok(estimate(u, z, Some(z_prime), lambda, problem, rules)?.eta_localized)
}

/// Localized interior indicators at arbitrary points; this is what the
/// resampler draws from.
pub fn interior_indicators(
    u: &dyn JetField,
    z: &dyn JetField,
    z_prime: Option<&dyn JetField>,
    problem: &ProblemDefinition,
    points: &PointBatch,
) -> Result<Vec<f64>> {
    check_dims(&[u, z], problem)?;
    let f: Vec<f64> = (0..points.len()).map(|i| problem.source.value(points.point(i))).collect();
    let u_j = u.field_jets(points.points(), JetOrder::Gradient)?;
    let z_j = z.field_jets(points.points(), JetOrder::Gradient)?;
    let zp_j = match z_prime {
        Some(zp) => Some(zp.field_jets(points.points(), JetOrder::Gradient)?),
        None => None,
    };
    interior_mu(&f, &u_j, &weight_jets(&z_j, zp_j.as_ref()))
}

/// Simple indicator at a single point.
pub fn mu_simple(
    x: &[f64],
    at: Location,
    u: &dyn JetField,
    z: &dyn JetField,
    lambda: f64,
    problem: &ProblemDefinition,
) -> Result<f64> {
    point_mu(x, at, u, z, None, lambda, problem)
}

/// Localized indicator at a single point.
pub fn mu_localized(
    x: &[f64],
    at: Location,
    u: &dyn JetField,
    z: &dyn JetField,
    z_prime: &dyn JetField,
    lambda: f64,
    problem: &ProblemDefinition,
) -> Result<f64> {
    point_mu(x, at, u, z, Some(z_prime), lambda, problem)
}

fn point_mu(
    x: &[f64],
    at: Location,
    u: &dyn JetField,
    z: &dyn JetField,
    z_prime: Option<&dyn JetField>,
    lambda: f64,
    problem: &ProblemDefinition,
) -> Result<f64> {
    let order = match at {
        Location::Interior => JetOrder::Gradient,
        Location::Boundary => JetOrder::Value,
    };
    let u_j = u.field_jets(x, order)?;
    let z_j = z.field_jets(x, order)?;
    let zp_j = match z_prime {
        Some(zp) => Some(zp.field_jets(x, order)?),
        None => None,
    };
    let w = weight_jets(&z_j, zp_j.as_ref());
    let mu = match at {
        Location::Interior => interior_mu(&[problem.source.value(x)], &u_j, &w)?,
        Location::Boundary => boundary_mu(lambda, &[problem.boundary.value(x)], &u_j, &w)?,
    };
    Ok(mu[0])
}
