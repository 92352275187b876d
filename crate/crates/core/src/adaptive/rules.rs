use super::QuadratureConfig;
use crate::estimator::EstimatorRules;
use crate::geometry::{Domain, Quadrature, SubRegion};
use crate::nn::{JetField, JetOrder};
use crate::problem::{GoalFunctional, ProblemDefinition};
use crate::rng::{stream, substream};
use crate::{Error, Result};

fn gauss_friendly(domain: &Domain) -> Option<(&[f64], &[f64])> {
    match domain {
        Domain::Hyperrectangle { lower, upper } if lower.len() <= 3 => Some((lower, upper)),
        _ => None,
    }
}

/// Rule for `J`: a polar rule on a planar disk region, a tensor Gauss rule on
/// low-dimensional boxes, Monte Carlo otherwise.
pub fn functional_rule(
    problem: &ProblemDefinition,
    goal: &GoalFunctional,
    cfg: &QuadratureConfig,
    seed: u64,
) -> Result<Quadrature> {
    let n = cfg.gauss_nodes;
    match (&goal.region, gauss_friendly(&problem.domain)) {
        (SubRegion::Ball { center, radius }, _) if center.len() == 2 && goal.region.inside(&problem.domain) => {
            Ok(Quadrature::gauss_disk(center, *radius, n, 2 * n))
        }
        (SubRegion::WholeDomain, Some((lo, hi))) => Ok(Quadrature::gauss_box(lo, hi, n)),
        _ => {
            let mut rng = substream(seed, stream::FUNCTIONAL_POINTS);
            let pts = problem.domain.sample_interior_uniform(cfg.functional_points, &mut rng)?;
            Quadrature::uniform(&pts, problem.domain.volume())
        }
    }
}

/// Interior and boundary rules for the estimators.
pub fn estimator_rules(problem: &ProblemDefinition, cfg: &QuadratureConfig, seed: u64) -> Result<EstimatorRules> {
    match gauss_friendly(&problem.domain) {
        Some((lo, hi)) => Ok(EstimatorRules {
            interior: Quadrature::gauss_box(lo, hi, cfg.gauss_nodes),
            boundary: Quadrature::gauss_box_faces(lo, hi, cfg.gauss_nodes),
        }),
        None => {
            let mut rng = substream(seed, stream::ESTIMATOR_POINTS);
            let inner = problem.domain.sample_interior_uniform(cfg.estimator_interior, &mut rng)?;
            let outer = problem.domain.sample_boundary_uniform(cfg.estimator_boundary, &mut rng)?;
            EstimatorRules::uniform(problem, &inner, &outer)
        }
    }
}

/// Evaluates `J(u_θ)` on a fixed rule. With a known exact solution the rule
/// only integrates the difference, `J(u_θ) = J(u) + J(u_θ − u)`, which
/// removes most of the quadrature noise from Monte Carlo rules.
#[derive(Clone, Debug)]
pub struct GoalEvaluator {
    rule: Quadrature,
    /// `w_i j(x_i)`.
    weighted_j: Vec<f64>,
    exact: Option<(f64, Vec<f64>)>,
}

impl GoalEvaluator {
    pub fn new(problem: &ProblemDefinition, goal: &GoalFunctional, j_reference: Option<f64>, rule: Quadrature) -> Self {
        let weighted_j = (0..rule.len()).map(|i| rule.weights[i] * goal.j(rule.point(i))).collect();
        let exact = match (&problem.exact_u, j_reference) {
            (Some(u), Some(jr)) => Some((jr, (0..rule.len()).map(|i| u.value(rule.point(i))).collect())),
            _ => None,
        };
        GoalEvaluator { rule, weighted_j, exact }
    }

    pub fn rule(&self) -> &Quadrature {
        &self.rule
    }

    pub fn evaluate(&self, u: &dyn JetField) -> Result<f64> {
        let values = u.field_jets(&self.rule.points, JetOrder::Value)?.value;
        let j = match &self.exact {
            Some((jr, ue)) => jr + self.weighted_j.iter().zip(values.iter().zip(ue)).map(|(w, (v, e))| w * (v - e)).sum::<f64>(),
            None => self.weighted_j.iter().zip(&values).map(|(w, v)| w * v).sum(),
        };
        if j.is_finite() {
            Ok(j)
        } else {
            Err(Error::numerical("goal functional"))
        }
    }
}
