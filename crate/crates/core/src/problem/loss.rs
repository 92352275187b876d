use serde::{Deserialize, Serialize};

use super::{GoalFunctional, ProblemDefinition};
use crate::geometry::{Domain, PointBatch};
use crate::nn::{JetField, JetOrder, JetSeed, Network, PointJet, PointLoss};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    Pinn,
    DeepRitz,
}

/// Interior term. PINN: `c_i (−Δu − f_i)²`; Deep Ritz: `c_i (½|∇u|² − f_i u)`.
struct InteriorTerm<'a> {
    kind: LossKind,
    f: &'a [f64],
    scale: &'a [f64],
}

impl PointLoss for InteriorTerm<'_> {
    fn order(&self) -> JetOrder {
        match self.kind {
            LossKind::Pinn => JetOrder::Laplacian,
            LossKind::DeepRitz => JetOrder::Gradient,
        }
    }

    fn point(&self, i: usize, jet: PointJet<'_>, seed: &mut JetSeed) -> f64 {
        let c = self.scale[i];
        match self.kind {
            LossKind::Pinn => {
                let r = -jet.laplacian - self.f[i];
                seed.laplacian = -2.0 * c * r;
                c * r * r
            }
            LossKind::DeepRitz => {
                let mut g2 = 0.0;
                for (s, g) in seed.grad.iter_mut().zip(jet.grad) {
                    *s = c * g;
                    g2 += g * g;
                }
                seed.value = -c * self.f[i];
                c * (0.5 * g2 - self.f[i] * jet.value)
            }
        }
    }
}

/// `scale · (u − g_j)²`.
struct BoundaryTerm<'a> {
    g: &'a [f64],
    scale: f64,
}

impl PointLoss for BoundaryTerm<'_> {
    fn order(&self) -> JetOrder {
        JetOrder::Value
    }

    fn point(&self, j: usize, jet: PointJet<'_>, seed: &mut JetSeed) -> f64 {
        let e = jet.value - self.g[j];
        seed.value = 2.0 * self.scale * e;
        self.scale * e * e
    }
}

/// A training loss bound to fixed point sets, with data values cached.
#[derive(Clone, Debug)]
pub struct TrainingLoss {
    kind: LossKind,
    interior: PointBatch,
    boundary: PointBatch,
    f: Vec<f64>,
    g: Vec<f64>,
    interior_scale: Vec<f64>,
    boundary_scale: f64,
}

impl TrainingLoss {
    /// `weighted` switches the Deep Ritz interior average to the
    /// self-normalized importance-weighted one; PINN ignores it.
    pub fn new(
        kind: LossKind,
        problem: &ProblemDefinition,
        interior: PointBatch,
        boundary: PointBatch,
        lambda: f64,
        weighted: bool,
    ) -> Result<Self> {
        if interior.is_empty() || boundary.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if !(lambda > 0.0) {
            return Err(Error::Config(format!("boundary penalty must be positive, got {lambda}")));
        }
        let d = problem.domain.dim();
        for b in [&interior, &boundary] {
            if b.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: b.dim(),
                });
            }
        }
        let (n, m) = (interior.len(), boundary.len());
        let (vol, area) = problem.domain.measures();
        let interior_scale = match (kind, weighted) {
            (LossKind::Pinn, _) => vec![1.0 / n as f64; n],
            (LossKind::DeepRitz, false) => vec![vol / n as f64; n],
            (LossKind::DeepRitz, true) => {
                let w = interior
                    .weights()
                    .ok_or_else(|| Error::Config("weighted quadrature requested but the points carry no weights".into()))?;
                let total: f64 = w.iter().sum();
                w.iter().map(|wi| vol * wi / total).collect()
            }
        };
        let boundary_scale = match kind {
            LossKind::Pinn => lambda / m as f64,
            LossKind::DeepRitz => lambda * area / (2.0 * m as f64),
        };
        let f = (0..n).map(|i| problem.source.value(interior.point(i))).collect();
        let g = (0..m).map(|j| problem.boundary.value(boundary.point(j))).collect();
        Ok(TrainingLoss {
            kind,
            interior,
            boundary,
            f,
            g,
            interior_scale,
            boundary_scale,
        })
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn interior(&self) -> &PointBatch {
        &self.interior
    }

    pub fn boundary(&self) -> &PointBatch {
        &self.boundary
    }

    fn terms(&self) -> (InteriorTerm<'_>, BoundaryTerm<'_>) {
        (
            InteriorTerm {
                kind: self.kind,
                f: &self.f,
                scale: &self.interior_scale,
            },
            BoundaryTerm {
                g: &self.g,
                scale: self.boundary_scale,
            },
        )
    }

    pub fn value(&self, net: &Network) -> Result<f64> {
        let (inner, outer) = self.terms();
        Ok(sum_terms(net, self.interior.points(), &inner)? + sum_terms(net, self.boundary.points(), &outer)?)
    }

    pub fn value_and_gradient(&self, net: &Network) -> Result<(f64, Vec<f64>)> {
        let (inner, outer) = self.terms();
        let (a, mut grad) = net.param_gradient(self.interior.points(), &inner)?;
        let (b, gb) = net.param_gradient(self.boundary.points(), &outer)?;
        for (x, y) in grad.iter_mut().zip(gb) {
            *x += y;
        }
        Ok((a + b, grad))
    }
}

fn sum_terms<L: PointLoss>(net: &Network, points: &[f64], loss: &L) -> Result<f64> {
    let jets = net.eval_jets(points, loss.order())?;
    let mut seed = JetSeed::new(net.input_dim());
    let mut total = 0.0;
    for i in 0..jets.len() {
        let v = loss.point(i, jets.point(i), &mut seed);
        if !v.is_finite() {
            return Err(Error::Numerical {
                context: "loss term".into(),
                epoch: None,
                point: Some(i),
            });
        }
        total += v;
    }
    Ok(total)
}

/// `(1/N) Σ |−Δu(x_i) − f(x_i)|² + (λ/M) Σ |u(y_j) − g(y_j)|²`.
pub fn pinn_loss(
    net: &Network,
    interior: &PointBatch,
    boundary: &PointBatch,
    lambda: f64,
    problem: &ProblemDefinition,
) -> Result<f64> {
    TrainingLoss::new(LossKind::Pinn, problem, interior.clone(), boundary.clone(), lambda, false)?.value(net)
}

/// `(|Ω|/N) Σ [½|∇u|² − f u] + λ (|∂Ω|/2M) Σ |u − g|²`, optionally with
/// importance-weighted interior average.
pub fn deep_ritz_loss(
    net: &Network,
    interior: &PointBatch,
    boundary: &PointBatch,
    lambda: f64,
    problem: &ProblemDefinition,
    use_importance_weights: bool,
) -> Result<f64> {
    TrainingLoss::new(
        LossKind::DeepRitz,
        problem,
        interior.clone(),
        boundary.clone(),
        lambda,
        use_importance_weights,
    )?
    .value(net)
}

/// Plain Monte Carlo `(|Ω|/N) Σ j(x_i) u(x_i)` over uniform points.
pub fn functional_mc<F: JetField + ?Sized>(
    u: &F,
    goal: &GoalFunctional,
    domain: &Domain,
    points: &PointBatch,
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n = points.len();
    let values = u.field_jets(points.points(), JetOrder::Value)?.value;
    let sum: f64 = (0..n).map(|i| goal.j(points.point(i)) * values[i]).sum();
    Ok(domain.volume() / n as f64 * sum)
}
