//! Poisson problems, goal functionals, training losses and the case table.

mod cases;
mod functions;
mod loss;

pub use cases::{case_definitions, case_table_json, CaseConfig, RefineSchedule, CASE_IDS};
pub use functions::ScalarFunction;
pub use loss::{deep_ritz_loss, functional_mc, pinn_loss, LossKind, TrainingLoss};

use serde::{Deserialize, Serialize};

use crate::geometry::{Domain, SubRegion};

/// `-Δu = f` in the domain, `u = g` on its boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemDefinition {
    pub domain: Domain,
    pub source: ScalarFunction,
    pub boundary: ScalarFunction,
    pub exact_u: Option<ScalarFunction>,
}

/// `J(φ) = ∫ j φ` with `j = density · 1_region`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalFunctional {
    pub density: ScalarFunction,
    pub region: SubRegion,
    /// Closed-form adjoint solution, when known.
    pub exact_adjoint: Option<ScalarFunction>,
}

impl GoalFunctional {
    /// `j` as a single function.
    pub fn weight(&self) -> ScalarFunction {
        match (&self.region, &self.density) {
            (SubRegion::WholeDomain, d) => d.clone(),
            (r, ScalarFunction::Constant(c)) if *c == 1.0 => ScalarFunction::Indicator(r.clone()),
            (r, d) => ScalarFunction::Restricted {
                function: Box::new(d.clone()),
                region: r.clone(),
            },
        }
    }

    pub fn j(&self, x: &[f64]) -> f64 {
        self.region.indicator(x) * self.density.value(x)
    }
}

/// `-Δz = j` with homogeneous boundary data.
pub fn adjoint_problem(problem: &ProblemDefinition, goal: &GoalFunctional) -> ProblemDefinition {
    ProblemDefinition {
        domain: problem.domain.clone(),
        source: goal.weight(),
        boundary: ScalarFunction::Zero,
        exact_u: goal.exact_adjoint.clone(),
    }
}
