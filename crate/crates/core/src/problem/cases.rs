use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{GoalFunctional, LossKind, ProblemDefinition, ScalarFunction};
use crate::geometry::{gauss_legendre, unit_ball_volume, Domain, Quadrature, SubRegion};
use crate::nn::{ActivationKind, NetworkSpec};
use crate::{Error, Result};

pub const CASE_IDS: [u32; 5] = [1, 2, 3, 4, 5];

/// Refinement variant: start from `start_points` interior points and append
/// `count` indicator-sampled points every `interval` epochs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineSchedule {
    pub start_points: usize,
    pub interval: usize,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseConfig {
    pub case_id: u32,
    pub title: String,
    pub problem: ProblemDefinition,
    pub goal: GoalFunctional,
    pub j_reference: f64,
    /// How `j_reference` was obtained.
    pub j_reference_method: String,
    pub loss: LossKind,
    pub net: NetworkSpec,
    pub epochs: usize,
    pub resample_epochs: Vec<usize>,
    pub refine: Option<RefineSchedule>,
    pub n_interior: usize,
    pub m_boundary: usize,
    pub lambda: f64,
}

fn square_cos_problem() -> (ProblemDefinition, GoalFunctional) {
    (
        ProblemDefinition {
            domain: Domain::cube(2, -1.0, 1.0),
            source: ScalarFunction::HalfPiCosProduct { amp: PI * PI / 2.0 },
            boundary: ScalarFunction::Zero,
            exact_u: Some(ScalarFunction::HalfPiCosProduct { amp: 1.0 }),
        },
        GoalFunctional {
            density: ScalarFunction::Constant(1.0),
            region: SubRegion::WholeDomain,
            exact_adjoint: None,
        },
    )
}

fn disk() -> SubRegion {
    SubRegion::Ball {
        center: vec![PI / 2.0; 2],
        radius: 1.0,
    }
}

fn square_sin_problem() -> (ProblemDefinition, GoalFunctional) {
    (
        ProblemDefinition {
            domain: Domain::cube(2, 0.0, PI),
            source: ScalarFunction::SinProduct { amp: 2.0 },
            boundary: ScalarFunction::Zero,
            exact_u: Some(ScalarFunction::SinProduct { amp: 1.0 }),
        },
        GoalFunctional {
            density: ScalarFunction::Constant(1.0),
            region: disk(),
            exact_adjoint: None,
        },
    )
}

fn annulus_problem() -> (ProblemDefinition, GoalFunctional) {
    (
        ProblemDefinition {
            domain: Domain::Annulus {
                dim: 5,
                r_inner: 1.0,
                r_outer: 2.0,
            },
            source: ScalarFunction::TanhShellSource,
            boundary: ScalarFunction::Zero,
            exact_u: Some(ScalarFunction::TanhShell),
        },
        GoalFunctional {
            density: ScalarFunction::TanhShellSource,
            region: SubRegion::WholeDomain,
            // j = f, so the adjoint solution is u itself.
            exact_adjoint: Some(ScalarFunction::TanhShell),
        },
    )
}

/// `∫_C sin x sin y` over the unit disk at `(π/2, π/2)`, polar Gauss rule.
fn disk_reference() -> f64 {
    let u = ScalarFunction::SinProduct { amp: 1.0 };
    Quadrature::gauss_disk(&[PI / 2.0; 2], 1.0, 64, 128).integrate_fn(|x| u.value(x))
}

/// `∫ f u` over the 5-D annulus by composite Gauss in the radius.
fn annulus_reference() -> f64 {
    let (x, w) = gauss_legendre(16);
    let panels = 400;
    let h = 1.0 / panels as f64;
    let surface = 5.0 * unit_ball_volume(5);
    let mut total = 0.0;
    for p in 0..panels {
        let a = 1.0 + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            let r = a + 0.5 * h * (xi + 1.0);
            let pt = [r, 0.0, 0.0, 0.0, 0.0];
            let fu = ScalarFunction::TanhShellSource.value(&pt) * ScalarFunction::TanhShell.value(&pt);
            total += 0.5 * h * wi * surface * r.powi(4) * fu;
        }
    }
    total
}

/// Full configuration of one of the five benchmark cases.
pub fn case_definitions(case_id: u32) -> Result<CaseConfig> {
    let tanh = ActivationKind::Tanh;
    let cfg = match case_id {
        1 => {
            let (problem, goal) = square_cos_problem();
            CaseConfig {
                case_id,
                title: "Low-dimensional Poisson problem with smooth solution (PINN)".into(),
                problem,
                goal,
                j_reference: 16.0 / (PI * PI),
                j_reference_method: "closed form (4/π)²".into(),
                loss: LossKind::Pinn,
                net: NetworkSpec::resnet(2, 64, 2, tanh),
                epochs: 2000,
                resample_epochs: vec![200],
                refine: None,
                n_interior: 5000,
                m_boundary: 1000,
                lambda: 100.0,
            }
        }
        2 | 4 => {
            let (problem, goal) = square_sin_problem();
            let pinn = case_id == 2;
            CaseConfig {
                case_id,
                title: if pinn {
                    "Low-dimensional problem with non-smooth functional (PINN)".into()
                } else {
                    "Simple Poisson problem, disk functional (Deep Ritz)".into()
                },
                problem,
                goal,
                j_reference: disk_reference(),
                j_reference_method: "polar Gauss-Legendre × trapezoid rule on the disk (64 × 128)".into(),
                loss: if pinn { LossKind::Pinn } else { LossKind::DeepRitz },
                net: NetworkSpec::resnet(2, 32, 4, tanh),
                epochs: 5000,
                resample_epochs: vec![if pinn { 300 } else { 400 }],
                refine: pinn.then_some(RefineSchedule {
                    start_points: 200,
                    interval: 1000,
                    count: 500,
                }),
                n_interior: 5000,
                m_boundary: 1000,
                lambda: 100.0,
            }
        }
        3 => {
            let (problem, goal) = annulus_problem();
            CaseConfig {
                case_id,
                title: "High-dimensional problem on the 5-D annulus (PINN)".into(),
                problem,
                goal,
                j_reference: annulus_reference(),
                j_reference_method: "radial composite Gauss-Legendre with surface factor 5·ω₅·r⁴".into(),
                loss: LossKind::Pinn,
                net: NetworkSpec::mlp(5, vec![32; 6], tanh),
                epochs: 5000,
                resample_epochs: vec![400],
                refine: None,
                n_interior: 5000,
                m_boundary: 1000,
                lambda: 100.0,
            }
        }
        5 => {
            let (problem, goal) = square_cos_problem();
            CaseConfig {
                case_id,
                title: "Smooth problem and mean-value functional (Deep Ritz)".into(),
                problem,
                goal,
                j_reference: 16.0 / (PI * PI),
                j_reference_method: "closed form (4/π)²".into(),
                loss: LossKind::DeepRitz,
                net: NetworkSpec::resnet(2, 32, 2, tanh),
                epochs: 1500,
                resample_epochs: vec![400],
                refine: None,
                n_interior: 5000,
                m_boundary: 1000,
                lambda: 100.0,
            }
        }
        other => return Err(Error::UnknownCase(other)),
    };
    Ok(cfg)
}

/// All cases as pretty JSON, for documentation.
pub fn case_table_json() -> Result<String> {
    let all: Vec<CaseConfig> = CASE_IDS.iter().map(|&c| case_definitions(c)).collect::<Result<_>>()?;
    Ok(serde_json::to_string_pretty(&all)?)
}
