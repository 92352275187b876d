use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::geometry::SubRegion;
use crate::nn::{Jet2, JetBatch, JetField, JetOrder};
use crate::{Error, Result};

/// Closed-form scalar fields used as data, exact solutions and weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "args", rename_all = "snake_case")]
pub enum ScalarFunction {
    Zero,
    Constant(f64),
    /// `amp · Π cos(π x_k / 2)`.
    HalfPiCosProduct { amp: f64 },
    /// `amp · Π sin x_k`.
    SinProduct { amp: f64 },
    /// `1_C`; not differentiable.
    Indicator(SubRegion),
    /// Radial solution on the annulus `1 < r < 2`:
    /// `tanh γ / (800 tanh 10) − γ / 8000` with `γ = 20 (r − 3/2)`.
    TanhShell,
    /// `−Δ` of [`ScalarFunction::TanhShell`].
    TanhShellSource,
    /// `function · 1_region`; not differentiable.
    Restricted {
        function: Box<ScalarFunction>,
        region: SubRegion,
    },
}

fn shell_amp() -> f64 {
    1.0 / (800.0 * 10f64.tanh())
}

/// `(φ, φ′, φ″)` of the shell profile in the radius.
fn shell_profile(r: f64) -> (f64, f64, f64) {
    let a = shell_amp();
    let gamma = 20.0 * (r - 1.5);
    let t = gamma.tanh();
    let sech2 = 1.0 - t * t;
    (
        a * t - gamma / 8000.0,
        20.0 * a * sech2 - 20.0 / 8000.0,
        -800.0 * a * t * sech2,
    )
}

fn radius(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl ScalarFunction {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            ScalarFunction::Zero => 0.0,
            ScalarFunction::Constant(c) => *c,
            ScalarFunction::HalfPiCosProduct { amp } => amp * x.iter().map(|v| (FRAC_PI_2 * v).cos()).product::<f64>(),
            ScalarFunction::SinProduct { amp } => amp * x.iter().map(|v| v.sin()).product::<f64>(),
            ScalarFunction::Indicator(region) => region.indicator(x),
            ScalarFunction::TanhShell => shell_profile(radius(x)).0,
            ScalarFunction::TanhShellSource => {
                let r = radius(x);
                let (_, d1, d2) = shell_profile(r);
                -(d2 + (x.len() as f64 - 1.0) / r * d1)
            }
            ScalarFunction::Restricted { function, region } => region.indicator(x) * function.value(x),
        }
    }

    /// Value, gradient and Laplacian, for the smooth variants.
    pub fn jet(&self, x: &[f64]) -> Option<Jet2> {
        let d = x.len();
        match self {
            ScalarFunction::Zero => Some(Jet2::constant(0.0, d)),
            ScalarFunction::Constant(c) => Some(Jet2::constant(*c, d)),
            ScalarFunction::HalfPiCosProduct { amp } => {
                let c: Vec<f64> = x.iter().map(|v| (FRAC_PI_2 * v).cos()).collect();
                let s: Vec<f64> = x.iter().map(|v| (FRAC_PI_2 * v).sin()).collect();
                let value = amp * c.iter().product::<f64>();
                let grad = (0..d)
                    .map(|k| {
                        let others: f64 = (0..d).filter(|&j| j != k).map(|j| c[j]).product();
                        -amp * FRAC_PI_2 * s[k] * others
                    })
                    .collect();
                Some(Jet2 {
                    value,
                    grad,
                    laplacian: -(d as f64) * FRAC_PI_2 * FRAC_PI_2 * value,
                })
            }
            ScalarFunction::SinProduct { amp } => {
                let s: Vec<f64> = x.iter().map(|v| v.sin()).collect();
                let value = amp * s.iter().product::<f64>();
                let grad = (0..d)
                    .map(|k| amp * x[k].cos() * (0..d).filter(|&j| j != k).map(|j| s[j]).product::<f64>())
                    .collect();
                Some(Jet2 {
                    value,
                    grad,
                    laplacian: -(d as f64) * value,
                })
            }
            ScalarFunction::TanhShell => {
                let r = radius(x);
                let (v, d1, d2) = shell_profile(r);
                Some(Jet2 {
                    value: v,
                    grad: x.iter().map(|xi| d1 * xi / r).collect(),
                    laplacian: d2 + (d as f64 - 1.0) / r * d1,
                })
            }
            ScalarFunction::TanhShellSource | ScalarFunction::Indicator(_) | ScalarFunction::Restricted { .. } => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarFunction::Zero)
    }
}

/// A closed form viewed as a field on `R^dim`.
#[derive(Clone, Debug)]
pub struct ClosedForm<'a> {
    pub function: &'a ScalarFunction,
    pub dim: usize,
}

impl JetField for ClosedForm<'_> {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn field_jets(&self, points: &[f64], order: JetOrder) -> Result<JetBatch> {
        if points.len() % self.dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: points.len() % self.dim,
            });
        }
        let n = points.len() / self.dim;
        let mut out = JetBatch::zeros(n, self.dim, order);
        for (i, x) in points.chunks(self.dim).enumerate() {
            if order == JetOrder::Value {
                out.value[i] = self.function.value(x);
                continue;
            }
            let j = self
                .function
                .jet(x)
                .ok_or_else(|| Error::Config(format!("{:?} has no derivatives", self.function)))?;
            out.value[i] = j.value;
            out.grad[i * self.dim..(i + 1) * self.dim].copy_from_slice(&j.grad);
            if order == JetOrder::Laplacian {
                out.laplacian[i] = j.laplacian;
            }
        }
        Ok(out)
    }
}

impl ScalarFunction {
    pub fn field(&self, dim: usize) -> ClosedForm<'_> {
        ClosedForm { function: self, dim }
    }
}
