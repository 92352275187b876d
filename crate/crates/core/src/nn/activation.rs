use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Smooth activation functions.
///
/// Both are `C^∞`, which the jet propagation relies on: the Laplacian channel
/// needs `σ″`, and its parameter gradient needs `σ‴`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Tanh,
    /// Exact GeLU, `s·Φ(s)` with the Gaussian CDF written through `erfc`.
    Gelu,
    /// Tanh whose reported `σ″` has the wrong sign. Only exists so the
    /// gradient checker can prove it detects a broken derivative.
    #[doc(hidden)]
    #[serde(skip)]
    TanhFaultyCurvature,
}

/// `(σ, σ′, σ″, σ‴)` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivatives {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl ActivationKind {
    /// Value and first two derivatives.
    pub fn eval(self, s: f64) -> (f64, f64, f64) {
        let d = self.derivatives(s);
        (d.value, d.d1, d.d2)
    }

    #[inline]
    pub fn derivatives(self, s: f64) -> Derivatives {
        match self {
            ActivationKind::Tanh => tanh_derivatives(s),
            ActivationKind::TanhFaultyCurvature => {
                let mut d = tanh_derivatives(s);
                d.d2 = -d.d2;
                d
            }
            ActivationKind::Gelu => {
                let cdf = 0.5 * libm::erfc(-s * FRAC_1_SQRT_2);
                let pdf = (-0.5 * s * s).exp() / (2.0 * PI).sqrt();
                Derivatives {
                    value: s * cdf,
                    d1: cdf + s * pdf,
                    d2: pdf * (2.0 - s * s),
                    d3: pdf * (s * s * s - 4.0 * s),
                }
            }
        }
    }
}

#[inline]
fn tanh_derivatives(s: f64) -> Derivatives {
    let t = s.tanh();
    let d1 = 1.0 - t * t;
    let d2 = -2.0 * t * d1;
    let d3 = -2.0 * (d1 * d1 + t * d2);
    Derivatives {
        value: t,
        d1,
        d2,
        d3,
    }
}
