use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub config: AdamConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl OptimizerState {
    pub fn new(len: usize, config: AdamConfig) -> Self {
        OptimizerState {
            config,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }
}

/// One bias-corrected Adam update. Frozen entries are never written.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut OptimizerState, freeze_mask: &[bool]) -> Result<()> {
    let n = params.len();
    for len in [grads.len(), state.m.len(), state.v.len(), freeze_mask.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::Numerical {
            context: format!("gradient entry {i}"),
            epoch: None,
            point: None,
        });
    }
    let c = state.config;
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - c.beta1.powi(t);
    let bc2 = 1.0 - c.beta2.powi(t);
    for i in 0..n {
        if freeze_mask[i] {
            continue;
        }
        let g = grads[i];
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
        state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = vec![1.0, -2.0];
        let mut s = OptimizerState::new(2, AdamConfig::default());
        adam_step(&mut p, &[0.0, 0.0], &mut s, &[false, false]).unwrap();
        assert_eq!(p, vec![1.0, -2.0]);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn first_step_has_size_lr() {
        let mut p = vec![0.5];
        let mut s = OptimizerState::new(1, AdamConfig::default());
        adam_step(&mut p, &[1.0], &mut s, &[false]).unwrap();
        // m̂ = v̂ = 1, so the step is lr / (1 + ε).
        assert!((0.5 - p[0] - 1e-3 / (1.0 + 1e-8)).abs() < 1e-18);
    }

    #[test]
    fn frozen_entry_is_untouched() {
        let mut p = vec![0.123456789, 1.0];
        let mut s = OptimizerState::new(2, AdamConfig::default());
        for _ in 0..10 {
            adam_step(&mut p, &[5.0, 5.0], &mut s, &[true, false]).unwrap();
        }
        assert_eq!(p[0].to_bits(), 0.123456789f64.to_bits());
        assert!(p[1] < 1.0);
        assert_eq!(s.m[0], 0.0);
    }

    #[test]
    fn rejects_non_finite_gradients() {
        let mut p = vec![0.0];
        let mut s = OptimizerState::new(1, AdamConfig::default());
        assert!(adam_step(&mut p, &[f64::NAN], &mut s, &[false]).unwrap_err().is_numerical());
    }
}
