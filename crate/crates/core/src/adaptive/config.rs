use serde::{Deserialize, Serialize};

use super::AdamConfig;
use crate::nn::NetworkSpec;
use crate::problem::{CaseConfig, LossKind};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    Uniform,
    DwrResample,
    DwrRefine,
}

/// Sizes of the rules used for goal and estimator evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss nodes per axis on boxes and disks (dimension ≤ 3).
    pub gauss_nodes: usize,
    /// Monte Carlo points for the goal functional elsewhere.
    pub functional_points: usize,
    pub estimator_interior: usize,
    pub estimator_boundary: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            gauss_nodes: 48,
            functional_points: 100_000,
            estimator_interior: 20_000,
            estimator_boundary: 4_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub mode: LossKind,
    pub sampling: Sampling,
    pub epochs: usize,
    pub resample_epochs: Vec<usize>,
    pub refine_interval: Option<usize>,
    pub refine_count: Option<usize>,
    pub lambda: f64,
    pub n_interior: usize,
    pub m_boundary: usize,
    pub pool_factor: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    /// Network spec; `None` means the case default.
    pub net: Option<NetworkSpec>,
    pub adjoint_pretrain_epochs: usize,
    pub z_prime_train_epochs: usize,
    /// Loss for the adjoint nets; `None` means the primal `mode`.
    pub adjoint_mode: Option<LossKind>,
    pub adjoint_n_interior: usize,
    pub adjoint_m_boundary: usize,
    pub weighted_quadrature: bool,
    /// Estimators are logged every `estimator_stride` epochs and at events.
    pub estimator_stride: usize,
    /// Train an adjoint and log the simple estimator in uniform runs too.
    pub baseline_estimators: bool,
    pub quadrature: QuadratureConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mode: LossKind::Pinn,
            sampling: Sampling::DwrResample,
            epochs: 2000,
            resample_epochs: vec![200],
            refine_interval: None,
            refine_count: None,
            lambda: 100.0,
            n_interior: 5000,
            m_boundary: 1000,
            pool_factor: 20,
            adam: AdamConfig::default(),
            seed: 0,
            net: None,
            adjoint_pretrain_epochs: 2000,
            z_prime_train_epochs: 500,
            adjoint_mode: None,
            adjoint_n_interior: 5000,
            adjoint_m_boundary: 1000,
            weighted_quadrature: false,
            estimator_stride: 10,
            baseline_estimators: false,
            quadrature: QuadratureConfig::default(),
        }
    }
}

impl TrainConfig {
    /// Case defaults for the given sampling strategy.
    pub fn for_case(case: &CaseConfig, sampling: Sampling, seed: u64) -> Self {
        let mut cfg = TrainConfig {
            mode: case.loss,
            sampling,
            epochs: case.epochs,
            resample_epochs: case.resample_epochs.clone(),
            lambda: case.lambda,
            n_interior: case.n_interior,
            m_boundary: case.m_boundary,
            adjoint_n_interior: case.n_interior,
            adjoint_m_boundary: case.m_boundary,
            seed,
            ..TrainConfig::default()
        };
        match sampling {
            Sampling::Uniform => cfg.resample_epochs.clear(),
            Sampling::DwrResample => {}
            Sampling::DwrRefine => {
                cfg.resample_epochs.clear();
                let schedule = case.refine.clone().unwrap_or(crate::problem::RefineSchedule {
                    start_points: case.n_interior / 10,
                    interval: case.epochs / 5,
                    count: case.n_interior / 10,
                });
                cfg.n_interior = schedule.start_points;
                cfg.refine_interval = Some(schedule.interval);
                cfg.refine_count = Some(schedule.count);
            }
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_interior == 0 || self.m_boundary == 0 || self.adjoint_n_interior == 0 || self.adjoint_m_boundary == 0 {
            return bad("point counts must be positive".into());
        }
        if !(self.lambda > 0.0) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.adam.lr > 0.0) {
            return bad(format!("learning rate must be positive, got {}", self.adam.lr));
        }
        if self.pool_factor == 0 {
            return bad("pool factor must be at least 1".into());
        }
        if self.estimator_stride == 0 {
            return bad("estimator stride must be at least 1".into());
        }
        if self.resample_epochs.windows(2).any(|w| w[0] >= w[1]) {
            return bad("resample epochs must be strictly increasing".into());
        }
        if self.resample_epochs.iter().any(|&e| e >= self.epochs) {
            return bad(format!("resample epochs must be below the budget of {}", self.epochs));
        }
        let refine_set = self.refine_interval.is_some() || self.refine_count.is_some();
        match self.sampling {
            Sampling::Uniform if !self.resample_epochs.is_empty() => {
                return bad("uniform sampling takes no resample epochs".into());
            }
            Sampling::DwrResample if self.resample_epochs.is_empty() => {
                return bad("dwr-resample needs at least one resample epoch".into());
            }
            Sampling::DwrRefine => {
                if self.refine_interval.is_none() || self.refine_count.is_none() {
                    return bad("dwr-refine needs refine interval and count".into());
                }
                if self.refine_interval == Some(0) {
                    return bad("refine interval must be positive".into());
                }
                if !self.resample_epochs.is_empty() {
                    return bad("dwr-refine takes no resample epochs".into());
                }
            }
            _ if refine_set => return bad("refine fields are only valid with dwr-refine".into()),
            _ => {}
        }
        if let Some(spec) = &self.net {
            spec.validate()?;
        }
        Ok(())
    }

    /// Epochs at which sampling events happen.
    pub fn event_epochs(&self) -> Vec<usize> {
        match self.sampling {
            Sampling::Uniform => Vec::new(),
            Sampling::DwrResample => self.resample_epochs.clone(),
            Sampling::DwrRefine => {
                let step = self.refine_interval.unwrap_or(usize::MAX);
                (1..).map(|k| k * step).take_while(|&e| e < self.epochs).collect()
            }
        }
    }

    pub fn adjoint_loss(&self) -> LossKind {
        self.adjoint_mode.unwrap_or(self.mode)
    }

    pub fn needs_adjoint(&self) -> bool {
        self.sampling != Sampling::Uniform || self.baseline_estimators
    }
}
