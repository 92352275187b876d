//! Optimizer, epoch loop and the adaptive sampling drivers.

mod adam;
mod config;
mod driver;
mod rules;
mod trace;

pub use adam::{adam_step, AdamConfig, OptimizerState};
pub use config::{QuadratureConfig, Sampling, TrainConfig};
pub use driver::{
    algorithm1_run, baseline_run, refine_run, run, run_into, train_epochs, RunNets, RunOptions, RunOutput,
};
pub use rules::{estimator_rules, functional_rule, GoalEvaluator};
pub use trace::{Event, Trace, TraceRow, TRACE_HEADER};
