//! Turns case defaults, an optional JSON config and command-line flags into
//! one validated `TrainConfig`.

use std::path::Path;

use goalpinn_core::adaptive::{Sampling, TrainConfig};
use goalpinn_core::problem::{case_definitions, CaseConfig};
use serde_json::{Map, Value};

use crate::args::TrainFlags;
use crate::{CliError, CliResult};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read_config(path: &Path) -> CliResult<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(usage(format!("config {} must be a JSON object", path.display()))),
        Err(e) => Err(usage(format!("config {} is not valid JSON: {e}", path.display()))),
    }
}

/// Recursively overlays `patch` onto `base`; keys unknown to `base` are
/// rejected so typos do not pass silently.
fn overlay(base: &mut Value, patch: &Map<String, Value>, prefix: &str) -> CliResult<()> {
    let Value::Object(target) = base else {
        return Err(usage(format!("config key '{prefix}' is not a table")));
    };
    for (key, value) in patch {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        let Some(slot) = target.get_mut(key) else {
            return Err(usage(format!("unknown config key '{path}'")));
        };
        match (slot.is_object(), value) {
            (true, Value::Object(inner)) => overlay(slot, inner, &path)?,
            _ => *slot = value.clone(),
        }
    }
    Ok(())
}

fn sampling_of(map: &Map<String, Value>) -> CliResult<Option<Sampling>> {
    match map.get("sampling") {
        None => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| usage(format!("config key 'sampling': {e}"))),
    }
}

/// Resolves the configuration for one run. `default_sampling` applies when
/// neither the config file nor the flags choose one.
pub fn resolve(flags: &TrainFlags, default_sampling: Sampling) -> CliResult<(CaseConfig, TrainConfig)> {
    let case = case_definitions(flags.case)?;
    let file = match &flags.config {
        Some(path) => read_config(path)?,
        None => Map::new(),
    };
    let sampling = match flags.sampling {
        Some(s) => s,
        None => sampling_of(&file)?.unwrap_or(default_sampling),
    };
    let base = TrainConfig::for_case(&case, sampling, 0);
    let mut value = serde_json::to_value(&base)?;
    overlay(&mut value, &file, "")?;
    let mut cfg: TrainConfig = serde_json::from_value(value).map_err(|e| usage(format!("config: {e}")))?;
    cfg.sampling = sampling;

    if let Some(mode) = flags.mode {
        cfg.mode = mode;
    }
    if let Some(epochs) = flags.epochs {
        cfg.epochs = epochs;
    }
    if !flags.resample_epochs.is_empty() {
        cfg.resample_epochs = flags.resample_epochs.clone();
    }
    if flags.refine_interval.is_some() {
        cfg.refine_interval = flags.refine_interval;
    }
    if flags.refine_count.is_some() {
        cfg.refine_count = flags.refine_count;
    }
    if let Some(lambda) = flags.lambda {
        cfg.lambda = lambda;
    }
    if let Some(n) = flags.n_interior {
        cfg.n_interior = n;
    }
    if let Some(m) = flags.m_boundary {
        cfg.m_boundary = m;
    }
    if let Some(p) = flags.pool_factor {
        cfg.pool_factor = p;
    }
    if let Some(lr) = flags.lr {
        cfg.adam.lr = lr;
    }
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    if flags.weighted_quadrature {
        cfg.weighted_quadrature = true;
    }
    if let Some(e) = flags.adjoint_epochs {
        cfg.adjoint_pretrain_epochs = e;
    }
    if let Some(e) = flags.z_prime_epochs {
        cfg.z_prime_train_epochs = e;
    }
    if let Some(s) = flags.estimator_stride {
        cfg.estimator_stride = s;
    }
    if flags.baseline_estimators {
        cfg.baseline_estimators = true;
    }
    if let Some(n) = flags.functional_points {
        cfg.quadrature.functional_points = n;
    }
    if let Some(n) = flags.gauss_nodes {
        cfg.quadrature.gauss_nodes = n;
    }
    // A shorter budget drops resample epochs that no longer fit, unless
    // the user asked for them explicitly.
    if flags.resample_epochs.is_empty() && !file.contains_key("resample_epochs") {
        cfg.resample_epochs.retain(|&e| e < cfg.epochs);
        if cfg.sampling == Sampling::DwrResample && cfg.resample_epochs.is_empty() {
            return Err(usage(format!(
                "no resample epoch of case {} fits in {} epochs; pass --resample-epoch",
                flags.case, cfg.epochs
            )));
        }
    }
    if !(cfg.lambda.is_finite() && cfg.adam.lr.is_finite()) {
        return Err(usage("lambda and lr must be finite"));
    }
    cfg.validate()?;
    Ok((case, cfg))
}

/// The uniform run matched to an adaptive configuration: same budget and
/// seed, and for refinement the final point count of the adaptive run.
pub fn baseline_for(adaptive: &TrainConfig) -> TrainConfig {
    let mut base = adaptive.clone();
    base.sampling = Sampling::Uniform;
    base.resample_epochs.clear();
    if adaptive.sampling == Sampling::DwrRefine {
        let added = adaptive.event_epochs().len() * adaptive.refine_count.unwrap_or(0);
        base.n_interior = adaptive.n_interior + added;
        base.refine_interval = None;
        base.refine_count = None;
    }
    base
}
