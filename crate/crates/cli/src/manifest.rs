use std::path::Path;

use goalpinn_core::adaptive::TrainConfig;
use goalpinn_core::problem::CaseConfig;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Complete,
    NumericalAbort,
}

/// Everything needed to repeat a run bitwise with the same binary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub case_id: u32,
    pub case: CaseConfig,
    pub config: TrainConfig,
    pub seed: u64,
    pub out_dir: String,
    pub status: RunStatus,
    /// Rows in the trace written next to this manifest.
    pub trace_rows: usize,
    pub adjoint_epochs: usize,
    pub z_prime_epochs: usize,
}

impl RunManifest {
    pub fn new(case: &CaseConfig, config: &TrainConfig, out_dir: &Path) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            case_id: case.case_id,
            case: case.clone(),
            config: config.clone(),
            seed: config.seed,
            out_dir: out_dir.display().to_string(),
            status: RunStatus::Complete,
            trace_rows: 0,
            adjoint_epochs: 0,
            z_prime_epochs: 0,
        }
    }

    pub fn save(&self, dir: &Path) -> CliResult<()> {
        std::fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{} is not a run manifest: {e}", path.display())))
    }
}
