//! Run manifests: the full resolved configuration of a command, written
//! atomically next to its outputs so the run can be replayed.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

use super::run::{
    run_evaluate, run_predict, run_sample, run_simulate, EvaluateConfig, PredictConfig,
    SampleConfig, SimulateConfig,
};

/// The record of one command invocation. `config` holds the fully resolved
/// configuration (flags, defaults and environment overrides applied), which
/// is what `--from-manifest` replays; outputs then reproduce byte-for-byte.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub engine_version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_secs: f64,
    pub created_unix: u64,
}

impl RunManifest {
    pub fn new(
        command: &str,
        seed: u64,
        config: serde_json::Value,
        inputs: Vec<PathBuf>,
        outputs: Vec<PathBuf>,
        wall_clock_secs: f64,
    ) -> Self {
        RunManifest {
            command: command.to_owned(),
            engine_version: env!("CARGO_PKG_VERSION").to_owned(),
            seed,
            config,
            inputs,
            outputs,
            wall_clock_secs,
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    /// Writes atomically: a temporary file in the target directory is
    /// renamed into place.
    pub fn write(&self, path: &Path) -> Result<()> {
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        let tmp = dir.join(format!(
            ".{}.tmp-{}",
            path.file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "manifest.json".into()),
            std::process::id()
        ));
        let mut body = serde_json::to_string_pretty(self)?;
        body.push('\n');
        fs::write(&tmp, body)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<RunManifest> {
        let body = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&body)?)
    }

    /// Replays the recorded command with its recorded configuration.
    pub fn rerun(&self) -> Result<()> {
        match self.command.as_str() {
            "simulate" => {
                let cfg: SimulateConfig = serde_json::from_value(self.config.clone())?;
                run_simulate(&cfg)
            }
            "sample" => {
                let cfg: SampleConfig = serde_json::from_value(self.config.clone())?;
                run_sample(&cfg)
            }
            "evaluate" => {
                let cfg: EvaluateConfig = serde_json::from_value(self.config.clone())?;
                run_evaluate(&cfg)
            }
            "predict" => {
                let cfg: PredictConfig = serde_json::from_value(self.config.clone())?;
                run_predict(&cfg)
            }
            other => Err(Error::InvalidConfig(format!(
                "manifest names unknown command '{other}'"
            ))),
        }
    }
}
