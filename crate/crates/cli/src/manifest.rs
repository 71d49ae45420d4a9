use std::path::{Path, PathBuf};

use reliability_core::experiment::ExperimentConfig;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub master_seed: u64,
    pub config: ExperimentConfig,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

impl RunManifest {
    pub fn start(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            master_seed: config.master_seed,
            config: config.clone(),
            started: now(),
            finished: String::new(),
            outputs: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn finish(mut self, dir: &Path) -> CliResult<PathBuf> {
        self.finished = now();
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
