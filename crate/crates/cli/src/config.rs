//! JSON configuration loading. A run manifest is accepted wherever a
//! configuration is, so any run can be replayed from its manifest.

use std::path::Path;

use reliability_core::experiment::{ExperimentConfig, TransformSelection};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub fn load(path: Option<&Path>) -> CliResult<ExperimentConfig> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn parse(text: &str) -> Result<ExperimentConfig, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let is_manifest = matches!(&value, Value::Object(map) if map.contains_key("tool_version") && map.contains_key("config"));
    if is_manifest {
        serde_json::from_value(value["config"].clone()).map_err(|e| format!("manifest config: {e}"))
    } else {
        // parse from text so errors carry line and column
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}

/// Applies command-line overrides and validates the result.
pub fn resolve(
    mut config: ExperimentConfig,
    seed: Option<u64>,
    transform: Option<TransformSelection>,
) -> CliResult<ExperimentConfig> {
    if let Some(seed) = seed {
        config.master_seed = seed;
    }
    if let Some(t) = transform {
        config.latent_transform = t;
    }
    config
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}
