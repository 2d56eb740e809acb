use std::fs;
use std::path::Path;

use ldprice_core::{validate, Scenario, ScenarioFile};

use crate::pipeline::RunError;

/// Parses and validates a JSON scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, RunError> {
    let raw: ScenarioFile =
        serde_json::from_str(text).map_err(|e| RunError::Parse(e.to_string()))?;
    validate(&raw).map_err(RunError::Validation)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario(&text).map_err(|e| match e {
        RunError::Parse(msg) => RunError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}
