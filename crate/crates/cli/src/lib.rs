//! Scenario runner and exporter for the `gendarboux` engine.

pub mod config;
pub mod error;
pub mod expr;
pub mod output;
pub mod presets;
pub mod scenario;

use std::path::Path;

pub use config::ScenarioConfig;
pub use error::CliError;
pub use scenario::{run_scenario, verify_report, Report, ScenarioResult};

/// A config file path, or the name of a preset.
pub fn load_config(arg: &str) -> Result<ScenarioConfig, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return ScenarioConfig::from_toml(&text);
    }
    presets::preset(arg).ok_or_else(|| {
        CliError::Config(format!("`{arg}` is neither a readable config file nor a preset name"))
    })
}
