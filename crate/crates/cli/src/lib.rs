//! Configuration, dispatch and output for the `slve` command-line tool.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::path::Path;

pub use config::{load_config, parse_config, Command, Overrides, RunConfig};
pub use error::{CliError, Result};
pub use run::{run, RunSummary, Status};

/// Writes `status.json` into `dir`, creating it if needed.
pub fn write_status(dir: &Path, record: &serde_json::Value) -> Result<()> {
    let path = dir.join("status.json");
    let io = |source| CliError::Io {
        path: path.clone(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let text = serde_json::to_string_pretty(record)? + "\n";
    std::fs::write(&path, text).map_err(io)
}
