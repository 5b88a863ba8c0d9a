//! Defaults from a `key = value` file; command-line flags take precedence.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub samples: Option<usize>,
    pub cd: Option<f64>,
    pub alpha: Option<f64>,
    pub tail: Option<String>,
    pub t_max_factor: Option<f64>,
    pub d: Option<usize>,
    pub eps: Option<f64>,
    pub t_max: Option<f64>,
    pub paths: Option<usize>,
    pub dt: Option<f64>,
}

impl Config {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}
