use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Provenance record written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub shape_files: Vec<String>,
    pub seed: u64,
    pub c_d: Option<f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub samples: Option<usize>,
    pub workers: Option<usize>,
    pub outputs: Vec<String>,
    pub timestamp: String,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            shape_files: Vec::new(),
            seed,
            c_d: None,
            tolerances: BTreeMap::new(),
            samples: None,
            workers: None,
            outputs: Vec::new(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            version: isocap::VERSION.to_string(),
        }
    }

    pub fn tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        write_json(&dir.join("manifest.json"), self)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(format!("json output: {e}")))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}
