//! Optional run manifest: a JSON file bundling the artifact paths and policy
//! parameters of one pipeline run, so repeated invocations don't have to
//! repeat flags. Explicit flags always win over manifest entries.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunManifest {
    pub profiles: Option<PathBuf>,
    pub training: Option<PathBuf>,
    pub coefficients: Option<PathBuf>,
    pub states: Option<PathBuf>,
    pub oracle_config: Option<PathBuf>,
    pub problem: Option<String>,
    pub alpha: Option<f64>,
    pub power_w: Option<u32>,
    pub apps: Option<Vec<String>>,
}

impl RunManifest {
    /// Loads the manifest, or an empty one when no path was given.
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading manifest {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing manifest {}", path.display()))
            }
        }
    }
}

/// Flag value if present, manifest value otherwise.
pub fn pick<T: Clone>(flag: Option<T>, manifest: &Option<T>) -> Option<T> {
    flag.or_else(|| manifest.clone())
}
