//! TOML run configuration.
//!
//! Every command-line flag has a counterpart key here. When a config file
//! is given with `--config`, its values take precedence over flags, so a
//! checked-in file fully pins a run regardless of how the tool was
//! invoked.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config file {}: {reason}", path.display())]
    Parse { path: PathBuf, reason: String },
    #[error("io failure on {}: {source}", path.display())]
    IoFailure {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Optional overrides loaded from a `--config` TOML file.
///
/// Only the keys a subcommand actually uses take effect; the rest are
/// ignored by that subcommand.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub pred_root: Option<PathBuf>,
    pub gt_root: Option<PathBuf>,
    pub pseudo_root: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub db: Option<PathBuf>,
    pub profiles: Option<PathBuf>,
    pub models: Option<Vec<String>>,
    pub method: Option<String>,
    pub granularity: Option<String>,
    pub report_format: Option<String>,
    pub j_weight: Option<f64>,
    pub f_weight: Option<f64>,
    pub score_first_frame: Option<bool>,
    pub timings: Option<bool>,
    pub seed: Option<u64>,
    pub videos: Option<usize>,
    pub frames: Option<usize>,
    pub width: Option<u32>,
    pub height: Option<u32>,
    pub objects_min: Option<usize>,
    pub objects_max: Option<usize>,
    pub occlusion_rate: Option<f64>,
    pub disappear_rate: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::IoFailure {
            path: path.to_path_buf(),
            source: e,
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }
}

/// Config-file values override command-line flags.
pub fn override_flag<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    file.or(flag)
}
