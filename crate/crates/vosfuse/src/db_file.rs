//! JSON persistence for the model-performance database.
//!
//! On disk the database is a single JSON document:
//!
//! ```json
//! {
//!   "version": 7,
//!   "entries": [
//!     {"bucket": {"count": "one", "size": "small", "complexity": "low"},
//!      "model": "alpha", "score_sum": 2.4, "sample_count": 3}
//!   ],
//!   "complexity_samples": [0.01, 0.03]
//! }
//! ```
//!
//! `complexity_samples` carries the running-median state that decides the
//! low/high complexity split; older files without it load with an empty
//! history.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vosfuse_core::features::{ComplexityBin, CountBin, FeatureBucket, SizeBin};
use vosfuse_core::selection::{PerformanceDB, ScoreStat, SelectionError};

#[derive(Debug, thiserror::Error)]
pub enum DbFileError {
    #[error("db file {}: {reason}", path.display())]
    Parse { path: PathBuf, reason: String },
    #[error(transparent)]
    Invalid(#[from] SelectionError),
    #[error("io failure on {}: {source}", path.display())]
    IoFailure {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_err(path: &Path, source: io::Error) -> DbFileError {
    DbFileError::IoFailure {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct BucketJson {
    count: String,
    size: String,
    complexity: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct EntryJson {
    bucket: BucketJson,
    model: String,
    score_sum: f64,
    sample_count: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct DbJson {
    version: u64,
    entries: Vec<EntryJson>,
    #[serde(default)]
    complexity_samples: Vec<f64>,
}

fn parse_bucket(bucket: &BucketJson, path: &Path) -> Result<FeatureBucket, DbFileError> {
    let parse_err = |field: &str, value: &str| DbFileError::Parse {
        path: path.to_path_buf(),
        reason: format!("unknown {field} bin {value:?}"),
    };
    Ok(FeatureBucket {
        count: CountBin::parse(&bucket.count).ok_or_else(|| parse_err("count", &bucket.count))?,
        size: SizeBin::parse(&bucket.size).ok_or_else(|| parse_err("size", &bucket.size))?,
        complexity: ComplexityBin::parse(&bucket.complexity)
            .ok_or_else(|| parse_err("complexity", &bucket.complexity))?,
    })
}

/// Parse a database from its JSON text.
pub fn parse_db(text: &str, path: &Path) -> Result<PerformanceDB, DbFileError> {
    let raw: DbJson = serde_json::from_str(text).map_err(|e| DbFileError::Parse {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let mut entries: BTreeMap<FeatureBucket, BTreeMap<String, ScoreStat>> = BTreeMap::new();
    for entry in &raw.entries {
        let bucket = parse_bucket(&entry.bucket, path)?;
        let models = entries.entry(bucket).or_default();
        if models
            .insert(
                entry.model.clone(),
                ScoreStat {
                    score_sum: entry.score_sum,
                    sample_count: entry.sample_count,
                },
            )
            .is_some()
        {
            return Err(DbFileError::Parse {
                path: path.to_path_buf(),
                reason: format!("duplicate entry for model {} in one bucket", entry.model),
            });
        }
    }
    Ok(PerformanceDB::from_parts(
        raw.version,
        entries,
        raw.complexity_samples,
    )?)
}

/// Render a database as pretty JSON with a trailing newline.
///
/// Entries are emitted in bucket order, then model order, so equal
/// databases serialize to identical bytes.
pub fn render_db(db: &PerformanceDB) -> String {
    let entries: Vec<EntryJson> = db
        .entries()
        .iter()
        .flat_map(|(bucket, models)| {
            models.iter().map(move |(model, stat)| EntryJson {
                bucket: BucketJson {
                    count: String::from(bucket.count.as_str()),
                    size: String::from(bucket.size.as_str()),
                    complexity: String::from(bucket.complexity.as_str()),
                },
                model: model.clone(),
                score_sum: stat.score_sum,
                sample_count: stat.sample_count,
            })
        })
        .collect();
    let doc = DbJson {
        version: db.version(),
        entries,
        complexity_samples: db.complexity_samples().to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("db document always serializes");
    text.push('\n');
    text
}

/// Read a database file.
pub fn read_db(path: &Path) -> Result<PerformanceDB, DbFileError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_db(&text, path)
}

/// Write a database file atomically (temp sibling, then rename).
pub fn write_db(path: &Path, db: &PerformanceDB) -> Result<(), DbFileError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| String::from("db"));
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, render_db(db)).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(path, e)
    })
}
