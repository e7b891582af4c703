//! Directory-tree loading and saving for mask datasets.
//!
//! Layout contract:
//!
//! ```text
//! <root>/gt/Annotations/<video>/<NNNNN>.png   ground truth
//! <root>/predictions/<model>/<video>/<NNNNN>.png
//! <root>/confidences/<model>/<video>.json     optional per-frame floats
//! ```
//!
//! Pseudo-label trees use the ground-truth shape without the
//! `Annotations/` level: `<dir>/<video>/<NNNNN>.png`, with a reserved
//! `consistency/` directory holding per-video agreement summaries.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use vosfuse_core::mask::{MaskError, PredictionSetError, VideoSequence};
use vosfuse_core::PredictionSet;

use crate::png_io::{load_mask_frame, save_mask_frame, PngIoError};

/// Directory names that are never treated as videos when scanning a
/// pseudo-label tree.
const RESERVED_DIRS: [&str; 1] = ["consistency"];

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Png(#[from] PngIoError),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    PredictionSet(#[from] PredictionSetError),
    #[error("inconsistent coverage: model {model} is missing video {video}")]
    MissingVideo { model: String, video: String },
    #[error("inconsistent coverage: model {model} is missing frame {frame} of video {video}")]
    MissingFrame {
        model: String,
        video: String,
        frame: String,
    },
    #[error("video {video}: frame names {a} and {b} have different widths")]
    MixedNameWidths { video: String, a: String, b: String },
    #[error("confidence file {}: {reason}", path.display())]
    BadConfidenceFile { path: PathBuf, reason: String },
    #[error("no video directories under {}", root.display())]
    EmptyDataset { root: PathBuf },
    #[error("model directory not found: {}", path.display())]
    MissingModelDir { model: String, path: PathBuf },
    #[error("output already exists: {}", path.display())]
    OutputExists { path: PathBuf },
    #[error("io failure on {}: {source}", path.display())]
    IoFailure {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_err(path: &Path, source: io::Error) -> DatasetError {
    DatasetError::IoFailure {
        path: path.to_path_buf(),
        source,
    }
}

/// Subdirectory names of `dir`, ascending.
fn subdirectories(dir: &Path) -> Result<Vec<String>, DatasetError> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let entry = entry.map_err(|e| io_err(dir, e))?;
        let kind = entry.file_type().map_err(|e| io_err(&entry.path(), e))?;
        if kind.is_dir() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

/// Stems of the `.png` files in `dir`, ascending, uniform width enforced.
fn frame_stems(dir: &Path, video: &str) -> Result<Vec<String>, DatasetError> {
    let mut stems = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let entry = entry.map_err(|e| io_err(dir, e))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some("png") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                stems.push(String::from(stem));
            }
        }
    }
    stems.sort();
    for pair in stems.windows(2) {
        if pair[0].len() != pair[1].len() {
            return Err(DatasetError::MixedNameWidths {
                video: String::from(video),
                a: pair[0].clone(),
                b: pair[1].clone(),
            });
        }
    }
    Ok(stems)
}

/// Load one video directory of `<stem>.png` frames.
pub fn load_video(dir: &Path, video_id: &str) -> Result<VideoSequence, DatasetError> {
    let stems = frame_stems(dir, video_id)?;
    let mut frames = Vec::with_capacity(stems.len());
    for stem in &stems {
        frames.push(load_mask_frame(&dir.join(format!("{stem}.png")))?);
    }
    Ok(VideoSequence::new(String::from(video_id), frames, stems)?)
}

/// Load every video directory under `root` into a map, in parallel.
///
/// Directories named in [`RESERVED_DIRS`] are skipped so a pseudo-label
/// tree's `consistency/` summaries do not read as a video.
pub fn load_label_tree(root: &Path) -> Result<BTreeMap<String, VideoSequence>, DatasetError> {
    let videos: Vec<String> = subdirectories(root)?
        .into_iter()
        .filter(|name| !RESERVED_DIRS.contains(&name.as_str()))
        .collect();
    if videos.is_empty() {
        return Err(DatasetError::EmptyDataset {
            root: root.to_path_buf(),
        });
    }
    let loaded: Result<Vec<(String, VideoSequence)>, DatasetError> = videos
        .into_par_iter()
        .map(|video| {
            let seq = load_video(&root.join(&video), &video)?;
            Ok((video, seq))
        })
        .collect();
    Ok(loaded?.into_iter().collect())
}

/// Load ground truth from `<gt_root>/Annotations/<video>/`.
pub fn load_ground_truth(gt_root: &Path) -> Result<BTreeMap<String, VideoSequence>, DatasetError> {
    load_label_tree(&gt_root.join("Annotations"))
}

/// Read the optional `confidences/<model>/<video>.json` sidecars next to
/// the prediction root. Absent files mean full confidence.
fn load_confidences(
    pred_root: &Path,
    models: &[String],
    videos: &BTreeMap<String, BTreeMap<String, VideoSequence>>,
) -> Result<BTreeMap<String, BTreeMap<String, Vec<f64>>>, DatasetError> {
    let mut out: BTreeMap<String, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    let Some(parent) = pred_root.parent() else {
        return Ok(out);
    };
    let conf_root = parent.join("confidences");
    if !conf_root.is_dir() {
        return Ok(out);
    }
    for model in models {
        for video in videos[model].keys() {
            let path = conf_root.join(model).join(format!("{video}.json"));
            if !path.is_file() {
                continue;
            }
            let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
            let values: Vec<f64> =
                serde_json::from_str(&text).map_err(|e| DatasetError::BadConfidenceFile {
                    path: path.clone(),
                    reason: e.to_string(),
                })?;
            out.entry(model.clone())
                .or_default()
                .insert(video.clone(), values);
        }
    }
    Ok(out)
}

/// Load `<pred_root>/<model>/<video>/<frame>.png` for the given models.
///
/// Every model must cover the same videos and frames; the first
/// discrepancy is reported with the model, video, and frame name. Sidecar
/// confidence files are picked up from a sibling `confidences/` directory.
pub fn load_prediction_set(
    pred_root: &Path,
    models: &[String],
) -> Result<PredictionSet, DatasetError> {
    let mut videos: BTreeMap<String, BTreeMap<String, VideoSequence>> = BTreeMap::new();
    for model in models {
        let model_dir = pred_root.join(model);
        if !model_dir.is_dir() {
            return Err(DatasetError::MissingModelDir {
                model: model.clone(),
                path: model_dir,
            });
        }
        let names = subdirectories(&model_dir)?;
        let loaded: Result<Vec<(String, VideoSequence)>, DatasetError> = names
            .into_par_iter()
            .map(|video| {
                let seq = load_video(&model_dir.join(&video), &video)?;
                Ok((video, seq))
            })
            .collect();
        videos.insert(model.clone(), loaded?.into_iter().collect());
    }
    check_coverage(&videos)?;
    let confidences = load_confidences(pred_root, models, &videos)?;
    Ok(PredictionSet::new(videos, confidences)?)
}

/// Name the first video or frame any model lacks relative to the union.
fn check_coverage(
    videos: &BTreeMap<String, BTreeMap<String, VideoSequence>>,
) -> Result<(), DatasetError> {
    let mut all_videos: BTreeSet<&String> = BTreeSet::new();
    for per_model in videos.values() {
        all_videos.extend(per_model.keys());
    }
    for (model, per_model) in videos {
        for video in &all_videos {
            if !per_model.contains_key(*video) {
                return Err(DatasetError::MissingVideo {
                    model: model.clone(),
                    video: (*video).clone(),
                });
            }
        }
    }
    for video in &all_videos {
        let mut all_frames: BTreeSet<&String> = BTreeSet::new();
        for per_model in videos.values() {
            all_frames.extend(per_model[*video].frame_names());
        }
        for (model, per_model) in videos {
            let have: BTreeSet<&String> = per_model[*video].frame_names().iter().collect();
            if let Some(missing) = all_frames.difference(&have).next() {
                return Err(DatasetError::MissingFrame {
                    model: model.clone(),
                    video: (*video).clone(),
                    frame: (*missing).clone(),
                });
            }
        }
    }
    Ok(())
}

/// Write one video's frames as `<root>/<video_id>/<name>.png`.
pub fn save_video(root: &Path, seq: &VideoSequence) -> Result<(), DatasetError> {
    let dir = root.join(seq.video_id());
    for (frame, name) in seq.frames().iter().zip(seq.frame_names()) {
        save_mask_frame(frame, &dir.join(format!("{name}.png")))?;
    }
    Ok(())
}

/// Write a whole tree of videos under `root`, in parallel.
pub fn save_label_tree(
    root: &Path,
    videos: &BTreeMap<String, VideoSequence>,
) -> Result<(), DatasetError> {
    videos
        .par_iter()
        .map(|(_, seq)| save_video(root, seq))
        .collect::<Result<Vec<()>, DatasetError>>()?;
    Ok(())
}

/// Build a directory's contents in a hidden sibling, then rename it into
/// place. The target must not already exist; a failed build leaves
/// nothing behind at either path.
pub fn write_dir_atomically<E, F>(out: &Path, build: F) -> Result<(), E>
where
    E: From<DatasetError>,
    F: FnOnce(&Path) -> Result<(), E>,
{
    if out.exists() {
        return Err(DatasetError::OutputExists {
            path: out.to_path_buf(),
        }
        .into());
    }
    let name = out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| String::from("out"));
    let tmp = out.with_file_name(format!(".{name}.partial"));
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(|e| io_err(&tmp, e))?;
    }
    fs::create_dir_all(&tmp).map_err(|e| io_err(&tmp, e))?;
    match build(&tmp) {
        Ok(()) => fs::rename(&tmp, out).map_err(|e| {
            let _ = fs::remove_dir_all(&tmp);
            io_err(out, e).into()
        }),
        Err(e) => {
            let _ = fs::remove_dir_all(&tmp);
            Err(e)
        }
    }
}
