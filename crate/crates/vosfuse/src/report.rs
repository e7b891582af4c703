//! Machine-readable reports: score tables, agreement summaries, model
//! choices, and the end-of-run report.
//!
//! Every writer here is deterministic — maps serialize in key order,
//! scores are rounded half-up to 4 decimal places, and nothing embeds
//! wall-clock values unless timings are explicitly requested — so equal
//! inputs produce byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vosfuse_core::fusion::ConsistencyFractions;
use vosfuse_core::metrics::round_half_up;
use vosfuse_core::selection::{Granularity, ModelAssignment, ModelChoice};
use vosfuse_core::ScoreTable;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("report file {}: {reason}", path.display())]
    Parse { path: PathBuf, reason: String },
    #[error("io failure on {}: {source}", path.display())]
    IoFailure {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_err(path: &Path, source: io::Error) -> ReportError {
    ReportError::IoFailure {
        path: path.to_path_buf(),
        source,
    }
}

fn round4(value: f64) -> f64 {
    round_half_up(value, 4)
}

/// Write text atomically: temp sibling, then rename.
pub fn write_text_atomic(path: &Path, text: &str) -> Result<(), ReportError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| String::from("report"));
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, text).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(path, e)
    })
}

/// Serialize a value as pretty JSON with a trailing newline and write it
/// atomically.
pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| ReportError::Parse {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    text.push('\n');
    write_text_atomic(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ReportError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| ReportError::Parse {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

// ---------------------------------------------------------------------
// Score tables
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryJson {
    pub j: f64,
    pub f: f64,
    pub jf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectJson {
    pub j: f64,
    pub f: f64,
    pub jf: f64,
    pub precision: f64,
    pub recall: f64,
    pub frames_scored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoJson {
    pub mean: SummaryJson,
    pub objects: BTreeMap<String, ObjectJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableJson {
    pub global: SummaryJson,
    pub videos: BTreeMap<String, VideoJson>,
}

/// Nested JSON form of a score table, rounded to 4 decimal places.
pub fn table_to_json(table: &ScoreTable) -> TableJson {
    let videos = table
        .per_object
        .iter()
        .map(|(video, objects)| {
            let mean = &table.per_video[video];
            let objects = objects
                .iter()
                .map(|(label, s)| {
                    (
                        label.to_string(),
                        ObjectJson {
                            j: round4(s.j),
                            f: round4(s.f),
                            jf: round4(s.jf),
                            precision: round4(s.precision),
                            recall: round4(s.recall),
                            frames_scored: s.frames_scored,
                        },
                    )
                })
                .collect();
            (
                video.clone(),
                VideoJson {
                    mean: SummaryJson {
                        j: round4(mean.j),
                        f: round4(mean.f),
                        jf: round4(mean.jf),
                    },
                    objects,
                },
            )
        })
        .collect();
    TableJson {
        global: SummaryJson {
            j: round4(table.global.j),
            f: round4(table.global.f),
            jf: round4(table.global.jf),
        },
        videos,
    }
}

/// CSV form: `video,object,J,F,JF` rows plus a trailing GLOBAL row, all
/// values at 4 decimal places.
pub fn table_to_csv(table: &ScoreTable) -> String {
    let mut out = String::from("video,object,J,F,JF\n");
    for (video, objects) in &table.per_object {
        for (label, s) in objects {
            out.push_str(&format!(
                "{video},{label},{:.4},{:.4},{:.4}\n",
                round4(s.j),
                round4(s.f),
                round4(s.jf)
            ));
        }
    }
    out.push_str(&format!(
        "GLOBAL,,{:.4},{:.4},{:.4}\n",
        round4(table.global.j),
        round4(table.global.f),
        round4(table.global.jf)
    ));
    out
}

// ---------------------------------------------------------------------
// Fusion outputs
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameConsistencyJson {
    pub frame: String,
    pub unanimous: f64,
    pub majority: f64,
    pub conflict: f64,
}

/// Per-frame agreement fractions for one video, written to
/// `consistency/<video>.json` next to the pseudo-label frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoConsistencyJson {
    pub video: String,
    pub frames: Vec<FrameConsistencyJson>,
}

pub fn consistency_to_json(
    video: &str,
    frame_names: &[String],
    fractions: &[ConsistencyFractions],
) -> VideoConsistencyJson {
    VideoConsistencyJson {
        video: String::from(video),
        frames: frame_names
            .iter()
            .zip(fractions)
            .map(|(name, f)| FrameConsistencyJson {
                frame: name.clone(),
                unanimous: f.unanimous,
                majority: f.majority,
                conflict: f.conflict,
            })
            .collect(),
    }
}

/// Metadata written at the root of a fused pseudo-label tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionMetaJson {
    pub method: String,
    pub models: Vec<String>,
    pub db_version: Option<u64>,
}

// ---------------------------------------------------------------------
// Model choice
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AssignmentJson {
    Video { model: String },
    Frames { frames: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceJson {
    pub granularity: String,
    pub assignments: BTreeMap<String, AssignmentJson>,
    /// Per-video J&F of every model against the pseudo-labels, 4 dp.
    pub scores: BTreeMap<String, BTreeMap<String, f64>>,
}

pub fn choice_to_json(choice: &ModelChoice) -> ChoiceJson {
    ChoiceJson {
        granularity: String::from(choice.granularity.as_str()),
        assignments: choice
            .assignments
            .iter()
            .map(|(video, assignment)| {
                let json = match assignment {
                    ModelAssignment::Video(model) => AssignmentJson::Video {
                        model: model.clone(),
                    },
                    ModelAssignment::Frames(models) => AssignmentJson::Frames {
                        frames: models.clone(),
                    },
                };
                (video.clone(), json)
            })
            .collect(),
        scores: choice
            .scores
            .iter()
            .map(|(video, models)| {
                (
                    video.clone(),
                    models
                        .iter()
                        .map(|(model, &score)| (model.clone(), round4(score)))
                        .collect(),
                )
            })
            .collect(),
    }
}

pub fn choice_from_json(json: &ChoiceJson, path: &Path) -> Result<ModelChoice, ReportError> {
    let granularity = Granularity::parse(&json.granularity).ok_or_else(|| ReportError::Parse {
        path: path.to_path_buf(),
        reason: format!("unknown granularity {:?}", json.granularity),
    })?;
    let assignments = json
        .assignments
        .iter()
        .map(|(video, assignment)| {
            let decoded = match assignment {
                AssignmentJson::Video { model } => ModelAssignment::Video(model.clone()),
                AssignmentJson::Frames { frames } => ModelAssignment::Frames(frames.clone()),
            };
            (video.clone(), decoded)
        })
        .collect();
    Ok(ModelChoice {
        granularity,
        assignments,
        scores: json.scores.clone(),
    })
}

// ---------------------------------------------------------------------
// Run report
// ---------------------------------------------------------------------

/// Mean agreement fractions over a video's frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFractionsJson {
    pub unanimous: f64,
    pub majority: f64,
    pub conflict: f64,
}

/// The end-of-run report: everything needed to reproduce and audit a run.
///
/// Timings are optional and off by default so that identical runs yield
/// identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReportJson {
    pub tool_version: String,
    pub config: serde_json::Value,
    pub stages: Vec<String>,
    pub fusion: Option<FusionMetaJson>,
    pub consistency: BTreeMap<String, MeanFractionsJson>,
    pub choice: Option<ChoiceJson>,
    pub final_scores: Option<TableJson>,
    pub db_version: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

pub fn mean_fractions(frames: &[FrameConsistencyJson]) -> MeanFractionsJson {
    let n = frames.len().max(1) as f64;
    MeanFractionsJson {
        unanimous: frames.iter().map(|f| f.unanimous).sum::<f64>() / n,
        majority: frames.iter().map(|f| f.majority).sum::<f64>() / n,
        conflict: frames.iter().map(|f| f.conflict).sum::<f64>() / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;
    use vosfuse_core::metrics::{ObjectScore, SummaryScore};

    fn sample_table() -> ScoreTable {
        let object = |j: f64, f: f64| ObjectScore {
            j,
            f,
            jf: (j + f) / 2.0,
            precision: 0.9,
            recall: 0.8,
            frames_scored: 10,
        };
        let mut per_object = BTreeMap::new();
        let mut clip = BTreeMap::new();
        clip.insert(1u16, object(0.7863, 0.8603));
        clip.insert(2u16, object(0.7966, 0.8762));
        per_object.insert(String::from("clip"), clip);
        let mut per_video = BTreeMap::new();
        per_video.insert(
            String::from("clip"),
            SummaryScore {
                j: 0.79145,
                f: 0.86825,
                jf: 0.82985,
            },
        );
        ScoreTable {
            per_object,
            per_video,
            global: SummaryScore {
                j: 0.79145,
                f: 0.86825,
                jf: 0.82985,
            },
        }
    }

    #[test]
    fn csv_has_header_rows_and_global() {
        let csv = table_to_csv(&sample_table());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "video,object,J,F,JF");
        assert_eq!(lines[1], "clip,1,0.7863,0.8603,0.8233");
        assert_eq!(lines[2], "clip,2,0.7966,0.8762,0.8364");
        assert_eq!(lines[3], "GLOBAL,,0.7915,0.8683,0.8299");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn json_rounds_to_four_places() {
        let json = table_to_json(&sample_table());
        assert_eq!(json.videos["clip"].objects["1"].jf, 0.8233);
        assert_eq!(json.global.jf, 0.8299);
        let text = serde_json::to_string(&json).unwrap();
        assert!(text.contains("0.8233"));
    }

    #[test]
    fn choice_round_trips() {
        let mut assignments = BTreeMap::new();
        assignments.insert(
            String::from("a"),
            ModelAssignment::Video(String::from("alpha")),
        );
        assignments.insert(
            String::from("b"),
            ModelAssignment::Frames(vec![String::from("alpha"), String::from("bravo")]),
        );
        let mut scores = BTreeMap::new();
        let mut inner = BTreeMap::new();
        inner.insert(String::from("alpha"), 0.5);
        scores.insert(String::from("a"), inner);
        let choice = ModelChoice {
            granularity: Granularity::PerFrame,
            assignments,
            scores,
        };
        let json = choice_to_json(&choice);
        let text = serde_json::to_string_pretty(&json).unwrap();
        let parsed: ChoiceJson = serde_json::from_str(&text).unwrap();
        let back = choice_from_json(&parsed, Path::new("mem")).unwrap();
        assert_eq!(back.granularity, Granularity::PerFrame);
        assert_eq!(back.assignments, choice.assignments);
    }

    #[test]
    fn atomic_json_write_round_trips() {
        let dir = std::env::temp_dir().join(format!("report_{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("table.json");
        let json = table_to_json(&sample_table());
        write_json_atomic(&path, &json).unwrap();
        let back: TableJson = read_json(&path).unwrap();
        assert_eq!(back, json);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.ends_with('\n'));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn mean_fractions_averages_frames() {
        let frames = vec![
            FrameConsistencyJson {
                frame: String::from("00000"),
                unanimous: 1.0,
                majority: 0.0,
                conflict: 0.0,
            },
            FrameConsistencyJson {
                frame: String::from("00001"),
                unanimous: 0.5,
                majority: 0.25,
                conflict: 0.25,
            },
        ];
        let mean = mean_fractions(&frames);
        assert!((mean.unanimous - 0.75).abs() < 1e-12);
        assert!((mean.majority - 0.125).abs() < 1e-12);
        assert!((mean.conflict - 0.125).abs() < 1e-12);
    }
}
