//! Model recommendation: score each model against the fused pseudo-labels,
//! keep a bucketed history of those scores, and assemble the final
//! prediction set from per-video or per-frame winners.
//!
//! The history lives in a [`PerformanceDB`]: per feature bucket and model,
//! a running score sum and sample count. Bucket means feed back into
//! fusion as the historical weight factor and break ties between equally
//! scored models during recommendation; remaining ties go to the
//! lexicographically smallest model id so runs are reproducible.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::features::{extract_features, FeatureBucket, FrameFeatures};
use crate::fusion::PseudoLabelSet;
use crate::mask::{MaskError, PredictionSet, VideoSequence};
use crate::metrics::{evaluate_video, frame_jf, MetricConfig, MetricsError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SelectionError {
    #[error("score {value} is outside [0, 1]")]
    ScoreOutOfRange { value: f64 },
    #[error("assignment names model {model} absent from the prediction set")]
    UnknownModel { model: String },
    #[error("no model assigned for video {video}")]
    MissingAssignment { video: String },
    #[error("video {video}: {got} frame assignments for {expected} frames")]
    AssignmentLength {
        video: String,
        expected: usize,
        got: usize,
    },
    #[error("video {video} missing from {side}")]
    VideoCoverage { video: String, side: &'static str },
    #[error("performance history invalid: {reason}")]
    InvalidDb { reason: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Mask(#[from] MaskError),
}

/// Running score statistic for one (bucket, model) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreStat {
    pub score_sum: f64,
    pub sample_count: u64,
}

impl ScoreStat {
    pub fn mean(&self) -> f64 {
        self.score_sum / self.sample_count as f64
    }
}

/// Bucketed history of model scores.
///
/// Also carries the sorted sample list behind the running complexity
/// median, since the complexity bin boundary is data-dependent. The
/// version counts updates, so equal versions imply equal contents for a
/// db evolved through [`PerformanceDB::record`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PerformanceDB {
    version: u64,
    entries: BTreeMap<FeatureBucket, BTreeMap<String, ScoreStat>>,
    complexity_samples: Vec<f64>,
}

impl PerformanceDB {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuild from decoded parts, validating the stored invariants.
    pub fn from_parts(
        version: u64,
        entries: BTreeMap<FeatureBucket, BTreeMap<String, ScoreStat>>,
        mut complexity_samples: Vec<f64>,
    ) -> Result<Self, SelectionError> {
        for models in entries.values() {
            for (model, stat) in models {
                if stat.sample_count == 0 {
                    return Err(SelectionError::InvalidDb {
                        reason: alloc::format!("model {model} has a zero sample count"),
                    });
                }
                let mean = stat.mean();
                if !(0.0..=1.0).contains(&mean) {
                    return Err(SelectionError::InvalidDb {
                        reason: alloc::format!("model {model} has mean score {mean} outside [0, 1]"),
                    });
                }
            }
        }
        for &sample in &complexity_samples {
            if !sample.is_finite() || sample < 0.0 {
                return Err(SelectionError::InvalidDb {
                    reason: alloc::format!("complexity sample {sample} is not a non-negative real"),
                });
            }
        }
        complexity_samples.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        Ok(PerformanceDB {
            version,
            entries,
            complexity_samples,
        })
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn entries(&self) -> &BTreeMap<FeatureBucket, BTreeMap<String, ScoreStat>> {
        &self.entries
    }

    pub fn complexity_samples(&self) -> &[f64] {
        &self.complexity_samples
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Median of the recorded complexity samples, 0 when none exist.
    pub fn complexity_median(&self) -> f64 {
        let n = self.complexity_samples.len();
        if n == 0 {
            0.0
        } else if n % 2 == 1 {
            self.complexity_samples[n / 2]
        } else {
            (self.complexity_samples[n / 2 - 1] + self.complexity_samples[n / 2]) / 2.0
        }
    }

    /// Record one score under the bucket of `features`. The bucket is
    /// resolved against the median *before* this sample joins it, so the
    /// boundary never depends on the value being filed.
    pub fn record(
        &mut self,
        features: &FrameFeatures,
        model: &str,
        score: f64,
    ) -> Result<(), SelectionError> {
        if !(0.0..=1.0).contains(&score) {
            return Err(SelectionError::ScoreOutOfRange { value: score });
        }
        let bucket = FeatureBucket::from_features(features, self.complexity_median());
        let stat = self
            .entries
            .entry(bucket)
            .or_default()
            .entry(String::from(model))
            .or_insert(ScoreStat {
                score_sum: 0.0,
                sample_count: 0,
            });
        stat.score_sum += score;
        stat.sample_count += 1;

        let sample = features.scene_complexity;
        let pos = self
            .complexity_samples
            .partition_point(|&s| s <= sample);
        self.complexity_samples.insert(pos, sample);
        self.version += 1;
        Ok(())
    }

    /// Mean score per model within one bucket.
    pub fn bucket_means(&self, bucket: &FeatureBucket) -> BTreeMap<String, f64> {
        self.entries
            .get(bucket)
            .map(|models| models.iter().map(|(m, s)| (m.clone(), s.mean())).collect())
            .unwrap_or_default()
    }

    pub fn bucket_mean(&self, bucket: &FeatureBucket, model: &str) -> Option<f64> {
        self.entries.get(bucket)?.get(model).map(ScoreStat::mean)
    }

    /// Mean of a model's scores across every bucket it appears in.
    pub fn model_overall_mean(&self, model: &str) -> Option<f64> {
        let mut sum = 0.0;
        let mut count = 0u64;
        for models in self.entries.values() {
            if let Some(stat) = models.get(model) {
                sum += stat.score_sum;
                count += stat.sample_count;
            }
        }
        (count > 0).then(|| sum / count as f64)
    }
}

/// Functional form of [`PerformanceDB::record`]: returns the updated copy,
/// leaving the input untouched.
pub fn update_performance_db(
    db: &PerformanceDB,
    features: &FrameFeatures,
    model: &str,
    score: f64,
) -> Result<PerformanceDB, SelectionError> {
    let mut next = db.clone();
    next.record(features, model, score)?;
    Ok(next)
}

/// Unit at which winners are picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    PerVideo,
    PerFrame,
}

impl Granularity {
    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::PerVideo => "per_video",
            Granularity::PerFrame => "per_frame",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "video" | "per_video" => Granularity::PerVideo,
            "frame" | "per_frame" => Granularity::PerFrame,
            _ => return None,
        })
    }
}

/// Winner per video, or per frame within each video.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelAssignment {
    Video(String),
    Frames(Vec<String>),
}

/// Result of a recommendation pass: who won each unit, and every model's
/// score per video against the pseudo-labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelChoice {
    pub granularity: Granularity,
    pub assignments: BTreeMap<String, ModelAssignment>,
    pub scores: BTreeMap<String, BTreeMap<String, f64>>,
}

/// Mean J&F of a model's sequence against the pseudo-label sequence,
/// averaged over the pseudo frame-0 objects. A pseudo sequence with no
/// objects gives every model the empty-empty convention score.
pub fn score_against_pseudo(
    model_seq: &VideoSequence,
    pseudo_seq: &VideoSequence,
    cfg: &MetricConfig,
) -> Result<f64, MetricsError> {
    let objects = evaluate_video(model_seq, pseudo_seq, cfg)?;
    if objects.is_empty() {
        return Ok(cfg.empty_empty_score());
    }
    Ok(objects.values().map(|o| o.jf).sum::<f64>() / objects.len() as f64)
}

/// Among equally scored models, prefer the higher history prior, then the
/// lexicographically smallest id. `candidates` is ascending by id.
fn break_tie(candidates: &[String], prior: impl Fn(&str) -> Option<f64>) -> String {
    let mut best = candidates[0].clone();
    let mut best_prior = prior(&best);
    for model in &candidates[1..] {
        let p = prior(model);
        if p > best_prior {
            best = model.clone();
            best_prior = p;
        }
    }
    best
}

/// Models holding the exact maximum score, ascending by id.
fn score_leaders(scores: &BTreeMap<String, f64>) -> Vec<String> {
    let best = scores.values().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    scores
        .iter()
        .filter(|(_, &s)| s == best)
        .map(|(m, _)| m.clone())
        .collect()
}

/// Pick the best model per video (or per frame) by J&F against the
/// pseudo-labels. Ties break on the history prior, then model id.
pub fn recommend(
    preds: &PredictionSet,
    pseudo: &PseudoLabelSet,
    db: Option<&PerformanceDB>,
    granularity: Granularity,
    cfg: &MetricConfig,
) -> Result<ModelChoice, SelectionError> {
    for video in pseudo.videos.keys() {
        if !preds.video_ids().contains(&video.as_str()) {
            return Err(SelectionError::VideoCoverage {
                video: video.clone(),
                side: "predictions",
            });
        }
    }
    for video in preds.video_ids() {
        if !pseudo.videos.contains_key(video) {
            return Err(SelectionError::VideoCoverage {
                video: String::from(video),
                side: "pseudo-labels",
            });
        }
    }

    let models = preds.models();
    let mut assignments = BTreeMap::new();
    let mut all_scores = BTreeMap::new();

    for (video, pseudo_seq) in &pseudo.videos {
        let mut video_scores = BTreeMap::new();
        for model in models {
            let seq = preds.sequence(model, video).expect("coverage checked");
            video_scores.insert(
                model.clone(),
                score_against_pseudo(seq, pseudo_seq, cfg)?,
            );
        }

        match granularity {
            Granularity::PerVideo => {
                let leaders = score_leaders(&video_scores);
                let winner = break_tie(&leaders, |m| {
                    db.and_then(|db| db.model_overall_mean(m))
                });
                assignments.insert(video.clone(), ModelAssignment::Video(winner));
            }
            Granularity::PerFrame => {
                let roster = pseudo_seq.frames()[0].object_labels();
                let mut winners = Vec::with_capacity(pseudo_seq.len());
                for t in 0..pseudo_seq.len() {
                    let pseudo_frame = &pseudo_seq.frames()[t];
                    let mut frame_scores = BTreeMap::new();
                    for model in models {
                        let seq = preds.sequence(model, video).expect("coverage checked");
                        if seq.len() != pseudo_seq.len() {
                            return Err(MetricsError::FrameCountMismatch {
                                video: video.clone(),
                                pred: seq.len(),
                                gt: pseudo_seq.len(),
                            }
                            .into());
                        }
                        let score = if roster.is_empty() {
                            cfg.empty_empty_score()
                        } else {
                            frame_jf(&seq.frames()[t], pseudo_frame, &roster, cfg)?
                        };
                        frame_scores.insert(model.clone(), score);
                    }
                    let leaders = score_leaders(&frame_scores);
                    let winner = break_tie(&leaders, |m| {
                        db.and_then(|db| {
                            let features = extract_features(pseudo_frame);
                            let bucket =
                                FeatureBucket::from_features(&features, db.complexity_median());
                            db.bucket_mean(&bucket, m)
                        })
                    });
                    winners.push(winner);
                }
                assignments.insert(video.clone(), ModelAssignment::Frames(winners));
            }
        }
        all_scores.insert(video.clone(), video_scores);
    }

    Ok(ModelChoice {
        granularity,
        assignments,
        scores: all_scores,
    })
}

/// Copy the assigned model's frames into the final per-video sequences.
pub fn assemble_final(
    preds: &PredictionSet,
    choice: &ModelChoice,
) -> Result<BTreeMap<String, VideoSequence>, SelectionError> {
    let check_model = |model: &String| -> Result<(), SelectionError> {
        if preds.models().contains(model) {
            Ok(())
        } else {
            Err(SelectionError::UnknownModel {
                model: model.clone(),
            })
        }
    };
    for video in choice.assignments.keys() {
        if !preds.video_ids().contains(&video.as_str()) {
            return Err(SelectionError::VideoCoverage {
                video: video.clone(),
                side: "predictions",
            });
        }
    }

    let mut out = BTreeMap::new();
    for video in preds.video_ids() {
        let assignment =
            choice
                .assignments
                .get(video)
                .ok_or_else(|| SelectionError::MissingAssignment {
                    video: String::from(video),
                })?;
        let sequence = match assignment {
            ModelAssignment::Video(model) => {
                check_model(model)?;
                preds.sequence(model, video).expect("model checked").clone()
            }
            ModelAssignment::Frames(per_frame) => {
                let reference = preds
                    .sequence(preds.models().first().expect("non-empty set"), video)
                    .expect("coverage");
                if per_frame.len() != reference.len() {
                    return Err(SelectionError::AssignmentLength {
                        video: String::from(video),
                        expected: reference.len(),
                        got: per_frame.len(),
                    });
                }
                let mut frames = Vec::with_capacity(per_frame.len());
                for (t, model) in per_frame.iter().enumerate() {
                    check_model(model)?;
                    frames.push(
                        preds.sequence(model, video).expect("model checked").frames()[t].clone(),
                    );
                }
                VideoSequence::new(String::from(video), frames, reference.frame_names().to_vec())?
            }
        };
        out.insert(String::from(video), sequence);
    }
    Ok(out)
}
