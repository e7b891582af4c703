//! Region similarity J, pixel precision/recall F, and their weighted
//! composite, from single frames up to whole datasets.
//!
//! All scores are ratios of pixel counts between a predicted binary mask P
//! and a ground-truth binary mask G:
//!
//! * J = |P ∩ G| / |P ∪ G|
//! * Precision = |P ∩ G| / |P|, Recall = |P ∩ G| / |G|
//! * F = 2 · Precision · Recall / (Precision + Recall)
//! * J&F = j_weight · J + f_weight · F
//!
//! Because every term is a pixel count, F = 2J / (1 + J) whenever both
//! masks are non-empty; the property tests pin that identity.
//!
//! Frames where an object has disappeared need a convention: an empty
//! ground truth with an empty prediction scores `empty_empty_score`
//! (default 1.0), an empty ground truth with a non-empty prediction scores
//! `empty_gt_nonempty_pred_score` (default 0.0). Both are configurable so
//! scores stay defined on every frame.

use alloc::collections::BTreeMap;
use alloc::string::String;

use crate::mask::{BinaryMask, Label, MaskError, VideoSequence};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("masks {a_width}x{a_height} and {b_width}x{b_height} do not share dimensions")]
    DimensionMismatch {
        a_width: u32,
        a_height: u32,
        b_width: u32,
        b_height: u32,
    },
    #[error("video {video}: {pred} prediction frames vs {gt} ground-truth frames")]
    FrameCountMismatch {
        video: String,
        pred: usize,
        gt: usize,
    },
    #[error("empty denominator: prediction empty = {pred_empty}, ground truth empty = {gt_empty}")]
    EmptyDenominator { pred_empty: bool, gt_empty: bool },
    #[error("score {value} is outside [0, 1]")]
    OutOfRange { value: f64 },
    #[error("weights ({j_weight}, {f_weight}) must be non-negative and sum to 1")]
    WeightsInvalid { j_weight: f64, f_weight: f64 },
    #[error("video {video} missing from {side}")]
    VideoCoverage { video: String, side: &'static str },
    #[error("no (video, object) pairs to aggregate")]
    NoObjects,
    #[error(transparent)]
    Mask(#[from] MaskError),
}

/// Weights and empty-mask conventions for scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricConfig {
    j_weight: f64,
    f_weight: f64,
    empty_empty_score: f64,
    empty_gt_nonempty_pred_score: f64,
    score_first_frame: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            j_weight: 0.5,
            f_weight: 0.5,
            empty_empty_score: 1.0,
            empty_gt_nonempty_pred_score: 0.0,
            score_first_frame: false,
        }
    }
}

impl MetricConfig {
    pub fn new(j_weight: f64, f_weight: f64) -> Result<Self, MetricsError> {
        if !(j_weight >= 0.0 && f_weight >= 0.0 && (j_weight + f_weight - 1.0).abs() <= 1e-9) {
            return Err(MetricsError::WeightsInvalid { j_weight, f_weight });
        }
        Ok(Self {
            j_weight,
            f_weight,
            ..Self::default()
        })
    }

    pub fn with_empty_conventions(mut self, empty_empty: f64, empty_gt_nonempty_pred: f64) -> Self {
        self.empty_empty_score = empty_empty;
        self.empty_gt_nonempty_pred_score = empty_gt_nonempty_pred;
        self
    }

    /// Score the first frame too. Off by default: in the semi-supervised
    /// setting frame 0 is the given annotation, not a prediction.
    pub fn with_score_first_frame(mut self, yes: bool) -> Self {
        self.score_first_frame = yes;
        self
    }

    pub fn j_weight(&self) -> f64 {
        self.j_weight
    }

    pub fn f_weight(&self) -> f64 {
        self.f_weight
    }

    pub fn empty_empty_score(&self) -> f64 {
        self.empty_empty_score
    }

    pub fn empty_gt_nonempty_pred_score(&self) -> f64 {
        self.empty_gt_nonempty_pred_score
    }

    pub fn score_first_frame(&self) -> bool {
        self.score_first_frame
    }
}

/// One object's scores on one frame. `defined` is false when both masks
/// were empty and the configured convention supplied the values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameScore {
    pub j: f64,
    pub f: f64,
    pub precision: f64,
    pub recall: f64,
    pub defined: bool,
}

fn check_dims(pred: &BinaryMask, gt: &BinaryMask) -> Result<(), MetricsError> {
    if pred.same_dimensions(gt) {
        Ok(())
    } else {
        Err(MetricsError::DimensionMismatch {
            a_width: pred.width(),
            a_height: pred.height(),
            b_width: gt.width(),
            b_height: gt.height(),
        })
    }
}

/// Region similarity |P ∩ G| / |P ∪ G| with the empty-mask conventions.
pub fn jaccard(pred: &BinaryMask, gt: &BinaryMask, cfg: &MetricConfig) -> Result<f64, MetricsError> {
    check_dims(pred, gt)?;
    let union = pred.union_count(gt);
    if union == 0 {
        return Ok(cfg.empty_empty_score);
    }
    if gt.is_empty() {
        return Ok(cfg.empty_gt_nonempty_pred_score);
    }
    Ok(pred.intersection_count(gt) as f64 / union as f64)
}

/// Raw pixel precision and recall. Empty denominators are reported as a
/// sentinel error so the caller can apply its conventions.
pub fn precision_recall(pred: &BinaryMask, gt: &BinaryMask) -> Result<(f64, f64), MetricsError> {
    check_dims(pred, gt)?;
    let p = pred.count();
    let g = gt.count();
    if p == 0 || g == 0 {
        return Err(MetricsError::EmptyDenominator {
            pred_empty: p == 0,
            gt_empty: g == 0,
        });
    }
    let inter = pred.intersection_count(gt) as f64;
    Ok((inter / p as f64, inter / g as f64))
}

/// Pixel F-measure 2PR / (P + R), 0 when P + R = 0, with the same
/// empty-mask conventions as [`jaccard`].
pub fn f_measure(pred: &BinaryMask, gt: &BinaryMask, cfg: &MetricConfig) -> Result<f64, MetricsError> {
    check_dims(pred, gt)?;
    match precision_recall(pred, gt) {
        Ok((p, r)) => {
            if p + r == 0.0 {
                Ok(0.0)
            } else {
                Ok(2.0 * p * r / (p + r))
            }
        }
        Err(MetricsError::EmptyDenominator {
            pred_empty,
            gt_empty,
        }) => Ok(match (gt_empty, pred_empty) {
            (true, true) => cfg.empty_empty_score,
            (true, false) => cfg.empty_gt_nonempty_pred_score,
            // Object present in ground truth, missed entirely.
            (false, true) => 0.0,
            (false, false) => unreachable!("sentinel implies an empty mask"),
        }),
        Err(e) => Err(e),
    }
}

/// All per-frame scores for one object at once.
pub fn frame_score(
    pred: &BinaryMask,
    gt: &BinaryMask,
    cfg: &MetricConfig,
) -> Result<FrameScore, MetricsError> {
    check_dims(pred, gt)?;
    match precision_recall(pred, gt) {
        Ok((precision, recall)) => {
            let j = jaccard(pred, gt, cfg)?;
            let f = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            Ok(FrameScore {
                j,
                f,
                precision,
                recall,
                defined: true,
            })
        }
        Err(MetricsError::EmptyDenominator {
            pred_empty,
            gt_empty,
        }) => {
            let score = match (gt_empty, pred_empty) {
                (true, true) => cfg.empty_empty_score,
                (true, false) => cfg.empty_gt_nonempty_pred_score,
                (false, true) => 0.0,
                (false, false) => unreachable!("sentinel implies an empty mask"),
            };
            Ok(FrameScore {
                j: score,
                f: score,
                precision: if pred_empty { score } else { 0.0 },
                recall: if gt_empty { score } else { 0.0 },
                defined: !(gt_empty && pred_empty),
            })
        }
        Err(e) => Err(e),
    }
}

/// Weighted J&F composite.
pub fn composite_jf(j: f64, f: f64, cfg: &MetricConfig) -> Result<f64, MetricsError> {
    for value in [j, f] {
        if !(0.0..=1.0).contains(&value) {
            return Err(MetricsError::OutOfRange { value });
        }
    }
    Ok(cfg.j_weight * j + cfg.f_weight * f)
}

/// Round half-up at `decimals` places. Scores are non-negative, so the
/// half-up direction is unambiguous.
pub fn round_half_up(value: f64, decimals: u32) -> f64 {
    debug_assert!(value >= 0.0);
    let scale = 10u64.pow(decimals) as f64;
    (value * scale + 0.5) as u64 as f64 / scale
}

/// Mean scores for one object over the scored frames of a video.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectScore {
    pub j: f64,
    pub f: f64,
    pub jf: f64,
    pub precision: f64,
    pub recall: f64,
    /// Frames that entered the mean.
    pub frames_scored: usize,
}

/// Score one predicted sequence against ground truth, per object.
///
/// The object roster is the set of labels in the ground truth's first
/// frame. Scoring starts at frame 1 unless the config says otherwise;
/// every scored frame contributes to the mean, with the empty-mask
/// conventions filling frames where the object is absent. Predicted labels
/// outside the roster are ignored here (validation reports them).
pub fn evaluate_video(
    pred: &VideoSequence,
    gt: &VideoSequence,
    cfg: &MetricConfig,
) -> Result<BTreeMap<Label, ObjectScore>, MetricsError> {
    if pred.len() != gt.len() {
        return Err(MetricsError::FrameCountMismatch {
            video: String::from(gt.video_id()),
            pred: pred.len(),
            gt: gt.len(),
        });
    }
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(MetricsError::DimensionMismatch {
            a_width: pred.width(),
            a_height: pred.height(),
            b_width: gt.width(),
            b_height: gt.height(),
        });
    }

    let roster = gt.frames()[0].object_labels();
    let start = if cfg.score_first_frame() { 0 } else { 1 };

    let mut result = BTreeMap::new();
    for &label in &roster {
        let mut sums = (0.0, 0.0, 0.0, 0.0);
        let mut frames_scored = 0usize;
        for t in start..gt.len() {
            let pred_mask = pred.frames()[t].binary(label);
            let gt_mask = gt.frames()[t].binary(label);
            let score = frame_score(&pred_mask, &gt_mask, cfg)?;
            sums.0 += score.j;
            sums.1 += score.f;
            sums.2 += score.precision;
            sums.3 += score.recall;
            frames_scored += 1;
        }
        let (j, f, precision, recall) = if frames_scored == 0 {
            // Single-frame video: nothing to predict beyond the annotation.
            let s = cfg.empty_empty_score;
            (s, s, s, s)
        } else {
            let n = frames_scored as f64;
            (sums.0 / n, sums.1 / n, sums.2 / n, sums.3 / n)
        };
        result.insert(
            label,
            ObjectScore {
                j,
                f,
                jf: cfg.j_weight * j + cfg.f_weight * f,
                precision,
                recall,
                frames_scored,
            },
        );
    }
    Ok(result)
}

/// Aggregate J, F, J&F triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryScore {
    pub j: f64,
    pub f: f64,
    pub jf: f64,
}

/// Per-object, per-video, and global scores for one model over a dataset.
///
/// The global row is the unweighted mean over all (video, object) pairs;
/// per-video rows are means over that video's objects.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub per_object: BTreeMap<String, BTreeMap<Label, ObjectScore>>,
    pub per_video: BTreeMap<String, SummaryScore>,
    pub global: SummaryScore,
}

/// Evaluate one model's sequences against ground truth over every video.
///
/// Videos whose first ground-truth frame has no objects contribute no
/// (video, object) pairs; a dataset with no pairs at all is an error.
pub fn evaluate_dataset(
    model_videos: &BTreeMap<String, VideoSequence>,
    gt: &BTreeMap<String, VideoSequence>,
    cfg: &MetricConfig,
) -> Result<ScoreTable, MetricsError> {
    for video in gt.keys() {
        if !model_videos.contains_key(video) {
            return Err(MetricsError::VideoCoverage {
                video: video.clone(),
                side: "predictions",
            });
        }
    }
    for video in model_videos.keys() {
        if !gt.contains_key(video) {
            return Err(MetricsError::VideoCoverage {
                video: video.clone(),
                side: "ground truth",
            });
        }
    }

    let mut per_object = BTreeMap::new();
    let mut per_video = BTreeMap::new();
    let mut pair_sums = (0.0, 0.0);
    let mut pairs = 0usize;

    for (video, gt_seq) in gt {
        let objects = evaluate_video(&model_videos[video], gt_seq, cfg)?;
        if objects.is_empty() {
            per_object.insert(video.clone(), objects);
            continue;
        }
        let n = objects.len() as f64;
        let j = objects.values().map(|o| o.j).sum::<f64>() / n;
        let f = objects.values().map(|o| o.f).sum::<f64>() / n;
        per_video.insert(
            video.clone(),
            SummaryScore {
                j,
                f,
                jf: cfg.j_weight * j + cfg.f_weight * f,
            },
        );
        for object in objects.values() {
            pair_sums.0 += object.j;
            pair_sums.1 += object.f;
            pairs += 1;
        }
        per_object.insert(video.clone(), objects);
    }

    if pairs == 0 {
        return Err(MetricsError::NoObjects);
    }
    let j = pair_sums.0 / pairs as f64;
    let f = pair_sums.1 / pairs as f64;
    Ok(ScoreTable {
        per_object,
        per_video,
        global: SummaryScore {
            j,
            f,
            jf: cfg.j_weight * j + cfg.f_weight * f,
        },
    })
}

/// Mean frame-level J&F over a set of object labels, for ranking
/// alternatives on a single frame.
pub fn frame_jf(
    pred: &crate::mask::MaskFrame,
    gt: &crate::mask::MaskFrame,
    roster: &[Label],
    cfg: &MetricConfig,
) -> Result<f64, MetricsError> {
    if roster.is_empty() {
        return Err(MetricsError::NoObjects);
    }
    let mut acc = 0.0;
    for &label in roster {
        let score = frame_score(&pred.binary(label), &gt.binary(label), cfg)?;
        acc += cfg.j_weight * score.j + cfg.f_weight * score.f;
    }
    Ok(acc / roster.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::MaskFrame;
    use alloc::vec;
    use alloc::vec::Vec;

    /// Brute-force oracle used to freeze expected values: literal pixel
    /// sets, intersected by scanning coordinates.
    fn oracle_counts(pred: &[(u32, u32)], gt: &[(u32, u32)]) -> (usize, usize, usize, usize) {
        let inter = pred.iter().filter(|p| gt.contains(p)).count();
        let union = pred.len() + gt.len() - inter;
        (inter, union, pred.len(), gt.len())
    }

    fn mask_of(width: u32, height: u32, pixels: &[(u32, u32)]) -> BinaryMask {
        let mut labels = vec![0u16; (width * height) as usize];
        for &(y, x) in pixels {
            labels[(y * width + x) as usize] = 1;
        }
        MaskFrame::new(width, height, labels).unwrap().binary(1)
    }

    fn four_by_four() -> (BinaryMask, BinaryMask) {
        // P = {(0,0),(0,1),(1,0),(2,2)}; G = rows 0-1 x cols 0-2.
        let p = [(0, 0), (0, 1), (1, 0), (2, 2)];
        let g = [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)];
        let (inter, union, np, ng) = oracle_counts(&p, &g);
        assert_eq!((inter, union, np, ng), (3, 7, 4, 6));
        (mask_of(4, 4, &p), mask_of(4, 4, &g))
    }

    #[test]
    fn jaccard_hand_counted() {
        let (p, g) = four_by_four();
        let j = jaccard(&p, &g, &MetricConfig::default()).unwrap();
        assert!((j - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn jaccard_identity() {
        let (p, _) = four_by_four();
        assert_eq!(jaccard(&p, &p.clone(), &MetricConfig::default()).unwrap(), 1.0);
    }

    #[test]
    fn jaccard_empty_conventions() {
        let cfg = MetricConfig::default();
        let empty = BinaryMask::empty(4, 4);
        let (p, _) = four_by_four();
        assert_eq!(jaccard(&empty, &empty, &cfg).unwrap(), 1.0);
        assert_eq!(jaccard(&p, &empty, &cfg).unwrap(), 0.0);
        assert_eq!(jaccard(&empty, &p, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn jaccard_rejects_dimension_mismatch() {
        let a = BinaryMask::empty(4, 4);
        let b = BinaryMask::empty(4, 5);
        assert!(matches!(
            jaccard(&a, &b, &MetricConfig::default()),
            Err(MetricsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn precision_recall_hand_counted() {
        let (p, g) = four_by_four();
        let (precision, recall) = precision_recall(&p, &g).unwrap();
        assert_eq!((precision, recall), (0.75, 0.5));
    }

    #[test]
    fn precision_recall_disjoint() {
        let p = mask_of(4, 4, &[(3, 3)]);
        let g = mask_of(4, 4, &[(0, 0)]);
        assert_eq!(precision_recall(&p, &g).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn precision_recall_signals_empty_denominator() {
        let empty = BinaryMask::empty(4, 4);
        let (p, _) = four_by_four();
        assert_eq!(
            precision_recall(&empty, &p).unwrap_err(),
            MetricsError::EmptyDenominator {
                pred_empty: true,
                gt_empty: false
            }
        );
    }

    #[test]
    fn f_measure_hand_counted() {
        let (p, g) = four_by_four();
        let f = f_measure(&p, &g, &MetricConfig::default()).unwrap();
        assert!((f - 0.6).abs() < 1e-15);
    }

    #[test]
    fn f_equals_2j_over_1_plus_j_on_random_masks() {
        let mut rng = crate::rng::Xoshiro256StarStar::seed_from_u64(2024);
        let cfg = MetricConfig::default();
        for _ in 0..1000 {
            let pred_px: Vec<(u32, u32)> = (0..rng.gen_range(1, 40))
                .map(|_| (rng.gen_range(0, 15) as u32, rng.gen_range(0, 15) as u32))
                .collect();
            let gt_px: Vec<(u32, u32)> = (0..rng.gen_range(1, 40))
                .map(|_| (rng.gen_range(0, 15) as u32, rng.gen_range(0, 15) as u32))
                .collect();
            let p = mask_of(16, 16, &pred_px);
            let g = mask_of(16, 16, &gt_px);
            let j = jaccard(&p, &g, &cfg).unwrap();
            let f = f_measure(&p, &g, &cfg).unwrap();
            assert!((f - 2.0 * j / (1.0 + j)).abs() < 1e-12);
        }
    }

    #[test]
    fn composite_weights_table_rows() {
        let cfg = MetricConfig::default();
        // Published leaderboard and ablation rows, reproduced exactly at
        // four decimals with half-up rounding.
        let rows = [
            (0.7863, 0.8603, 0.8233),
            (0.7966, 0.8762, 0.8364),
            (0.8276, 0.8920, 0.8598),
            (0.8057, 0.8809, 0.8433),
            (0.8356, 0.9184, 0.8770),
            (0.8359, 0.9092, 0.8726),
        ];
        for (j, f, expected) in rows {
            let got = round_half_up(composite_jf(j, f, &cfg).unwrap(), 4);
            assert_eq!(got, expected, "composite of ({j}, {f})");
        }
        // The unrounded leaderboard top row.
        let raw = composite_jf(0.8359, 0.9092, &cfg).unwrap();
        assert!((raw - 0.87255).abs() < 1e-12);
    }

    #[test]
    fn composite_rejects_out_of_range() {
        let cfg = MetricConfig::default();
        assert!(matches!(
            composite_jf(1.2, 0.5, &cfg),
            Err(MetricsError::OutOfRange { .. })
        ));
        assert_eq!(composite_jf(0.5, 0.5, &cfg).unwrap(), 0.5);
    }

    #[test]
    fn config_rejects_bad_weights() {
        assert!(MetricConfig::new(0.7, 0.3).is_ok());
        assert!(matches!(
            MetricConfig::new(0.7, 0.4),
            Err(MetricsError::WeightsInvalid { .. })
        ));
        assert!(MetricConfig::new(-0.5, 1.5).is_err());
    }

    fn seq_from(labels_per_frame: &[&[u16]], width: u32, height: u32) -> VideoSequence {
        let frames: Vec<MaskFrame> = labels_per_frame
            .iter()
            .map(|l| MaskFrame::new(width, height, l.to_vec()).unwrap())
            .collect();
        let names = (0..frames.len()).map(|i| alloc::format!("{i:05}")).collect();
        VideoSequence::new("v".into(), frames, names).unwrap()
    }

    #[test]
    fn evaluate_video_perfect_prediction() {
        let gt = seq_from(
            &[&[1, 0, 0, 2], &[0, 1, 2, 0], &[1, 1, 2, 2]],
            2,
            2,
        );
        let scores = evaluate_video(&gt.clone(), &gt, &MetricConfig::default()).unwrap();
        assert_eq!(scores.len(), 2);
        for score in scores.values() {
            assert_eq!(score.j, 1.0);
            assert_eq!(score.f, 1.0);
            assert_eq!(score.jf, 1.0);
            assert_eq!(score.frames_scored, 2);
        }
    }

    #[test]
    fn evaluate_video_disappearing_object_scores_one() {
        // Object 1 visible in frames 1-2, absent in frame 3; the prediction
        // matches exactly, so the empty-empty convention keeps the mean at 1.
        let gt = seq_from(&[&[1], &[1], &[1], &[0]], 1, 1);
        let scores = evaluate_video(&gt.clone(), &gt, &MetricConfig::default()).unwrap();
        assert_eq!(scores[&1].j, 1.0);
        assert_eq!(scores[&1].frames_scored, 3);
    }

    #[test]
    fn evaluate_video_background_prediction_scores_zero() {
        let gt = seq_from(&[&[1, 1, 0, 0], &[1, 1, 0, 0], &[0, 1, 1, 0]], 2, 2);
        let pred = seq_from(&[&[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0]], 2, 2);
        let scores = evaluate_video(&pred, &gt, &MetricConfig::default()).unwrap();
        assert_eq!(scores[&1].j, 0.0);
        assert_eq!(scores[&1].f, 0.0);
    }

    #[test]
    fn evaluate_video_rejects_frame_count_mismatch() {
        let gt = seq_from(&[&[1], &[1]], 1, 1);
        let pred = seq_from(&[&[1], &[1], &[1]], 1, 1);
        assert!(matches!(
            evaluate_video(&pred, &gt, &MetricConfig::default()),
            Err(MetricsError::FrameCountMismatch { .. })
        ));
    }

    #[test]
    fn evaluate_video_first_frame_flag() {
        // Prediction wrong only on frame 0, which is excluded by default.
        let gt = seq_from(&[&[1, 0], &[1, 0]], 2, 1);
        let pred = seq_from(&[&[0, 1], &[1, 0]], 2, 1);
        let cfg = MetricConfig::default();
        assert_eq!(evaluate_video(&pred, &gt, &cfg).unwrap()[&1].j, 1.0);
        let cfg = cfg.with_score_first_frame(true);
        assert_eq!(evaluate_video(&pred, &gt, &cfg).unwrap()[&1].j, 0.5);
    }

    fn dataset_pair() -> (BTreeMap<String, VideoSequence>, BTreeMap<String, VideoSequence>) {
        let mut gt = BTreeMap::new();
        let mut pred = BTreeMap::new();
        // Video a: one object, predicted perfectly.
        let ga = seq_from(&[&[1, 0], &[1, 0], &[0, 1]], 2, 1);
        gt.insert("a".to_string(), ga.clone());
        pred.insert("a".to_string(), ga);
        // Video b: one object, prediction misses everything.
        let gb = seq_from(&[&[2, 0], &[2, 0], &[2, 2]], 2, 1);
        let pb = seq_from(&[&[2, 0], &[0, 0], &[0, 0]], 2, 1);
        gt.insert("b".to_string(), gb);
        pred.insert("b".to_string(), pb);
        (pred, gt)
    }

    #[test]
    fn evaluate_dataset_global_is_pair_mean() {
        let (pred, gt) = dataset_pair();
        let cfg = MetricConfig::default();
        let table = evaluate_dataset(&pred, &gt, &cfg).unwrap();
        // Independent recomputation: mean over the two (video, object) pairs.
        let mut js = Vec::new();
        let mut fs = Vec::new();
        for video in ["a", "b"] {
            for score in evaluate_video(&pred[video], &gt[video], &cfg).unwrap().values() {
                js.push(score.j);
                fs.push(score.f);
            }
        }
        let j = js.iter().sum::<f64>() / js.len() as f64;
        let f = fs.iter().sum::<f64>() / fs.len() as f64;
        assert!((table.global.j - j).abs() < 1e-15);
        assert!((table.global.f - f).abs() < 1e-15);
        assert!((table.global.jf - (0.5 * j + 0.5 * f)).abs() < 1e-12);
    }

    #[test]
    fn evaluate_dataset_two_video_arithmetic() {
        let (pred, gt) = dataset_pair();
        let table = evaluate_dataset(&pred, &gt, &MetricConfig::default()).unwrap();
        assert_eq!(table.per_video["a"].jf, 1.0);
        assert_eq!(table.per_video["b"].jf, 0.0);
        assert_eq!(table.global.jf, 0.5);
    }

    #[test]
    fn evaluate_dataset_perfect_model() {
        let (_, gt) = dataset_pair();
        let table = evaluate_dataset(&gt.clone(), &gt, &MetricConfig::default()).unwrap();
        assert_eq!(table.global.j, 1.0);
        assert_eq!(table.global.f, 1.0);
        assert_eq!(table.global.jf, 1.0);
    }

    #[test]
    fn evaluate_dataset_rejects_missing_video() {
        let (pred, mut gt) = dataset_pair();
        gt.insert("c".to_string(), seq_from(&[&[1], &[1]], 1, 1));
        assert!(matches!(
            evaluate_dataset(&pred, &gt, &MetricConfig::default()),
            Err(MetricsError::VideoCoverage { .. })
        ));
    }

    #[test]
    fn round_half_up_behaviour() {
        assert_eq!(round_half_up(0.87255, 4), 0.8726);
        assert_eq!(round_half_up(0.87254, 4), 0.8725);
        assert_eq!(round_half_up(0.5, 0), 1.0);
        assert_eq!(round_half_up(1.0, 4), 1.0);
    }
}
