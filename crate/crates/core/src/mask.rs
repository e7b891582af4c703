//! Dense label maps, binary object masks, and multi-model prediction sets.
//!
//! A [`MaskFrame`] is one frame's segmentation: a row-major array of object
//! labels where 0 is background and each positive value identifies one
//! tracked object. Object identity is the label value itself, carried
//! unchanged across frames.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Object label. 0 is background; positive values identify objects.
pub type Label = u16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MaskError {
    #[error("label buffer holds {actual} values, expected {expected} for the given dimensions")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("frame dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: u32, height: u32 },
    #[error("label {label} exceeds the maximum object id {max}")]
    LabelOverflow { label: Label, max: Label },
    #[error("frames {a_width}x{a_height} and {b_width}x{b_height} do not share dimensions")]
    DimensionMismatch {
        a_width: u32,
        a_height: u32,
        b_width: u32,
        b_height: u32,
    },
    #[error("video {video}: frame names are not strictly increasing at index {index}")]
    FrameOrder { video: String, index: usize },
    #[error("video {video}: {frames} frames but {names} frame names")]
    FrameNameCount {
        video: String,
        frames: usize,
        names: usize,
    },
    #[error("video {video} has no frames")]
    EmptyVideo { video: String },
}

/// Errors raised while assembling a [`PredictionSet`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PredictionSetError {
    #[error("prediction set has no models")]
    NoModels,
    #[error("model {model} is missing video {video}")]
    MissingVideo { model: String, video: String },
    #[error("model {model}, video {video}: frame names differ from model {reference}")]
    FrameNameMismatch {
        model: String,
        video: String,
        reference: String,
    },
    #[error("model {model}, video {video}: dimensions {width}x{height} differ from {ref_width}x{ref_height}")]
    DimensionMismatch {
        model: String,
        video: String,
        width: u32,
        height: u32,
        ref_width: u32,
        ref_height: u32,
    },
    #[error("model {model}, video {video}: confidence {value} at frame {frame} is outside [0, 1]")]
    ConfidenceOutOfRange {
        model: String,
        video: String,
        frame: usize,
        value: f64,
    },
    #[error("model {model}, video {video}: {values} confidence values for {frames} frames")]
    ConfidenceCount {
        model: String,
        video: String,
        values: usize,
        frames: usize,
    },
    #[error("confidences reference unknown model {model} or video {video}")]
    ConfidenceUnknownTarget { model: String, video: String },
}

/// One frame's dense label map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskFrame {
    width: u32,
    height: u32,
    labels: Vec<Label>,
}

impl MaskFrame {
    pub fn new(width: u32, height: u32, labels: Vec<Label>) -> Result<Self, MaskError> {
        if width == 0 || height == 0 {
            return Err(MaskError::ZeroDimension { width, height });
        }
        let expected = width as usize * height as usize;
        if labels.len() != expected {
            return Err(MaskError::LengthMismatch {
                expected,
                actual: labels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    /// All-background frame.
    pub fn filled(width: u32, height: u32, label: Label) -> Result<Self, MaskError> {
        let len = width as usize * height as usize;
        Self::new(width, height, vec![label; len])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [Label] {
        &mut self.labels
    }

    #[inline]
    pub fn label_at(&self, x: u32, y: u32) -> Label {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    pub fn same_dimensions(&self, other: &MaskFrame) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn dimension_mismatch(&self, other: &MaskFrame) -> MaskError {
        MaskError::DimensionMismatch {
            a_width: self.width,
            a_height: self.height,
            b_width: other.width,
            b_height: other.height,
        }
    }

    /// Distinct non-background labels, ascending.
    pub fn object_labels(&self) -> Vec<Label> {
        let mut seen = [0u64; (Label::MAX as usize + 1) / 64];
        for &l in &self.labels {
            seen[l as usize / 64] |= 1 << (l % 64);
        }
        let mut out = Vec::new();
        for (block, &bits) in seen.iter().enumerate() {
            let mut bits = bits;
            while bits != 0 {
                let bit = bits.trailing_zeros() as usize;
                let label = (block * 64 + bit) as Label;
                if label != 0 {
                    out.push(label);
                }
                bits &= bits - 1;
            }
        }
        out
    }

    /// Fail if any label exceeds `max`.
    pub fn check_max_label(&self, max: Label) -> Result<(), MaskError> {
        match self.labels.iter().copied().find(|&l| l > max) {
            Some(label) => Err(MaskError::LabelOverflow { label, max }),
            None => Ok(()),
        }
    }

    /// Binary mask selecting one object id.
    pub fn binary(&self, label: Label) -> BinaryMask {
        BinaryMask::from_frame(self, label)
    }
}

/// One object's mask as a packed bitset, one bit per pixel in row-major
/// order. Packing keeps the metric kernels at word granularity: overlap
/// and union reduce to AND/OR plus popcount.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    blocks: Vec<u64>,
}

impl BinaryMask {
    pub fn empty(width: u32, height: u32) -> Self {
        let bits = width as usize * height as usize;
        Self {
            width,
            height,
            blocks: vec![0; bits.div_ceil(64)],
        }
    }

    pub fn from_frame(frame: &MaskFrame, label: Label) -> Self {
        let mut mask = Self::empty(frame.width, frame.height);
        for (i, &l) in frame.labels.iter().enumerate() {
            if l == label {
                mask.blocks[i / 64] |= 1u64 << (i % 64);
            }
        }
        mask
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn same_dimensions(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        let i = y as usize * self.width as usize + x as usize;
        self.blocks[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, x: u32, y: u32) {
        let i = y as usize * self.width as usize + x as usize;
        self.blocks[i / 64] |= 1u64 << (i % 64);
    }

    /// Number of set pixels.
    pub fn count(&self) -> u64 {
        self.blocks.iter().map(|b| b.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    /// `|self AND other|`. Caller guarantees matching dimensions.
    pub fn intersection_count(&self, other: &BinaryMask) -> u64 {
        debug_assert!(self.same_dimensions(other));
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }

    /// `|self OR other|`. Caller guarantees matching dimensions.
    pub fn union_count(&self, other: &BinaryMask) -> u64 {
        debug_assert!(self.same_dimensions(other));
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a | b).count_ones() as u64)
            .sum()
    }
}

/// An ordered sequence of frames for one video.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoSequence {
    video_id: String,
    frames: Vec<MaskFrame>,
    frame_names: Vec<String>,
}

impl VideoSequence {
    pub fn new(
        video_id: String,
        frames: Vec<MaskFrame>,
        frame_names: Vec<String>,
    ) -> Result<Self, MaskError> {
        if frames.is_empty() {
            return Err(MaskError::EmptyVideo { video: video_id });
        }
        if frames.len() != frame_names.len() {
            return Err(MaskError::FrameNameCount {
                video: video_id,
                frames: frames.len(),
                names: frame_names.len(),
            });
        }
        for (i, frame) in frames.iter().enumerate().skip(1) {
            if !frame.same_dimensions(&frames[0]) {
                return Err(frames[0].dimension_mismatch(frame));
            }
            if frame_names[i - 1] >= frame_names[i] {
                return Err(MaskError::FrameOrder {
                    video: video_id,
                    index: i,
                });
            }
        }
        Ok(Self {
            video_id,
            frames,
            frame_names,
        })
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn frames(&self) -> &[MaskFrame] {
        &self.frames
    }

    pub fn frame_names(&self) -> &[String] {
        &self.frame_names
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> u32 {
        self.frames[0].width()
    }

    pub fn height(&self) -> u32 {
        self.frames[0].height()
    }
}

/// Per-model prediction sequences over a shared set of videos, with
/// optional per-frame confidence scores in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    models: Vec<String>,
    videos: BTreeMap<String, BTreeMap<String, VideoSequence>>,
    confidences: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
}

impl PredictionSet {
    /// Build and validate: every model must cover the same videos with the
    /// same frame names and dimensions, and confidences (when present) must
    /// be one value per frame, each in `[0, 1]`.
    pub fn new(
        videos: BTreeMap<String, BTreeMap<String, VideoSequence>>,
        confidences: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
    ) -> Result<Self, PredictionSetError> {
        let models: Vec<String> = videos.keys().cloned().collect();
        let reference = models.first().ok_or(PredictionSetError::NoModels)?.clone();
        let ref_videos = &videos[&reference];

        for model in &models {
            let model_videos = &videos[model];
            for video in ref_videos.keys() {
                if !model_videos.contains_key(video) {
                    return Err(PredictionSetError::MissingVideo {
                        model: model.clone(),
                        video: video.clone(),
                    });
                }
            }
            for (video, seq) in model_videos {
                let Some(ref_seq) = ref_videos.get(video) else {
                    return Err(PredictionSetError::MissingVideo {
                        model: reference.clone(),
                        video: video.clone(),
                    });
                };
                if seq.frame_names() != ref_seq.frame_names() {
                    return Err(PredictionSetError::FrameNameMismatch {
                        model: model.clone(),
                        video: video.clone(),
                        reference: reference.clone(),
                    });
                }
                if seq.width() != ref_seq.width() || seq.height() != ref_seq.height() {
                    return Err(PredictionSetError::DimensionMismatch {
                        model: model.clone(),
                        video: video.clone(),
                        width: seq.width(),
                        height: seq.height(),
                        ref_width: ref_seq.width(),
                        ref_height: ref_seq.height(),
                    });
                }
            }
        }

        for (model, per_video) in &confidences {
            let Some(model_videos) = videos.get(model) else {
                return Err(PredictionSetError::ConfidenceUnknownTarget {
                    model: model.clone(),
                    video: String::new(),
                });
            };
            for (video, values) in per_video {
                let Some(seq) = model_videos.get(video) else {
                    return Err(PredictionSetError::ConfidenceUnknownTarget {
                        model: model.clone(),
                        video: video.clone(),
                    });
                };
                if values.len() != seq.len() {
                    return Err(PredictionSetError::ConfidenceCount {
                        model: model.clone(),
                        video: video.clone(),
                        values: values.len(),
                        frames: seq.len(),
                    });
                }
                for (frame, &value) in values.iter().enumerate() {
                    if !(0.0..=1.0).contains(&value) {
                        return Err(PredictionSetError::ConfidenceOutOfRange {
                            model: model.clone(),
                            video: video.clone(),
                            frame,
                            value,
                        });
                    }
                }
            }
        }

        Ok(Self {
            models,
            videos,
            confidences,
        })
    }

    /// Model ids, ascending.
    pub fn models(&self) -> &[String] {
        &self.models
    }

    /// Video ids, ascending.
    pub fn video_ids(&self) -> Vec<&str> {
        self.videos[&self.models[0]]
            .keys()
            .map(String::as_str)
            .collect()
    }

    pub fn sequence(&self, model: &str, video: &str) -> Option<&VideoSequence> {
        self.videos.get(model)?.get(video)
    }

    pub fn videos_of(&self, model: &str) -> Option<&BTreeMap<String, VideoSequence>> {
        self.videos.get(model)
    }

    /// Per-frame confidence, defaulting to 1.0 for models that reported none.
    pub fn frame_confidence(&self, model: &str, video: &str, frame: usize) -> f64 {
        self.confidences
            .get(model)
            .and_then(|m| m.get(video))
            .and_then(|v| v.get(frame).copied())
            .unwrap_or(1.0)
    }

    pub fn confidences(&self) -> &BTreeMap<String, BTreeMap<String, Vec<f64>>> {
        &self.confidences
    }

    /// Drop all confidence sidecars, leaving the default weight of 1.0.
    pub fn without_confidences(mut self) -> Self {
        self.confidences.clear();
        self
    }
}

/// One finding from [`validate_against_ground_truth`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationFinding {
    /// Video present on one side only.
    MissingVideo { video: String, missing_in: String },
    DimensionMismatch {
        video: String,
        pred_width: u32,
        pred_height: u32,
        gt_width: u32,
        gt_height: u32,
    },
    FrameNameMismatch { video: String, detail: String },
    /// A predicted object id that the first ground-truth frame never
    /// introduced.
    UnknownObject { video: String, label: Label },
}

impl fmt::Display for ValidationFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationFinding::MissingVideo { video, missing_in } => {
                write!(f, "video {video}: missing in {missing_in}")
            }
            ValidationFinding::DimensionMismatch {
                video,
                pred_width,
                pred_height,
                gt_width,
                gt_height,
            } => write!(
                f,
                "video {video}: prediction {pred_width}x{pred_height} vs ground truth {gt_width}x{gt_height}"
            ),
            ValidationFinding::FrameNameMismatch { video, detail } => {
                write!(f, "video {video}: {detail}")
            }
            ValidationFinding::UnknownObject { video, label } => {
                write!(f, "video {video}: predicted object {label} absent from the first ground-truth frame")
            }
        }
    }
}

/// Structural comparison of a prediction set against ground truth.
/// Findings are report entries, not failures.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<ValidationFinding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.findings.is_empty() {
            return write!(f, "no findings");
        }
        for (i, finding) in self.findings.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{finding}")?;
        }
        Ok(())
    }
}

/// Compare prediction layout and object rosters against ground truth.
///
/// Reports per-video dimension and frame-name mismatches, videos missing on
/// either side, and object ids used by any model that the first
/// ground-truth frame never introduced.
pub fn validate_against_ground_truth(
    preds: &PredictionSet,
    gt: &BTreeMap<String, VideoSequence>,
) -> ValidationReport {
    let mut findings = Vec::new();

    let pred_videos: Vec<&str> = preds.video_ids();
    for video in gt.keys() {
        if !pred_videos.iter().any(|v| v == video) {
            findings.push(ValidationFinding::MissingVideo {
                video: video.clone(),
                missing_in: String::from("predictions"),
            });
        }
    }

    for video in &pred_videos {
        let Some(gt_seq) = gt.get(*video) else {
            findings.push(ValidationFinding::MissingVideo {
                video: String::from(*video),
                missing_in: String::from("ground truth"),
            });
            continue;
        };
        // All models share layout by PredictionSet invariant, so the first
        // model stands for all of them.
        let pred_seq = preds
            .sequence(&preds.models()[0], video)
            .expect("validated coverage");
        if pred_seq.width() != gt_seq.width() || pred_seq.height() != gt_seq.height() {
            findings.push(ValidationFinding::DimensionMismatch {
                video: String::from(*video),
                pred_width: pred_seq.width(),
                pred_height: pred_seq.height(),
                gt_width: gt_seq.width(),
                gt_height: gt_seq.height(),
            });
        }
        if pred_seq.frame_names() != gt_seq.frame_names() {
            let detail = if pred_seq.len() != gt_seq.len() {
                alloc::format!(
                    "{} prediction frames vs {} ground-truth frames",
                    pred_seq.len(),
                    gt_seq.len()
                )
            } else {
                String::from("frame names differ")
            };
            findings.push(ValidationFinding::FrameNameMismatch {
                video: String::from(*video),
                detail,
            });
        }

        let mut roster = vec![false; Label::MAX as usize + 1];
        for &l in gt_seq.frames()[0].labels() {
            roster[l as usize] = true;
        }
        let mut reported = vec![false; Label::MAX as usize + 1];
        for model in preds.models() {
            let seq = preds.sequence(model, video).expect("validated coverage");
            for frame in seq.frames() {
                for l in frame.object_labels() {
                    if !roster[l as usize] && !reported[l as usize] {
                        reported[l as usize] = true;
                        findings.push(ValidationFinding::UnknownObject {
                            video: String::from(*video),
                            label: l,
                        });
                    }
                }
            }
        }
    }

    ValidationReport { findings }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(width: u32, height: u32, labels: &[Label]) -> MaskFrame {
        MaskFrame::new(width, height, labels.to_vec()).unwrap()
    }

    #[test]
    fn mask_frame_rejects_bad_length() {
        let err = MaskFrame::new(2, 2, vec![0, 1, 1]).unwrap_err();
        assert_eq!(
            err,
            MaskError::LengthMismatch {
                expected: 4,
                actual: 3
            }
        );
    }

    #[test]
    fn mask_frame_rejects_zero_dimension() {
        assert!(matches!(
            MaskFrame::new(0, 3, vec![]).unwrap_err(),
            MaskError::ZeroDimension { .. }
        ));
    }

    #[test]
    fn object_labels_sorted_distinct() {
        let f = frame(3, 2, &[0, 5, 2, 2, 5, 0]);
        assert_eq!(f.object_labels(), vec![2, 5]);
    }

    #[test]
    fn binary_mask_counts() {
        let f = frame(4, 4, &{
            let mut l = [0u16; 16];
            l[0] = 1;
            l[1] = 1;
            l[4] = 1;
            l[10] = 2;
            l
        });
        let m1 = f.binary(1);
        let m2 = f.binary(2);
        assert_eq!(m1.count(), 3);
        assert_eq!(m2.count(), 1);
        assert_eq!(m1.intersection_count(&m2), 0);
        assert_eq!(m1.union_count(&m2), 4);
        assert!(m1.get(0, 0));
        assert!(!m1.get(2, 2));
        assert!(m2.get(2, 2));
    }

    #[test]
    fn binary_mask_spans_word_boundaries() {
        // 9x9 = 81 pixels > 64, so the mask uses two blocks.
        let mut labels = vec![0u16; 81];
        for l in labels.iter_mut() {
            *l = 1;
        }
        let f = frame(9, 9, &labels);
        assert_eq!(f.binary(1).count(), 81);
        assert!(f.binary(1).get(8, 8));
    }

    #[test]
    fn check_max_label_flags_overflow() {
        let f = frame(1, 1, &[300]);
        assert_eq!(
            f.check_max_label(255).unwrap_err(),
            MaskError::LabelOverflow {
                label: 300,
                max: 255
            }
        );
        assert!(f.check_max_label(300).is_ok());
    }

    #[test]
    fn video_sequence_rejects_unsorted_names() {
        let frames = vec![frame(1, 1, &[0]), frame(1, 1, &[0])];
        let err = VideoSequence::new(
            "v".into(),
            frames,
            vec!["00001".into(), "00001".into()],
        )
        .unwrap_err();
        assert!(matches!(err, MaskError::FrameOrder { .. }));
    }

    #[test]
    fn video_sequence_rejects_mixed_dimensions() {
        let frames = vec![frame(1, 1, &[0]), frame(2, 1, &[0, 0])];
        let err = VideoSequence::new(
            "v".into(),
            frames,
            vec!["00000".into(), "00001".into()],
        )
        .unwrap_err();
        assert!(matches!(err, MaskError::DimensionMismatch { .. }));
    }

    fn seq(id: &str, n: usize, w: u32, h: u32, fill: Label) -> VideoSequence {
        let frames = (0..n).map(|_| MaskFrame::filled(w, h, fill).unwrap()).collect();
        let names = (0..n).map(|i| alloc::format!("{i:05}")).collect();
        VideoSequence::new(id.into(), frames, names).unwrap()
    }

    fn two_model_set() -> BTreeMap<String, BTreeMap<String, VideoSequence>> {
        let mut videos = BTreeMap::new();
        for model in ["a", "b"] {
            let mut per_video = BTreeMap::new();
            per_video.insert("v0".into(), seq("v0", 3, 4, 4, 0));
            videos.insert(model.into(), per_video);
        }
        videos
    }

    #[test]
    fn prediction_set_accepts_consistent_models() {
        let set = PredictionSet::new(two_model_set(), BTreeMap::new()).unwrap();
        assert_eq!(set.models(), ["a", "b"]);
        assert_eq!(set.video_ids(), ["v0"]);
        assert_eq!(set.frame_confidence("a", "v0", 1), 1.0);
    }

    #[test]
    fn prediction_set_rejects_missing_video() {
        let mut videos = two_model_set();
        videos.get_mut("b").unwrap().remove("v0");
        let err = PredictionSet::new(videos, BTreeMap::new()).unwrap_err();
        assert!(matches!(err, PredictionSetError::MissingVideo { .. }));
    }

    #[test]
    fn prediction_set_rejects_confidence_out_of_range() {
        let mut confidences = BTreeMap::new();
        let mut per_video = BTreeMap::new();
        per_video.insert("v0".into(), vec![0.5, 1.7, 0.2]);
        confidences.insert("a".into(), per_video);
        let err = PredictionSet::new(two_model_set(), confidences).unwrap_err();
        assert!(matches!(
            err,
            PredictionSetError::ConfidenceOutOfRange { frame: 1, .. }
        ));
    }

    #[test]
    fn validation_empty_on_identical_layout() {
        let set = PredictionSet::new(two_model_set(), BTreeMap::new()).unwrap();
        let mut gt = BTreeMap::new();
        gt.insert("v0".into(), seq("v0", 3, 4, 4, 0));
        assert!(validate_against_ground_truth(&set, &gt).is_empty());
    }

    #[test]
    fn validation_reports_dimension_mismatch() {
        let set = PredictionSet::new(two_model_set(), BTreeMap::new()).unwrap();
        let mut gt = BTreeMap::new();
        gt.insert("v0".into(), seq("v0", 3, 4, 5, 0));
        let report = validate_against_ground_truth(&set, &gt);
        assert!(report
            .findings
            .iter()
            .any(|f| matches!(f, ValidationFinding::DimensionMismatch { .. })));
    }

    #[test]
    fn validation_reports_unknown_object() {
        // Prediction uses label 7; GT first frame introduces only 1 and 2.
        let mut videos = BTreeMap::new();
        let mut per_video = BTreeMap::new();
        let frames = vec![frame(2, 2, &[0, 7, 0, 0]), frame(2, 2, &[7, 0, 0, 0])];
        per_video.insert(
            "v0".to_string(),
            VideoSequence::new("v0".into(), frames, vec!["00000".into(), "00001".into()])
                .unwrap(),
        );
        videos.insert("a".to_string(), per_video);
        let set = PredictionSet::new(videos, BTreeMap::new()).unwrap();

        let gt_frames = vec![frame(2, 2, &[1, 2, 0, 0]), frame(2, 2, &[1, 2, 0, 0])];
        let mut gt = BTreeMap::new();
        gt.insert(
            "v0".to_string(),
            VideoSequence::new("v0".into(), gt_frames, vec!["00000".into(), "00001".into()])
                .unwrap(),
        );

        let report = validate_against_ground_truth(&set, &gt);
        assert_eq!(
            report.findings,
            vec![ValidationFinding::UnknownObject {
                video: "v0".into(),
                label: 7
            }]
        );
    }
}
