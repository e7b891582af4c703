//! Ensemble fusion of per-model mask frames into pseudo-labels.
//!
//! The full pipeline runs three steps per frame: classify every pixel by
//! inter-model agreement (consistency check), derive per-model weights
//! from historical performance and frame confidence (confidence
//! weighting), and resolve disputed pixels by weighted vote. Two coarser
//! baselines fuse at bounding-box granularity instead: per object, average
//! the models' boxes or take their union box, then rasterize.
//!
//! All pixel-level rules are permutation-invariant in the model order:
//! ties break on the smallest label value, never on input position.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::features::FeatureBucket;
use crate::mask::{BinaryMask, Label, MaskError, MaskFrame, PredictionSet};
use crate::selection::PerformanceDB;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FusionError {
    #[error("fusion needs at least {needed} input frame(s), got {got}")]
    EmptyInput { needed: usize, got: usize },
    #[error("frame {index} is {got_width}x{got_height}, expected {width}x{height}")]
    DimensionMismatch {
        index: usize,
        width: u32,
        height: u32,
        got_width: u32,
        got_height: u32,
    },
    #[error("model {model} has negative confidence {value}")]
    NegativeConfidence { model: String, value: f64 },
    #[error("model {model} has negative weight {value}")]
    NegativeWeight { model: String, value: f64 },
    #[error("all model weights are zero")]
    AllWeightsZero,
    #[error("no weight recorded for model {model}")]
    MissingWeight { model: String },
    #[error("{weights} weights for {frames} frames")]
    WeightCount { weights: usize, frames: usize },
    #[error(transparent)]
    Mask(#[from] MaskError),
}

/// How a pseudo-label frame is produced from the models' frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionMethod {
    /// Single-step weighted pixel vote.
    Vote,
    /// Per-object average of the models' bounding boxes, rasterized.
    AvgBbox,
    /// Per-object union bounding box, rasterized.
    MaxBbox,
    /// Consistency check, confidence weighting, then vote on conflicts.
    Pgmr,
}

impl FusionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FusionMethod::Vote => "vote",
            FusionMethod::AvgBbox => "avg-bbox",
            FusionMethod::MaxBbox => "max-bbox",
            FusionMethod::Pgmr => "pgmr",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "vote" => FusionMethod::Vote,
            "avg-bbox" => FusionMethod::AvgBbox,
            "max-bbox" => FusionMethod::MaxBbox,
            "pgmr" => FusionMethod::Pgmr,
            _ => return None,
        })
    }
}

/// Non-negative per-model weights with at least one positive entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    weights: BTreeMap<String, f64>,
}

impl ModelWeights {
    pub fn uniform(models: &[String]) -> Self {
        ModelWeights {
            weights: models.iter().map(|m| (m.clone(), 1.0)).collect(),
        }
    }

    pub fn from_map(weights: BTreeMap<String, f64>) -> Result<Self, FusionError> {
        let mut any_positive = false;
        for (model, &w) in &weights {
            if w < 0.0 || !w.is_finite() {
                return Err(FusionError::NegativeWeight {
                    model: model.clone(),
                    value: w,
                });
            }
            any_positive |= w > 0.0;
        }
        if weights.is_empty() || !any_positive {
            return Err(FusionError::AllWeightsZero);
        }
        Ok(ModelWeights { weights })
    }

    pub fn get(&self, model: &str) -> Option<f64> {
        self.weights.get(model).copied()
    }

    /// Weights rescaled to sum to 1.
    pub fn normalized(&self) -> BTreeMap<String, f64> {
        let total: f64 = self.weights.values().sum();
        self.weights
            .iter()
            .map(|(m, w)| (m.clone(), w / total))
            .collect()
    }

    /// Normalized weights in the order of `models`, one per model.
    pub fn aligned(&self, models: &[String]) -> Result<Vec<f64>, FusionError> {
        let total: f64 = self.weights.values().sum();
        models
            .iter()
            .map(|m| {
                self.weights
                    .get(m)
                    .map(|w| w / total)
                    .ok_or_else(|| FusionError::MissingWeight { model: m.clone() })
            })
            .collect()
    }
}

/// Combine historical bucket means and per-frame confidences into model
/// weights: weight = historical × confidence, with either factor
/// defaulting to 1.0 when absent. An all-zero product falls back to
/// uniform weights so the vote stays defined.
pub fn confidence_weights(
    historical: Option<&BTreeMap<String, f64>>,
    confidences: &BTreeMap<String, f64>,
    models: &[String],
) -> Result<ModelWeights, FusionError> {
    let mut weights = BTreeMap::new();
    let mut any_positive = false;
    for model in models {
        let confidence = confidences.get(model).copied().unwrap_or(1.0);
        if confidence < 0.0 || !confidence.is_finite() {
            return Err(FusionError::NegativeConfidence {
                model: model.clone(),
                value: confidence,
            });
        }
        let history = historical
            .and_then(|h| h.get(model))
            .copied()
            .unwrap_or(1.0);
        let w = history * confidence;
        any_positive |= w > 0.0;
        weights.insert(model.clone(), w);
    }
    if !any_positive {
        return Ok(ModelWeights::uniform(models));
    }
    ModelWeights::from_map(weights)
}

/// Agreement classification of one pixel.
#[derive(Debug, Clone, PartialEq)]
pub enum PixelConsistency {
    /// Every model emitted this label.
    Unanimous(Label),
    /// This label's normalized weighted share exceeds 0.5.
    Majority(Label, f64),
    /// No label holds a strict weighted majority; shares by label.
    Conflict(Vec<(Label, f64)>),
}

/// Fractions of a frame's pixels in each agreement state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyFractions {
    pub unanimous: f64,
    pub majority: f64,
    pub conflict: f64,
}

/// Per-pixel agreement classification of one frame position across models.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyMap {
    width: u32,
    height: u32,
    pixels: Vec<PixelConsistency>,
}

impl ConsistencyMap {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[PixelConsistency] {
        &self.pixels
    }

    pub fn fractions(&self) -> ConsistencyFractions {
        let mut unanimous = 0usize;
        let mut majority = 0usize;
        let mut conflict = 0usize;
        for pixel in &self.pixels {
            match pixel {
                PixelConsistency::Unanimous(_) => unanimous += 1,
                PixelConsistency::Majority(..) => majority += 1,
                PixelConsistency::Conflict(_) => conflict += 1,
            }
        }
        let total = self.pixels.len() as f64;
        ConsistencyFractions {
            unanimous: unanimous as f64 / total,
            majority: majority as f64 / total,
            conflict: conflict as f64 / total,
        }
    }

    fn all_unanimous(frame: &MaskFrame) -> Self {
        ConsistencyMap {
            width: frame.width(),
            height: frame.height(),
            pixels: frame
                .labels()
                .iter()
                .map(|&l| PixelConsistency::Unanimous(l))
                .collect(),
        }
    }
}

fn check_frames(
    frames: &[&MaskFrame],
    weights: &[f64],
    min_frames: usize,
) -> Result<(), FusionError> {
    if frames.len() < min_frames {
        return Err(FusionError::EmptyInput {
            needed: min_frames,
            got: frames.len(),
        });
    }
    let (width, height) = (frames[0].width(), frames[0].height());
    for (index, frame) in frames.iter().enumerate() {
        if frame.width() != width || frame.height() != height {
            return Err(FusionError::DimensionMismatch {
                index,
                width,
                height,
                got_width: frame.width(),
                got_height: frame.height(),
            });
        }
    }
    if weights.len() != frames.len() {
        return Err(FusionError::WeightCount {
            weights: weights.len(),
            frames: frames.len(),
        });
    }
    Ok(())
}

/// Weighted label shares at one pixel, ascending by label. `weights` must
/// be normalized. Contributions are accumulated in a canonical order
/// (label, then weight), so the floating-point sums — and therefore every
/// tie decision — are identical under any permutation of the models.
fn pixel_shares(frames: &[&MaskFrame], weights: &[f64], idx: usize) -> Vec<(Label, f64)> {
    let mut pairs: Vec<(Label, f64)> = frames
        .iter()
        .zip(weights)
        .map(|(frame, &w)| (frame.labels()[idx], w))
        .collect();
    pairs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut shares: Vec<(Label, f64)> = Vec::with_capacity(pairs.len());
    for (label, w) in pairs {
        match shares.last_mut() {
            Some((l, acc)) if *l == label => *acc += w,
            _ => shares.push((label, w)),
        }
    }
    shares
}

/// Winning label among shares: maximum share, ties to the smallest label.
/// Ascending label order makes "first strict maximum" exactly that rule.
fn winning_label(shares: &[(Label, f64)]) -> (Label, f64) {
    let mut best = shares[0];
    for &(label, share) in &shares[1..] {
        if share > best.1 {
            best = (label, share);
        }
    }
    best
}

/// Classify every pixel by weighted inter-model agreement.
///
/// Needs at least two model frames; weights are positional, one per frame,
/// and are normalized internally. Unanimity is a statement about the
/// models, not the weights: all frames must carry the same label.
pub fn consistency_map(
    frames: &[&MaskFrame],
    weights: &[f64],
) -> Result<ConsistencyMap, FusionError> {
    check_frames(frames, weights, 2)?;
    let normalized = normalize(weights)?;
    let pixel_count = frames[0].pixel_count();
    let mut pixels = Vec::with_capacity(pixel_count);
    for idx in 0..pixel_count {
        let first = frames[0].labels()[idx];
        if frames[1..].iter().all(|f| f.labels()[idx] == first) {
            pixels.push(PixelConsistency::Unanimous(first));
            continue;
        }
        let shares = pixel_shares(frames, &normalized, idx);
        let (label, share) = winning_label(&shares);
        if share > 0.5 {
            pixels.push(PixelConsistency::Majority(label, share));
        } else {
            pixels.push(PixelConsistency::Conflict(shares));
        }
    }
    Ok(ConsistencyMap {
        width: frames[0].width(),
        height: frames[0].height(),
        pixels,
    })
}

fn normalize(weights: &[f64]) -> Result<Vec<f64>, FusionError> {
    for (index, &w) in weights.iter().enumerate() {
        if w < 0.0 || !w.is_finite() {
            return Err(FusionError::NegativeWeight {
                model: alloc::format!("#{index}"),
                value: w,
            });
        }
    }
    // Sum in ascending order so the total — and thus each normalized
    // weight — does not depend on how the callers ordered the models.
    let mut sorted = weights.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total: f64 = sorted.iter().sum();
    if total <= 0.0 {
        return Err(FusionError::AllWeightsZero);
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

/// Per pixel, the label with the maximum weighted share wins; ties break
/// to the smallest label value. Background (0) competes like any label.
pub fn weighted_pixel_vote(
    frames: &[&MaskFrame],
    weights: &[f64],
) -> Result<MaskFrame, FusionError> {
    check_frames(frames, weights, 1)?;
    let normalized = normalize(weights)?;
    let pixel_count = frames[0].pixel_count();
    let mut labels = Vec::with_capacity(pixel_count);
    for idx in 0..pixel_count {
        let shares = pixel_shares(frames, &normalized, idx);
        labels.push(winning_label(&shares).0);
    }
    Ok(MaskFrame::new(frames[0].width(), frames[0].height(), labels)?)
}

/// Tightest axis-aligned box around a mask's set pixels; all coordinates
/// inclusive. `None` for an empty mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BBox {
    pub top: u32,
    pub left: u32,
    pub bottom: u32,
    pub right: u32,
}

impl BBox {
    pub fn area(&self) -> u64 {
        (self.bottom - self.top + 1) as u64 * (self.right - self.left + 1) as u64
    }

    pub fn contains(&self, other: &BBox) -> bool {
        self.top <= other.top
            && self.left <= other.left
            && self.bottom >= other.bottom
            && self.right >= other.right
    }
}

pub fn bounding_box(mask: &BinaryMask) -> Option<BBox> {
    let mut bbox: Option<BBox> = None;
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) {
                bbox = Some(match bbox {
                    None => BBox {
                        top: y,
                        left: x,
                        bottom: y,
                        right: x,
                    },
                    Some(b) => BBox {
                        top: b.top.min(y),
                        left: b.left.min(x),
                        bottom: b.bottom.max(y),
                        right: b.right.max(x),
                    },
                });
            }
        }
    }
    bbox
}

/// Integer mean with half-up rounding, in integer arithmetic.
fn mean_round_half_up(sum: u64, n: u64) -> u32 {
    ((2 * sum + n) / (2 * n)) as u32
}

enum BoxRule {
    Average,
    Union,
}

fn bbox_fusion(frames: &[&MaskFrame], rule: BoxRule) -> Result<MaskFrame, FusionError> {
    let uniform = alloc::vec![1.0; frames.len()];
    check_frames(frames, &uniform, 1)?;
    let (width, height) = (frames[0].width(), frames[0].height());

    let mut roster: BTreeSet<Label> = BTreeSet::new();
    for frame in frames {
        roster.extend(frame.object_labels());
    }

    let mut boxes: Vec<(Label, BBox)> = Vec::new();
    for &label in &roster {
        let contributing: Vec<BBox> = frames
            .iter()
            .filter_map(|f| bounding_box(&f.binary(label)))
            .collect();
        if contributing.is_empty() {
            continue;
        }
        let fused = match rule {
            BoxRule::Average => {
                let n = contributing.len() as u64;
                let sum = contributing.iter().fold((0u64, 0u64, 0u64, 0u64), |c, b| {
                    (
                        c.0 + b.top as u64,
                        c.1 + b.left as u64,
                        c.2 + b.bottom as u64,
                        c.3 + b.right as u64,
                    )
                });
                BBox {
                    top: mean_round_half_up(sum.0, n).min(height - 1),
                    left: mean_round_half_up(sum.1, n).min(width - 1),
                    bottom: mean_round_half_up(sum.2, n).min(height - 1),
                    right: mean_round_half_up(sum.3, n).min(width - 1),
                }
            }
            BoxRule::Union => contributing[1..]
                .iter()
                .fold(contributing[0], |acc, b| BBox {
                    top: acc.top.min(b.top),
                    left: acc.left.min(b.left),
                    bottom: acc.bottom.max(b.bottom),
                    right: acc.right.max(b.right),
                }),
        };
        boxes.push((label, fused));
    }

    // Paint large boxes first so small objects end up on top; equal areas
    // paint the larger label first, keeping the smallest-label-wins rule.
    boxes.sort_by(|a, b| {
        b.1.area()
            .cmp(&a.1.area())
            .then_with(|| b.0.cmp(&a.0))
    });

    let mut labels = alloc::vec![0 as Label; (width * height) as usize];
    for (label, bbox) in boxes {
        for y in bbox.top..=bbox.bottom {
            let row = (y * width) as usize;
            for x in bbox.left..=bbox.right {
                labels[row + x as usize] = label;
            }
        }
    }
    Ok(MaskFrame::new(width, height, labels)?)
}

/// Per object, average the contributing models' box coordinates (half-up)
/// and rasterize, smaller boxes on top.
pub fn average_bbox_fusion(frames: &[&MaskFrame]) -> Result<MaskFrame, FusionError> {
    bbox_fusion(frames, BoxRule::Average)
}

/// Per object, rasterize the union-enclosing box over contributing models,
/// smaller boxes on top.
pub fn max_bbox_fusion(frames: &[&MaskFrame]) -> Result<MaskFrame, FusionError> {
    bbox_fusion(frames, BoxRule::Union)
}

/// Fused pseudo-label sequences plus agreement annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLabelSet {
    pub videos: BTreeMap<String, VideoSeq>,
    /// Full per-pixel maps, retained for the three-step method only.
    pub consistency: BTreeMap<String, Vec<ConsistencyMap>>,
    /// Per-frame agreement fractions, kept for every method.
    pub summaries: BTreeMap<String, Vec<ConsistencyFractions>>,
    pub method: FusionMethod,
}

use crate::mask::VideoSequence as VideoSeq;

/// Fuse every video of a prediction set into pseudo-labels.
///
/// For [`FusionMethod::Pgmr`], each frame runs the full pipeline: model
/// weights come from the performance history (bucketed by the features of
/// a provisional uniform vote of the frame) times the models' frame
/// confidences; unanimous and majority pixels keep their agreed label and
/// conflicting pixels are resolved by weighted vote. [`FusionMethod::Vote`]
/// votes with confidence-derived weights alone, and the box methods ignore
/// weights entirely.
pub fn build_pseudo_labels(
    preds: &PredictionSet,
    db: Option<&PerformanceDB>,
    method: FusionMethod,
) -> Result<PseudoLabelSet, FusionError> {
    let models = preds.models();
    if models.is_empty() {
        return Err(FusionError::EmptyInput { needed: 1, got: 0 });
    }
    let mut videos = BTreeMap::new();
    let mut consistency = BTreeMap::new();
    let mut summaries = BTreeMap::new();

    for video in preds.video_ids() {
        let sequences: Vec<&VideoSeq> = models
            .iter()
            .map(|m| preds.sequence(m, &video).expect("validated coverage"))
            .collect();
        let frame_count = sequences[0].len();
        let mut fused_frames = Vec::with_capacity(frame_count);
        let mut maps = Vec::new();
        let mut fractions = Vec::with_capacity(frame_count);

        for t in 0..frame_count {
            let frames: Vec<&MaskFrame> = sequences.iter().map(|s| &s.frames()[t]).collect();
            let uniform = alloc::vec![1.0 / frames.len() as f64; frames.len()];

            match method {
                FusionMethod::Vote => {
                    let weights = frame_weights(preds, None, models, &video, t, &frames)?;
                    fused_frames.push(weighted_pixel_vote(&frames, &weights)?);
                    fractions.push(agreement_fractions(&frames, &weights)?);
                }
                FusionMethod::AvgBbox => {
                    fused_frames.push(average_bbox_fusion(&frames)?);
                    fractions.push(agreement_fractions(&frames, &uniform)?);
                }
                FusionMethod::MaxBbox => {
                    fused_frames.push(max_bbox_fusion(&frames)?);
                    fractions.push(agreement_fractions(&frames, &uniform)?);
                }
                FusionMethod::Pgmr => {
                    let weights = frame_weights(preds, db, models, &video, t, &frames)?;
                    if frames.len() == 1 {
                        let map = ConsistencyMap::all_unanimous(frames[0]);
                        fractions.push(map.fractions());
                        maps.push(map);
                        fused_frames.push(frames[0].clone());
                        continue;
                    }
                    let map = consistency_map(&frames, &weights)?;
                    let mut labels = Vec::with_capacity(frames[0].pixel_count());
                    for (idx, pixel) in map.pixels().iter().enumerate() {
                        let label = match pixel {
                            PixelConsistency::Unanimous(l) => *l,
                            PixelConsistency::Majority(l, _) => *l,
                            PixelConsistency::Conflict(_) => {
                                let shares = pixel_shares(&frames, &weights, idx);
                                winning_label(&shares).0
                            }
                        };
                        labels.push(label);
                    }
                    fused_frames
                        .push(MaskFrame::new(frames[0].width(), frames[0].height(), labels)?);
                    fractions.push(map.fractions());
                    maps.push(map);
                }
            }
        }

        let names = sequences[0].frame_names().to_vec();
        videos.insert(
            String::from(video),
            VideoSeq::new(String::from(video), fused_frames, names)?,
        );
        if method == FusionMethod::Pgmr {
            consistency.insert(String::from(video), maps);
        }
        summaries.insert(String::from(video), fractions);
    }

    Ok(PseudoLabelSet {
        videos,
        consistency,
        summaries,
        method,
    })
}

/// Normalized positional weights for one frame: historical bucket means
/// (when a database is supplied) times per-frame confidences.
fn frame_weights(
    preds: &PredictionSet,
    db: Option<&PerformanceDB>,
    models: &[String],
    video: &str,
    t: usize,
    frames: &[&MaskFrame],
) -> Result<Vec<f64>, FusionError> {
    let confidences: BTreeMap<String, f64> = models
        .iter()
        .map(|m| (m.clone(), preds.frame_confidence(m, video, t)))
        .collect();
    let historical = match db {
        None => None,
        Some(db) => {
            // Bucket the frame by the features of a provisional uniform
            // vote, so the lookup does not depend on any one model.
            let uniform = alloc::vec![1.0; frames.len()];
            let provisional = weighted_pixel_vote(frames, &uniform)?;
            let features = crate::features::extract_features(&provisional);
            let bucket = FeatureBucket::from_features(&features, db.complexity_median());
            Some(db.bucket_means(&bucket))
        }
    };
    confidence_weights(historical.as_ref(), &confidences, models)?.aligned(models)
}

/// Agreement fractions of one frame without retaining the per-pixel map.
fn agreement_fractions(
    frames: &[&MaskFrame],
    weights: &[f64],
) -> Result<ConsistencyFractions, FusionError> {
    if frames.len() == 1 {
        return Ok(ConsistencyFractions {
            unanimous: 1.0,
            majority: 0.0,
            conflict: 0.0,
        });
    }
    Ok(consistency_map(frames, weights)?.fractions())
}
