//! Deterministic synthetic benchmark: ground-truth sequences of moving,
//! occluding, disappearing shapes, plus degraded "model" predictions with
//! controllable noise, and a brute-force selection oracle.
//!
//! Everything is a pure function of the configuration and seed. Each video
//! draws from its own generator stream (the global seed mixed with the
//! video index), so videos can be produced in any order or in parallel
//! with identical results.
//!
//! Layout guarantees: every object is assigned a horizontal lane sized so
//! shapes from different lanes never touch; with occlusion and
//! disappearance rates at zero, every object is therefore visible in every
//! frame. Occlusion events teleport a later-labeled object onto an
//! earlier-labeled victim for a few frames (painting order makes the later
//! label win). Disappearance hides an object for a span that always ends
//! before the last frame, so hidden objects reappear. Frame 0 is always
//! event-free: it is the annotation frame that defines the object roster.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::mask::{Label, MaskError, MaskFrame, PredictionSet, PredictionSetError, VideoSequence};
use crate::metrics::MetricConfig;
use crate::rng::{stream_seed, Xoshiro256StarStar};
use crate::selection::score_against_pseudo;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid generator config: {reason}")]
    ConfigInvalid { reason: String },
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    PredictionSet(#[from] PredictionSetError),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Rectangle,
    Ellipse,
}

/// Parameters of the ground-truth generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub videos: usize,
    pub frames_per_video: usize,
    pub width: u32,
    pub height: u32,
    pub objects_min: usize,
    pub objects_max: usize,
    pub shape_kinds: Vec<ShapeKind>,
    /// Per-frame probability of starting an occlusion event.
    pub occlusion_rate: f64,
    /// Per-object probability of one disappearance span.
    pub disappear_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            videos: 4,
            frames_per_video: 12,
            width: 64,
            height: 64,
            objects_min: 2,
            objects_max: 4,
            shape_kinds: alloc::vec![ShapeKind::Rectangle, ShapeKind::Ellipse],
            occlusion_rate: 0.25,
            disappear_rate: 0.3,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |reason: String| Err(SynthError::ConfigInvalid { reason });
        if self.videos == 0 || self.frames_per_video == 0 {
            return fail("videos and frames_per_video must be at least 1".into());
        }
        if self.objects_min == 0 || self.objects_min > self.objects_max {
            return fail(alloc::format!(
                "object count range {}..={} must start at 1 or more and not be empty",
                self.objects_min,
                self.objects_max
            ));
        }
        if self.objects_max > 32 {
            return fail("more than 32 objects per video is unsupported".into());
        }
        if self.width < 8 {
            return fail(alloc::format!("width {} is below the 8-pixel minimum", self.width));
        }
        if self.height < 6 * self.objects_max as u32 {
            return fail(alloc::format!(
                "height {} cannot fit {} object lanes of 6 pixels",
                self.height,
                self.objects_max
            ));
        }
        for (name, p) in [
            ("occlusion_rate", self.occlusion_rate),
            ("disappear_rate", self.disappear_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return fail(alloc::format!("{name} {p} is not a probability"));
            }
        }
        if self.shape_kinds.is_empty() {
            return fail("at least one shape kind is required".into());
        }
        Ok(())
    }
}

/// Degradation parameters for one synthetic "model".
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseProfile {
    pub model: String,
    /// Radius of random dilation/erosion applied to object boundaries.
    pub boundary_jitter: u32,
    /// Probability that an object vanishes from a prediction frame.
    pub drop_object_prob: f64,
    /// Probability per frame that two object labels are exchanged.
    pub label_swap_prob: f64,
    /// Standard deviation of the per-object translation, in pixels.
    pub translation_sigma: f64,
}

impl NoiseProfile {
    /// A profile that reproduces its input exactly.
    pub fn clean(model: &str) -> Self {
        NoiseProfile {
            model: String::from(model),
            boundary_jitter: 0,
            drop_object_prob: 0.0,
            label_swap_prob: 0.0,
            translation_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |reason: String| Err(SynthError::ConfigInvalid { reason });
        if self.model.is_empty() {
            return fail("profile model id must be non-empty".into());
        }
        if self.boundary_jitter > 8 {
            return fail(alloc::format!(
                "boundary_jitter {} exceeds the supported radius 8",
                self.boundary_jitter
            ));
        }
        for (name, p) in [
            ("drop_object_prob", self.drop_object_prob),
            ("label_swap_prob", self.label_swap_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return fail(alloc::format!("{name} {p} is not a probability"));
            }
        }
        if !(self.translation_sigma >= 0.0 && self.translation_sigma.is_finite()) {
            return fail(alloc::format!(
                "translation_sigma {} must be a non-negative real",
                self.translation_sigma
            ));
        }
        Ok(())
    }
}

fn fnv1a(s: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in s.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn round_i64(x: f64) -> i64 {
    if x >= 0.0 {
        (x + 0.5) as i64
    } else {
        -((-x + 0.5) as i64)
    }
}

struct ObjectSpec {
    label: Label,
    kind: ShapeKind,
    half_w: i64,
    half_h: i64,
    waypoints: Vec<(f64, f64)>,
    /// Inclusive frame span during which the object is hidden.
    hidden: Option<(usize, usize)>,
}

impl ObjectSpec {
    fn hidden_at(&self, t: usize) -> bool {
        matches!(self.hidden, Some((a, b)) if (a..=b).contains(&t))
    }

    fn center_at(&self, t: usize, frames: usize) -> (f64, f64) {
        let m = self.waypoints.len();
        if m == 1 || frames == 1 {
            return self.waypoints[0];
        }
        let u = t as f64 * (m - 1) as f64 / (frames - 1) as f64;
        let seg = (u as usize).min(m - 2);
        let frac = u - seg as f64;
        let (x0, y0) = self.waypoints[seg];
        let (x1, y1) = self.waypoints[seg + 1];
        (x0 + (x1 - x0) * frac, y0 + (y1 - y0) * frac)
    }
}

fn paint_shape(
    labels: &mut [Label],
    width: i64,
    height: i64,
    obj: &ObjectSpec,
    cx: i64,
    cy: i64,
) {
    let (hw, hh) = (obj.half_w, obj.half_h);
    for y in (cy - hh).max(0)..=(cy + hh).min(height - 1) {
        for x in (cx - hw).max(0)..=(cx + hw).min(width - 1) {
            let inside = match obj.kind {
                ShapeKind::Rectangle => true,
                ShapeKind::Ellipse => {
                    let dx = x - cx;
                    let dy = y - cy;
                    dx * dx * hh * hh + dy * dy * hw * hw <= hw * hw * hh * hh
                }
            };
            if inside {
                labels[(y * width + x) as usize] = obj.label;
            }
        }
    }
}

/// Generate one video's ground truth. `index` selects the video's own
/// generator stream, so callers may produce videos in any order.
pub fn generate_video(
    cfg: &SynthConfig,
    index: usize,
) -> Result<(String, VideoSequence), SynthError> {
    cfg.validate()?;
    let video_id = alloc::format!("video_{index:03}");
    let mut rng = Xoshiro256StarStar::seed_from_u64(stream_seed(cfg.seed, index as u64));
    let frames_n = cfg.frames_per_video;
    let (w, h) = (cfg.width as i64, cfg.height as i64);

    let n_objects = rng.gen_range(cfg.objects_min as u64, cfg.objects_max as u64) as usize;
    let lane_h = h / n_objects as i64;

    let mut objects = Vec::with_capacity(n_objects);
    for k in 0..n_objects {
        let kind = *rng.choose(&cfg.shape_kinds);
        let half_w_max = (w / 6).max(2);
        let half_w = rng.gen_range(1, half_w_max as u64) as i64;
        let half_h_max = ((lane_h - 2) / 2).max(1);
        let half_h = rng.gen_range(1, half_h_max as u64) as i64;

        let lane_top = k as i64 * lane_h;
        let y_lo = lane_top + half_h;
        let y_hi = lane_top + lane_h - 1 - half_h;
        let x_lo = half_w;
        let x_hi = w - 1 - half_w;

        let waypoint_count = (frames_n / 6).max(2);
        let waypoints = (0..waypoint_count)
            .map(|_| {
                let x = rng.gen_range(x_lo as u64, x_hi as u64) as f64;
                let y = if y_hi > y_lo {
                    rng.gen_range(y_lo as u64, y_hi as u64) as f64
                } else {
                    y_lo as f64
                };
                (x, y)
            })
            .collect();

        let hidden = if frames_n >= 3 && rng.gen_bool(cfg.disappear_rate) {
            let start = rng.gen_range(1, (frames_n - 2) as u64) as usize;
            let end = rng.gen_range(start as u64, (frames_n - 2) as u64) as usize;
            Some((start, end))
        } else {
            None
        };

        objects.push(ObjectSpec {
            label: (k + 1) as Label,
            kind,
            half_w,
            half_h,
            waypoints,
            hidden,
        });
    }

    // Occlusion events: from frame 2 on, a later-labeled object may jump
    // onto an earlier one for a short span. Painting order does the rest.
    let mut excursions: Vec<BTreeMap<usize, usize>> = alloc::vec![BTreeMap::new(); frames_n];
    if n_objects >= 2 && frames_n >= 3 {
        for t in 2..frames_n {
            if rng.gen_bool(cfg.occlusion_rate) {
                let victim = rng.gen_range(0, n_objects as u64 - 2) as usize;
                let occluder = rng.gen_range(victim as u64 + 1, n_objects as u64 - 1) as usize;
                let span = rng.gen_range(1, 3) as usize;
                for f in t..(t + span).min(frames_n) {
                    excursions[f].insert(occluder, victim);
                }
            }
        }
    }

    let mut frames = Vec::with_capacity(frames_n);
    for t in 0..frames_n {
        let mut labels = alloc::vec![0 as Label; (w * h) as usize];
        for (k, obj) in objects.iter().enumerate() {
            if obj.hidden_at(t) {
                continue;
            }
            let (cx, cy) = match excursions[t].get(&k) {
                Some(&victim) if !objects[victim].hidden_at(t) => {
                    objects[victim].center_at(t, frames_n)
                }
                _ => obj.center_at(t, frames_n),
            };
            paint_shape(&mut labels, w, h, obj, round_i64(cx), round_i64(cy));
        }
        frames.push(MaskFrame::new(cfg.width, cfg.height, labels)?);
    }

    let names = (0..frames_n).map(|i| alloc::format!("{i:05}")).collect();
    Ok((video_id.clone(), VideoSequence::new(video_id, frames, names)?))
}

/// Generate the whole ground-truth benchmark.
pub fn generate_sequence(cfg: &SynthConfig) -> Result<BTreeMap<String, VideoSequence>, SynthError> {
    cfg.validate()?;
    let mut out = BTreeMap::new();
    for index in 0..cfg.videos {
        let (id, seq) = generate_video(cfg, index)?;
        out.insert(id, seq);
    }
    Ok(out)
}

fn translate_mask(mask: &crate::mask::BinaryMask, dx: i64, dy: i64) -> crate::mask::BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let mut out = crate::mask::BinaryMask::empty(w, h);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let sx = x - dx;
            let sy = y - dy;
            if sx >= 0
                && sy >= 0
                && (sx as u32) < w
                && (sy as u32) < h
                && mask.get(sx as u32, sy as u32)
            {
                out.set(x as u32, y as u32);
            }
        }
    }
    out
}

fn morph(mask: &crate::mask::BinaryMask, radius: i64, dilate: bool) -> crate::mask::BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let mut out = crate::mask::BinaryMask::empty(w, h);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut any = false;
            let mut all = true;
            for ny in (y - radius).max(0)..=(y + radius).min(h as i64 - 1) {
                for nx in (x - radius).max(0)..=(x + radius).min(w as i64 - 1) {
                    if mask.get(nx as u32, ny as u32) {
                        any = true;
                    } else {
                        all = false;
                    }
                }
            }
            let value = if dilate { any } else { all };
            if value {
                out.set(x as u32, y as u32);
            }
        }
    }
    out
}

fn degrade_frame(
    frame: &MaskFrame,
    profile: &NoiseProfile,
    rng: &mut Xoshiro256StarStar,
) -> Result<MaskFrame, SynthError> {
    let (w, h) = (frame.width(), frame.height());
    let mut labels = alloc::vec![0 as Label; frame.pixel_count()];
    for label in frame.object_labels() {
        let mut mask = frame.binary(label);
        if profile.translation_sigma > 0.0 {
            let dx = round_i64(rng.gauss() * profile.translation_sigma);
            let dy = round_i64(rng.gauss() * profile.translation_sigma);
            if dx != 0 || dy != 0 {
                mask = translate_mask(&mask, dx, dy);
            }
        }
        if profile.boundary_jitter > 0 {
            let radius = rng.gen_range(0, profile.boundary_jitter as u64) as i64;
            if radius > 0 {
                let dilate = rng.gen_bool(0.5);
                mask = morph(&mask, radius, dilate);
            }
        }
        if rng.gen_bool(profile.drop_object_prob) {
            continue;
        }
        for y in 0..h {
            for x in 0..w {
                if mask.get(x, y) {
                    labels[(y * w + x) as usize] = label;
                }
            }
        }
    }

    if rng.gen_bool(profile.label_swap_prob) {
        let present: Vec<Label> = MaskFrame::new(w, h, labels.clone())?.object_labels();
        if present.len() >= 2 {
            let i = rng.gen_range(0, present.len() as u64 - 1) as usize;
            let mut j = rng.gen_range(0, present.len() as u64 - 2) as usize;
            if j >= i {
                j += 1;
            }
            let (a, b) = (present[i], present[j]);
            for pixel in labels.iter_mut() {
                if *pixel == a {
                    *pixel = b;
                } else if *pixel == b {
                    *pixel = a;
                }
            }
        }
    }

    Ok(MaskFrame::new(w, h, labels)?)
}

/// Degrade the ground truth once per profile, producing one synthetic
/// "model" per profile. Each (model, video) pair draws from its own
/// stream, so model and video order never affect the output.
pub fn synthesize_predictions(
    gt: &BTreeMap<String, VideoSequence>,
    profiles: &[NoiseProfile],
    seed: u64,
) -> Result<PredictionSet, SynthError> {
    if profiles.is_empty() {
        return Err(SynthError::ConfigInvalid {
            reason: "at least one noise profile is required".into(),
        });
    }
    let mut seen = alloc::collections::BTreeSet::new();
    for profile in profiles {
        profile.validate()?;
        if !seen.insert(profile.model.clone()) {
            return Err(SynthError::ConfigInvalid {
                reason: alloc::format!("duplicate model id {}", profile.model),
            });
        }
    }

    let mut videos = BTreeMap::new();
    for profile in profiles {
        let model_seed = stream_seed(seed, fnv1a(&profile.model));
        let mut model_videos = BTreeMap::new();
        for (video_id, sequence) in gt {
            let mut rng =
                Xoshiro256StarStar::seed_from_u64(stream_seed(model_seed, fnv1a(video_id)));
            let mut frames = Vec::with_capacity(sequence.len());
            for frame in sequence.frames() {
                frames.push(degrade_frame(frame, profile, &mut rng)?);
            }
            let seq = VideoSequence::new(
                video_id.clone(),
                frames,
                sequence.frame_names().to_vec(),
            )?;
            model_videos.insert(video_id.clone(), seq);
        }
        videos.insert(profile.model.clone(), model_videos);
    }
    Ok(PredictionSet::new(videos, BTreeMap::new())?)
}

/// True-ground-truth selection oracle: per video, the model with the best
/// mean J&F against the real annotations (ties to the smallest id).
pub fn oracle_best(
    preds: &PredictionSet,
    gt: &BTreeMap<String, VideoSequence>,
    cfg: &MetricConfig,
) -> Result<BTreeMap<String, String>, SynthError> {
    let mut out = BTreeMap::new();
    for (video, gt_seq) in gt {
        let mut best: Option<(f64, &String)> = None;
        for model in preds.models() {
            let seq = preds
                .sequence(model, video)
                .ok_or_else(|| SynthError::ConfigInvalid {
                    reason: alloc::format!("model {model} does not cover video {video}"),
                })?;
            let score = score_against_pseudo(seq, gt_seq, cfg)?;
            // Strictly-greater keeps the first (lexicographically
            // smallest) model on ties.
            if best.map_or(true, |(s, _)| score > s) {
                best = Some((score, model));
            }
        }
        let (_, model) = best.ok_or_else(|| SynthError::ConfigInvalid {
            reason: "prediction set has no models".into(),
        })?;
        out.insert(video.clone(), model.clone());
    }
    Ok(out)
}
