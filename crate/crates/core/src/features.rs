//! Frame content features and the coarse buckets used to index
//! historical model performance.
//!
//! The features are cheap, label-map-only measurements: how many objects a
//! frame contains, how large they are relative to the frame, and how busy
//! the label layout is. "Busy" is measured as the fraction of 4-adjacent
//! pixel pairs whose labels differ — 0 for a frame painted with one label,
//! approaching 1 for a checkerboard — which tracks boundary density
//! without needing image gradients.
//!
//! Buckets quantize the features so sparse score histories still land in
//! populated cells: object count in three bins, object size in four, and
//! layout complexity split at a running median maintained by the caller.

use crate::mask::MaskFrame;

/// Measurements of one frame's label map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameFeatures {
    /// Distinct non-background labels present.
    pub object_count: usize,
    /// Mean object area as a fraction of the frame, 0 when no objects.
    pub mean_area_fraction: f64,
    /// Smallest object area as a fraction of the frame, 0 when no objects.
    pub min_area_fraction: f64,
    /// Fraction of 4-adjacent pixel pairs with differing labels.
    pub scene_complexity: f64,
}

/// Compute [`FrameFeatures`] for a label map.
pub fn extract_features(frame: &MaskFrame) -> FrameFeatures {
    let labels = frame.object_labels();
    let total = frame.pixel_count() as f64;

    let (mean_area_fraction, min_area_fraction) = if labels.is_empty() {
        (0.0, 0.0)
    } else {
        let mut areas = alloc::vec![0usize; labels.len()];
        for &pixel in frame.labels() {
            if pixel != 0 {
                // Roster labels are sorted, so binary search finds the slot.
                if let Ok(slot) = labels.binary_search(&pixel) {
                    areas[slot] += 1;
                }
            }
        }
        let sum: usize = areas.iter().sum();
        let min = areas.iter().copied().min().unwrap_or(0);
        (
            sum as f64 / labels.len() as f64 / total,
            min as f64 / total,
        )
    };

    FrameFeatures {
        object_count: labels.len(),
        mean_area_fraction,
        min_area_fraction,
        scene_complexity: layout_complexity(frame),
    }
}

/// Fraction of horizontally and vertically adjacent pixel pairs whose
/// labels differ. Frames with fewer than two pixels have no pairs and
/// score 0.
pub fn layout_complexity(frame: &MaskFrame) -> f64 {
    let w = frame.width() as usize;
    let h = frame.height() as usize;
    let labels = frame.labels();
    let total_pairs = (w - 1) * h + w * (h - 1);
    if total_pairs == 0 {
        return 0.0;
    }
    let mut differing = 0usize;
    for y in 0..h {
        let row = y * w;
        for x in 0..w - 1 {
            if labels[row + x] != labels[row + x + 1] {
                differing += 1;
            }
        }
    }
    for y in 0..h - 1 {
        let row = y * w;
        for x in 0..w {
            if labels[row + x] != labels[row + w + x] {
                differing += 1;
            }
        }
    }
    differing as f64 / total_pairs as f64
}

/// Object-count bin. Zero objects fold into [`CountBin::One`]: an empty
/// frame behaves like a near-empty one for model choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CountBin {
    One,
    TwoToThree,
    FourPlus,
}

impl CountBin {
    pub fn from_count(count: usize) -> Self {
        match count {
            0 | 1 => CountBin::One,
            2 | 3 => CountBin::TwoToThree,
            _ => CountBin::FourPlus,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CountBin::One => "one",
            CountBin::TwoToThree => "two_to_three",
            CountBin::FourPlus => "four_plus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "one" => CountBin::One,
            "two_to_three" => CountBin::TwoToThree,
            "four_plus" => CountBin::FourPlus,
            _ => return None,
        })
    }
}

/// Object-size bin, keyed on the smallest object in the frame: the
/// smallest object is the one most likely to be lost, so it drives the
/// difficulty class. Thresholds are fractions of frame area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SizeBin {
    Tiny,
    Small,
    Medium,
    Large,
}

impl SizeBin {
    pub const TINY_BELOW: f64 = 0.005;
    pub const SMALL_BELOW: f64 = 0.02;
    pub const MEDIUM_BELOW: f64 = 0.10;

    pub fn from_min_area_fraction(fraction: f64) -> Self {
        if fraction < Self::TINY_BELOW {
            SizeBin::Tiny
        } else if fraction < Self::SMALL_BELOW {
            SizeBin::Small
        } else if fraction < Self::MEDIUM_BELOW {
            SizeBin::Medium
        } else {
            SizeBin::Large
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SizeBin::Tiny => "tiny",
            SizeBin::Small => "small",
            SizeBin::Medium => "medium",
            SizeBin::Large => "large",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "tiny" => SizeBin::Tiny,
            "small" => SizeBin::Small,
            "medium" => SizeBin::Medium,
            "large" => SizeBin::Large,
            _ => return None,
        })
    }
}

/// Layout-complexity bin, split at a running median so the two halves stay
/// balanced as data accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComplexityBin {
    Low,
    High,
}

impl ComplexityBin {
    /// High strictly above the median, so with an empty history
    /// (median 0) a flat frame still classifies Low.
    pub fn from_complexity(complexity: f64, median: f64) -> Self {
        if complexity > median {
            ComplexityBin::High
        } else {
            ComplexityBin::Low
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ComplexityBin::Low => "low",
            ComplexityBin::High => "high",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "low" => ComplexityBin::Low,
            "high" => ComplexityBin::High,
            _ => return None,
        })
    }
}

/// One cell of the performance history index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureBucket {
    pub count: CountBin,
    pub size: SizeBin,
    pub complexity: ComplexityBin,
}

impl FeatureBucket {
    pub fn from_features(features: &FrameFeatures, complexity_median: f64) -> Self {
        FeatureBucket {
            count: CountBin::from_count(features.object_count),
            size: SizeBin::from_min_area_fraction(features.min_area_fraction),
            complexity: ComplexityBin::from_complexity(
                features.scene_complexity,
                complexity_median,
            ),
        }
    }
}
