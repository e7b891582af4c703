//! Run-length codec for label maps.
//!
//! Runs are `(label, length)` pairs over the row-major pixel order. The
//! canonical form produced by [`rle_encode`] merges adjacent equal labels,
//! so adjacent runs always differ in value.

use alloc::vec::Vec;

use crate::mask::{Label, MaskError, MaskFrame};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RleError {
    #[error("runs cover {actual} pixels, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("run {index} has zero length")]
    EmptyRun { index: usize },
    #[error(transparent)]
    Mask(#[from] MaskError),
}

/// A run-length encoded label map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RleMask {
    pub width: u32,
    pub height: u32,
    /// `(label, length)` pairs; lengths are positive and sum to
    /// `width * height`.
    pub runs: Vec<(Label, u32)>,
}

/// Encode a frame into canonical runs.
pub fn rle_encode(frame: &MaskFrame) -> RleMask {
    let mut runs: Vec<(Label, u32)> = Vec::new();
    for &label in frame.labels() {
        match runs.last_mut() {
            Some((value, length)) if *value == label => *length += 1,
            _ => runs.push((label, 1)),
        }
    }
    RleMask {
        width: frame.width(),
        height: frame.height(),
        runs,
    }
}

/// Expand runs back into a dense frame.
pub fn rle_decode(rle: &RleMask) -> Result<MaskFrame, RleError> {
    let expected = rle.width as usize * rle.height as usize;
    let mut total = 0usize;
    for (index, &(_, length)) in rle.runs.iter().enumerate() {
        if length == 0 {
            return Err(RleError::EmptyRun { index });
        }
        total += length as usize;
    }
    if total != expected {
        return Err(RleError::LengthMismatch {
            expected,
            actual: total,
        });
    }
    let mut labels = Vec::with_capacity(expected);
    for &(value, length) in &rle.runs {
        labels.extend(core::iter::repeat_n(value, length as usize));
    }
    Ok(MaskFrame::new(rle.width, rle.height, labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Xoshiro256StarStar;
    use alloc::vec;

    #[test]
    fn encode_hand_counted_runs() {
        let frame = MaskFrame::new(6, 1, vec![0, 0, 1, 1, 1, 0]).unwrap();
        let rle = rle_encode(&frame);
        assert_eq!(rle.runs, vec![(0, 2), (1, 3), (0, 1)]);
    }

    #[test]
    fn encode_all_zero_frame() {
        let frame = MaskFrame::filled(4, 4, 0).unwrap();
        assert_eq!(rle_encode(&frame).runs, vec![(0, 16)]);
    }

    #[test]
    fn decode_single_run() {
        let rle = RleMask {
            width: 2,
            height: 2,
            runs: vec![(2, 4)],
        };
        assert_eq!(rle_decode(&rle).unwrap().labels(), &[2, 2, 2, 2]);
    }

    #[test]
    fn decode_rejects_short_runs() {
        let rle = RleMask {
            width: 2,
            height: 2,
            runs: vec![(0, 3)],
        };
        assert_eq!(
            rle_decode(&rle).unwrap_err(),
            RleError::LengthMismatch {
                expected: 4,
                actual: 3
            }
        );
    }

    #[test]
    fn decode_rejects_zero_length_run() {
        let rle = RleMask {
            width: 2,
            height: 1,
            runs: vec![(0, 2), (1, 0)],
        };
        assert_eq!(rle_decode(&rle).unwrap_err(), RleError::EmptyRun { index: 1 });
    }

    fn random_frame(rng: &mut Xoshiro256StarStar) -> MaskFrame {
        let width = rng.gen_range(1, 24) as u32;
        let height = rng.gen_range(1, 24) as u32;
        let labels = (0..width as usize * height as usize)
            .map(|_| rng.gen_range(0, 3) as Label)
            .collect();
        MaskFrame::new(width, height, labels).unwrap()
    }

    #[test]
    fn round_trip_on_random_frames() {
        let mut rng = Xoshiro256StarStar::seed_from_u64(0x51ED);
        for _ in 0..200 {
            let frame = random_frame(&mut rng);
            let rle = rle_encode(&frame);
            // Canonical: adjacent runs differ.
            for pair in rle.runs.windows(2) {
                assert_ne!(pair[0].0, pair[1].0);
            }
            assert_eq!(rle_decode(&rle).unwrap(), frame);
            // Canonical codes are a fixed point of decode-then-encode.
            assert_eq!(rle_encode(&rle_decode(&rle).unwrap()), rle);
        }
    }
}
