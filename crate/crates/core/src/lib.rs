//! Core algorithms for evaluating and fusing video-object-segmentation masks.
//!
//! Everything in this crate operates on in-memory label maps and is fully
//! deterministic: region metrics (Jaccard, pixel F-measure, weighted
//! composites), multi-model pseudo-label fusion, feature-bucketed model
//! selection, and a seeded synthetic benchmark generator. File formats,
//! directory layouts, and the command-line front end live in the companion
//! `vosfuse` crate.
//!
//! The crate is `no_std` + `alloc`: no IO, no platform dependencies, no
//! ambient randomness.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod features;
pub mod fusion;
pub mod mask;
pub mod metrics;
pub mod rle;
pub mod rng;
pub mod selection;
pub mod synth;

pub use mask::{BinaryMask, Label, MaskFrame, PredictionSet, VideoSequence};
pub use metrics::{MetricConfig, ScoreTable};
