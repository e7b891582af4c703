//! File formats, dataset trees, and the command-line front end for the
//! mask evaluation/fusion/selection toolkit.
//!
//! The algorithms live in [`vosfuse_core`]; this crate adds everything
//! that touches a filesystem: indexed-PNG label maps, dataset directory
//! layouts, the performance-database JSON file, machine-readable reports,
//! and the `vosfuse` binary.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod db_file;
pub mod png_io;
pub mod report;

pub use vosfuse_core as core;
