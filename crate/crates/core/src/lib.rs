//! Quality control for chest CT series ahead of lung cancer risk models,
//! plus the statistics used to compare model scores.
//!
//! The pipeline reads DICOM files, finds the longest contiguous run of
//! slices showing lung parenchyma, and exports that block as an int16 NPY
//! volume. A QC report records every accepted and rejected series.

pub mod cli;
pub mod config;
pub mod dicom;
pub mod error;
pub mod evaluate;
pub mod export;
pub mod lung;
pub mod pipeline;
pub mod qc;
pub mod report;
pub mod scoring;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
