//! Series-level gating and lung-block selection.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dicom::{Orientation, SortedSeries};
use crate::error::{Error, Result};
use crate::export::{quantize_block, LungBlock};
use crate::lung::{detect_lung_slice, LungDetectConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GateConfig {
    pub min_slices: usize,
    pub required_matrix: (usize, usize),
    pub min_block: usize,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            min_slices: 64,
            required_matrix: (512, 512),
            min_block: 20,
        }
    }
}

impl GateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_slices < 1 || self.min_block < 1 {
            return Err(Error::Config(
                "min_slices and min_block must be at least 1".into(),
            ));
        }
        if self.required_matrix.0 == 0 || self.required_matrix.1 == 0 {
            return Err(Error::Config("required_matrix must be non-empty".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RejectReason {
    TooFewSlices,
    BadMatrix,
    NotAxial,
    UnsupportedTransferSyntax,
    MalformedSeries,
    MissingGeometry,
    NoLungBlock,
    BlockTooShort,
}

impl RejectReason {
    pub const ALL: [RejectReason; 8] = [
        RejectReason::TooFewSlices,
        RejectReason::BadMatrix,
        RejectReason::NotAxial,
        RejectReason::UnsupportedTransferSyntax,
        RejectReason::MalformedSeries,
        RejectReason::MissingGeometry,
        RejectReason::NoLungBlock,
        RejectReason::BlockTooShort,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::TooFewSlices => "TOO_FEW_SLICES",
            RejectReason::BadMatrix => "BAD_MATRIX",
            RejectReason::NotAxial => "NOT_AXIAL",
            RejectReason::UnsupportedTransferSyntax => "UNSUPPORTED_TRANSFER_SYNTAX",
            RejectReason::MalformedSeries => "MALFORMED_SERIES",
            RejectReason::MissingGeometry => "MISSING_GEOMETRY",
            RejectReason::NoLungBlock => "NO_LUNG_BLOCK",
            RejectReason::BlockTooShort => "BLOCK_TOO_SHORT",
        }
    }

    /// Maps an ingest failure onto the series-level reason it causes.
    pub fn from_ingest_error(err: &Error) -> RejectReason {
        match err {
            Error::UnsupportedTransferSyntax(_) => RejectReason::UnsupportedTransferSyntax,
            Error::MissingGeometry(_) => RejectReason::MissingGeometry,
            _ => RejectReason::MalformedSeries,
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RejectReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RejectReason::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Range(format!("unknown rejection reason {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcStatus {
    Accepted,
    Rejected,
}

impl QcStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            QcStatus::Accepted => "accepted",
            QcStatus::Rejected => "rejected",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesOutcome {
    pub series_uid: String,
    pub patient_id: String,
    pub status: QcStatus,
    pub reason: Option<RejectReason>,
    pub original_slices: usize,
    pub kept_slices: usize,
    /// Inclusive, 0-based indices into the z-sorted slices.
    pub block: Option<(usize, usize)>,
    /// The series carried no orientation tag and was assumed axial.
    pub orientation_missing: bool,
}

impl SeriesOutcome {
    pub fn rejected(
        series_uid: &str,
        patient_id: &str,
        original_slices: usize,
        reason: RejectReason,
    ) -> Self {
        SeriesOutcome {
            series_uid: series_uid.to_string(),
            patient_id: patient_id.to_string(),
            status: QcStatus::Rejected,
            reason: Some(reason),
            original_slices,
            kept_slices: 0,
            block: None,
            orientation_missing: false,
        }
    }

    pub fn is_accepted(&self) -> bool {
        self.status == QcStatus::Accepted
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateVerdict {
    Pass,
    Reject(RejectReason),
}

/// Scanner-level checks, in fixed order: slice count, matrix, orientation.
pub fn gate_series(series: &SortedSeries, cfg: &GateConfig) -> GateVerdict {
    if series.len() < cfg.min_slices {
        GateVerdict::Reject(RejectReason::TooFewSlices)
    } else if series.matrix != cfg.required_matrix {
        GateVerdict::Reject(RejectReason::BadMatrix)
    } else if series.orientation == Orientation::NotAxial {
        GateVerdict::Reject(RejectReason::NotAxial)
    } else {
        GateVerdict::Pass
    }
}

/// Longest run of `true`, as inclusive indices; the earliest wins ties.
pub fn extract_longest_block(flags: &[bool]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut run_start = None;
    for (i, &f) in flags.iter().chain(std::iter::once(&false)).enumerate() {
        match (f, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                let longer = best.is_none_or(|(bs, be)| i - s > be - bs + 1);
                if longer {
                    best = Some((s, i - 1));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    best
}

/// Result of running detection and block selection on one series.
#[derive(Clone, Debug)]
pub struct SeriesResult {
    pub outcome: SeriesOutcome,
    /// Present exactly when the outcome is accepted.
    pub block: Option<LungBlock>,
    /// Lung area ratio per sorted slice; empty when the gate rejected the series.
    pub area_ratios: Vec<f64>,
}

pub fn process_series(
    series: &SortedSeries,
    detect_cfg: &LungDetectConfig,
    gate_cfg: &GateConfig,
) -> SeriesResult {
    let original = series.len();
    let reject = |reason, area_ratios| SeriesResult {
        outcome: SeriesOutcome::rejected(&series.series_uid, &series.patient_id, original, reason),
        block: None,
        area_ratios,
    };

    if let GateVerdict::Reject(reason) = gate_series(series, gate_cfg) {
        return reject(reason, Vec::new());
    }

    let stats: Vec<(f64, bool)> = series
        .slices
        .par_iter()
        .map(|s| {
            let st = detect_lung_slice(s, detect_cfg);
            (st.area_ratio, st.lung_flag)
        })
        .collect();
    let area_ratios: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let flags: Vec<bool> = stats.iter().map(|s| s.1).collect();

    let (start, end) = match extract_longest_block(&flags) {
        None => return reject(RejectReason::NoLungBlock, area_ratios),
        Some((s, e)) if e - s + 1 < gate_cfg.min_block => {
            return reject(RejectReason::BlockTooShort, area_ratios)
        }
        Some(b) => b,
    };

    let block = quantize_block(series, (start, end));
    SeriesResult {
        outcome: SeriesOutcome {
            series_uid: series.series_uid.clone(),
            patient_id: series.patient_id.clone(),
            status: QcStatus::Accepted,
            reason: None,
            original_slices: original,
            kept_slices: end - start + 1,
            block: Some((start, end)),
            orientation_missing: series.orientation == Orientation::Missing,
        },
        block: Some(block),
        area_ratios,
    }
}
