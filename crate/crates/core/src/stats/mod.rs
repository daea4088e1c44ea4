//! Discrimination, calibration, distribution-shift and agreement statistics.

mod agreement;
mod delong;
mod ks;
mod roc;

pub use agreement::{bland_altman, brier, confusion_metrics, BaStats, ConfusionMetrics};
pub use delong::{delong_test, DeLongResult};
pub use ks::{kolmogorov_survival, ks_two_sample, KsResult};
pub use roc::{auc, roc_curve, RocCurve};

use crate::error::{Error, Result};

pub(crate) fn check_lengths(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch(format!("{what}: {a} vs {b}")));
    }
    Ok(())
}

pub(crate) fn check_not_nan(values: &[f64], what: &str) -> Result<()> {
    if let Some(v) = values.iter().find(|v| v.is_nan()) {
        return Err(Error::Range(format!("{what} contains {v}")));
    }
    Ok(())
}

/// Splits scores into (positives, negatives), requiring both classes.
pub(crate) fn split_classes(scores: &[f64], labels: &[bool]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_lengths(scores.len(), labels.len(), "scores and labels")?;
    check_not_nan(scores, "scores")?;
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (&s, &l) in scores.iter().zip(labels) {
        if l {
            pos.push(s)
        } else {
            neg.push(s)
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::DegenerateLabels {
            positives: pos.len(),
            negatives: neg.len(),
        });
    }
    Ok((pos, neg))
}
