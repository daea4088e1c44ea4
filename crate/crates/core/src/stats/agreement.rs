use super::{check_lengths, check_not_nan};
use crate::error::{Error, Result};

/// Mean squared error of probabilistic forecasts against 0/1 outcomes.
pub fn brier(probs: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(probs.len(), labels.len(), "probabilities and labels")?;
    if probs.is_empty() {
        return Err(Error::EmptyInput("brier score of no forecasts"));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Range(format!("probability {p} outside [0, 1]")));
    }
    let ss: f64 = probs
        .iter()
        .zip(labels)
        .map(|(&p, &l)| {
            let e = p - if l { 1.0 } else { 0.0 };
            e * e
        })
        .sum();
    Ok(ss / probs.len() as f64)
}

/// Bland-Altman agreement of `b` against `a` (differences are `b - a`).
#[derive(Clone, Debug, PartialEq)]
pub struct BaStats {
    pub bias: f64,
    pub sd: f64,
    pub loa_low: f64,
    pub loa_high: f64,
    /// (mean of the pair, difference) per subject, in input order.
    pub points: Vec<(f64, f64)>,
}

pub const LOA_Z: f64 = 1.96;

pub fn bland_altman(a: &[f64], b: &[f64]) -> Result<BaStats> {
    check_lengths(a.len(), b.len(), "paired measurements")?;
    if a.len() < 2 {
        return Err(Error::EmptyInput("Bland-Altman needs at least two pairs"));
    }
    check_not_nan(a, "first measurement")?;
    check_not_nan(b, "second measurement")?;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let n = diffs.len() as f64;
    let bias = diffs.iter().sum::<f64>() / n;
    let sd = (diffs.iter().map(|d| (d - bias) * (d - bias)).sum::<f64>() / (n - 1.0)).sqrt();
    Ok(BaStats {
        bias,
        sd,
        loa_low: bias - LOA_Z * sd,
        loa_high: bias + LOA_Z * sd,
        points: a
            .iter()
            .zip(b)
            .zip(&diffs)
            .map(|((x, y), &d)| ((x + y) / 2.0, d))
            .collect(),
    })
}

/// Classification summary at a fixed probability threshold. Rates with a
/// zero denominator are `None`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfusionMetrics {
    pub threshold: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
    pub accuracy: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
}

/// Predicts positive when `prob >= threshold`.
pub fn confusion_metrics(
    probs: &[f64],
    labels: &[bool],
    threshold: f64,
) -> Result<ConfusionMetrics> {
    check_lengths(probs.len(), labels.len(), "probabilities and labels")?;
    if probs.is_empty() {
        return Err(Error::EmptyInput("confusion matrix of no predictions"));
    }
    let (mut tp, mut fp, mut tn, mut fneg) = (0, 0, 0, 0);
    for (&p, &l) in probs.iter().zip(labels) {
        match (p >= threshold, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fneg += 1,
        }
    }
    let rate = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    Ok(ConfusionMetrics {
        threshold,
        true_positives: tp,
        false_positives: fp,
        true_negatives: tn,
        false_negatives: fneg,
        accuracy: (tp + tn) as f64 / probs.len() as f64,
        sensitivity: rate(tp, tp + fneg),
        specificity: rate(tn, tn + fp),
    })
}
