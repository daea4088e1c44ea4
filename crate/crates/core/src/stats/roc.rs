use super::split_classes;
use crate::error::Result;

/// Empirical ROC curve, one operating point per distinct score.
#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve {
    /// Descending; the first entry is +inf for the (0, 0) corner.
    pub thresholds: Vec<f64>,
    pub fpr: Vec<f64>,
    pub tpr: Vec<f64>,
    /// Trapezoidal area under the curve.
    pub auc: f64,
}

/// Mann-Whitney AUC: the fraction of (positive, negative) pairs in which the
/// positive scores higher, counting ties as one half.
///
/// Computed from one sort; the pair count is accumulated as an exact integer
/// (twice the number of wins plus ties) before the single division.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, neg) = split_classes(scores, labels)?;
    let mut tagged: Vec<(f64, bool)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    tagged.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut twice_wins: u128 = 0;
    let mut neg_below: u128 = 0;
    let mut i = 0;
    while i < tagged.len() {
        let v = tagged[i].0;
        let (mut p, mut q) = (0u128, 0u128);
        while i < tagged.len() && tagged[i].0 == v {
            if tagged[i].1 {
                p += 1
            } else {
                q += 1
            }
            i += 1;
        }
        twice_wins += p * (2 * neg_below + q);
        neg_below += q;
    }
    Ok(twice_wins as f64 / (2 * pos.len() as u128 * neg.len() as u128) as f64)
}

pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    let (pos, neg) = split_classes(scores, labels)?;
    let (p_total, n_total) = (pos.len() as u128, neg.len() as u128);
    let mut tagged: Vec<(f64, bool)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    tagged.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut thresholds = vec![f64::INFINITY];
    let mut fpr = vec![0.0];
    let mut tpr = vec![0.0];
    let (mut tp, mut fp) = (0u128, 0u128);
    let mut twice_area: u128 = 0;
    let mut i = 0;
    while i < tagged.len() {
        let v = tagged[i].0;
        let (prev_tp, prev_fp) = (tp, fp);
        while i < tagged.len() && tagged[i].0 == v {
            if tagged[i].1 {
                tp += 1
            } else {
                fp += 1
            }
            i += 1;
        }
        // Trapezoid in count units: (fp - prev_fp) * (tp + prev_tp) / 2.
        twice_area += (fp - prev_fp) * (tp + prev_tp);
        thresholds.push(v);
        fpr.push(fp as f64 / n_total as f64);
        tpr.push(tp as f64 / p_total as f64);
    }
    Ok(RocCurve {
        thresholds,
        fpr,
        tpr,
        auc: twice_area as f64 / (2 * p_total * n_total) as f64,
    })
}
