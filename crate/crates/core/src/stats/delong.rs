use statrs::function::erf::erfc;

use super::{check_lengths, split_classes};
use crate::error::{Error, Result};

/// Paired comparison of two AUCs measured on the same subjects.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeLongResult {
    pub auc_a: f64,
    pub auc_b: f64,
    /// `auc_a - auc_b`.
    pub delta: f64,
    /// Estimated variance of `delta`.
    pub variance: f64,
    pub z: f64,
    pub p_two_sided: f64,
}

/// Placement values of one model: for each positive, the fraction of
/// negatives it outranks (ties count half), and for each negative the
/// fraction of positives that outrank it.
fn placements(pos: &[f64], neg: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut v10 = vec![0u64; pos.len()];
    let mut v01 = vec![0u64; neg.len()];
    for (i, &x) in pos.iter().enumerate() {
        for (j, &y) in neg.iter().enumerate() {
            let twice_psi = if x > y {
                2
            } else if x == y {
                1
            } else {
                0
            };
            v10[i] += twice_psi;
            v01[j] += twice_psi;
        }
    }
    let (m, n) = (pos.len() as f64, neg.len() as f64);
    (
        v10.into_iter().map(|c| c as f64 / (2.0 * n)).collect(),
        v01.into_iter().map(|c| c as f64 / (2.0 * m)).collect(),
    )
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample covariance entries (var_a, var_b, cov_ab) with divisor k - 1.
fn covariance(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let (ma, mb) = (mean(a), mean(b));
    let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        saa += dx * dx;
        sbb += dy * dy;
        sab += dx * dy;
    }
    let d = (a.len() - 1) as f64;
    (saa / d, sbb / d, sab / d)
}

/// DeLong's nonparametric test for two correlated AUCs.
///
/// `scores_a[i]` and `scores_b[i]` must belong to the same subject. A zero
/// variance of the difference (for example identical score vectors) is
/// reported as `DegenerateVariance` rather than as p = 1.
pub fn delong_test(scores_a: &[f64], scores_b: &[f64], labels: &[bool]) -> Result<DeLongResult> {
    check_lengths(scores_a.len(), scores_b.len(), "paired score vectors")?;
    let (pos_a, neg_a) = split_classes(scores_a, labels)?;
    let (pos_b, neg_b) = split_classes(scores_b, labels)?;
    if pos_a.len() < 2 || neg_a.len() < 2 {
        // Covariances need at least two subjects per class.
        return Err(Error::DegenerateVariance);
    }

    let (v10_a, v01_a) = placements(&pos_a, &neg_a);
    let (v10_b, v01_b) = placements(&pos_b, &neg_b);
    let auc_a = mean(&v10_a);
    let auc_b = mean(&v10_b);

    let (s10_aa, s10_bb, s10_ab) = covariance(&v10_a, &v10_b);
    let (s01_aa, s01_bb, s01_ab) = covariance(&v01_a, &v01_b);
    let (m, n) = (pos_a.len() as f64, neg_a.len() as f64);
    let variance = (s10_aa + s10_bb - 2.0 * s10_ab) / m + (s01_aa + s01_bb - 2.0 * s01_ab) / n;
    if variance.is_nan() || variance <= 0.0 {
        return Err(Error::DegenerateVariance);
    }

    let delta = auc_a - auc_b;
    let z = delta / variance.sqrt();
    Ok(DeLongResult {
        auc_a,
        auc_b,
        delta,
        variance,
        z,
        p_two_sided: erfc(z.abs() / std::f64::consts::SQRT_2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_models_are_degenerate() {
        let s = [0.1, 0.4, 0.35, 0.8, 0.6, 0.2];
        let l = [false, false, true, true, true, false];
        assert_eq!(
            delong_test(&s, &s, &l).unwrap_err().code(),
            "DEGENERATE_VARIANCE"
        );
    }

    #[test]
    fn swapping_models_negates() {
        let a = [0.1, 0.4, 0.35, 0.8, 0.6, 0.2, 0.7, 0.3];
        let b = [0.3, 0.2, 0.5, 0.6, 0.9, 0.1, 0.4, 0.45];
        let l = [false, false, true, true, true, false, true, false];
        let ab = delong_test(&a, &b, &l).unwrap();
        let ba = delong_test(&b, &a, &l).unwrap();
        assert_eq!(ab.delta, -ba.delta);
        assert_eq!(ab.z, -ba.z);
        assert_eq!(ab.p_two_sided, ba.p_two_sided);
        assert_eq!(ab.variance, ba.variance);
        assert!(ab.p_two_sided > 0.0 && ab.p_two_sided <= 1.0);
    }

    #[test]
    fn matches_hand_computed_small_case() {
        // Positives a: [0.9, 0.6], b: [0.7, 0.8]; negatives a: [0.5, 0.7], b: [0.6, 0.2].
        // a: V10 = [1, 0.5], V01 = [1, 0.5]  -> AUC 0.75
        // b: V10 = [1, 1],   V01 = [1, 1]    -> AUC 1.0
        // Var(V10_a) = 0.125, others 0 -> variance = 0.125/2 + 0.125/2 = 0.125
        let a = [0.9, 0.6, 0.5, 0.7];
        let b = [0.7, 0.8, 0.6, 0.2];
        let l = [true, true, false, false];
        let r = delong_test(&a, &b, &l).unwrap();
        assert_eq!(r.auc_a, 0.75);
        assert_eq!(r.auc_b, 1.0);
        assert!((r.variance - 0.125).abs() < 1e-15);
        assert!((r.z - (-0.25 / 0.125f64.sqrt())).abs() < 1e-15);
    }
}
