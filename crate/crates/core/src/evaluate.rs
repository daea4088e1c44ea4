//! Side-by-side evaluation of two pooled patient-score files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scoring::PatientScore;
use crate::stats::{
    auc, bland_altman, brier, confusion_metrics, delong_test, ks_two_sample, roc_curve, BaStats,
    ConfusionMetrics, DeLongResult, KsResult, RocCurve,
};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Patients common to both inputs, in sorted order, with their scores.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedScores {
    pub patients: Vec<String>,
    pub labels: Vec<bool>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Pairs two pooled files by patient. Both must list the same patients with
/// the same labels.
pub fn align(a: &[PatientScore], b: &[PatientScore]) -> Result<AlignedScores> {
    let mut a: Vec<&PatientScore> = a.iter().collect();
    let mut b: Vec<&PatientScore> = b.iter().collect();
    a.sort_by(|x, y| x.patient_id.cmp(&y.patient_id));
    b.sort_by(|x, y| x.patient_id.cmp(&y.patient_id));
    let ids_a: Vec<&str> = a.iter().map(|p| p.patient_id.as_str()).collect();
    let ids_b: Vec<&str> = b.iter().map(|p| p.patient_id.as_str()).collect();
    if ids_a != ids_b {
        let only_a = ids_a.iter().filter(|id| !ids_b.contains(id)).count();
        let only_b = ids_b.iter().filter(|id| !ids_a.contains(id)).count();
        return Err(Error::LengthMismatch(format!(
            "patient sets differ: {only_a} only in the first file, {only_b} only in the second"
        )));
    }
    if let Some((x, _)) = a.iter().zip(&b).find(|(x, y)| x.label != y.label) {
        return Err(Error::LabelConflict(x.patient_id.clone()));
    }
    Ok(AlignedScores {
        patients: ids_a.iter().map(|s| s.to_string()).collect(),
        labels: a.iter().map(|p| p.label == 1).collect(),
        a: a.iter().map(|p| p.score).collect(),
        b: b.iter().map(|p| p.score).collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub n_patients: usize,
    pub n_positive: usize,
    pub auc_a: f64,
    pub auc_b: f64,
    pub roc_a: RocCurve,
    pub roc_b: RocCurve,
    /// `None` when the variance of the AUC difference is zero.
    pub delong: Option<DeLongResult>,
    pub brier_a: f64,
    pub brier_b: f64,
    pub ks: KsResult,
    pub bland_altman: BaStats,
    pub confusion_a: ConfusionMetrics,
    pub confusion_b: ConfusionMetrics,
}

pub fn evaluate(scores: &AlignedScores, threshold: f64) -> Result<EvalReport> {
    let (a, b, l) = (&scores.a, &scores.b, &scores.labels);
    let delong = match delong_test(a, b, l) {
        Ok(r) => Some(r),
        Err(Error::DegenerateVariance) => None,
        Err(e) => return Err(e),
    };
    Ok(EvalReport {
        n_patients: l.len(),
        n_positive: l.iter().filter(|&&x| x).count(),
        auc_a: auc(a, l)?,
        auc_b: auc(b, l)?,
        roc_a: roc_curve(a, l)?,
        roc_b: roc_curve(b, l)?,
        delong,
        brier_a: brier(a, l)?,
        brier_b: brier(b, l)?,
        ks: ks_two_sample(a, b)?,
        bland_altman: bland_altman(a, b)?,
        confusion_a: confusion_metrics(a, l, threshold)?,
        confusion_b: confusion_metrics(b, l, threshold)?,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "absent".to_string(), |v| v.to_string())
}

impl EvalReport {
    /// (metric, value, detail) triples in a fixed order.
    pub fn metrics(&self) -> Vec<(String, String, String)> {
        let mut m = Vec::new();
        let mut push = |k: &str, v: String, d: &str| m.push((k.to_string(), v, d.to_string()));
        push("n_patients", self.n_patients.to_string(), "");
        push("n_positive", self.n_positive.to_string(), "");
        push("auc_a", self.auc_a.to_string(), "");
        push("auc_b", self.auc_b.to_string(), "");
        match &self.delong {
            Some(d) => {
                push("delong_delta", d.delta.to_string(), "auc_a - auc_b");
                push("delong_variance", d.variance.to_string(), "");
                push("delong_z", d.z.to_string(), "");
                push("delong_p", d.p_two_sided.to_string(), "two-sided");
            }
            None => {
                for k in ["delong_delta", "delong_variance", "delong_z", "delong_p"] {
                    push(k, "absent".into(), "DEGENERATE_VARIANCE");
                }
            }
        }
        push("brier_a", self.brier_a.to_string(), "");
        push("brier_b", self.brier_b.to_string(), "");
        push("ks_d", self.ks.d.to_string(), "scores a vs b");
        push("ks_p", self.ks.p.to_string(), "asymptotic");
        let ba = &self.bland_altman;
        push("ba_bias", ba.bias.to_string(), "b - a");
        push("ba_sd", ba.sd.to_string(), "");
        push("ba_loa_low", ba.loa_low.to_string(), "");
        push("ba_loa_high", ba.loa_high.to_string(), "");
        for (tag, c) in [("a", &self.confusion_a), ("b", &self.confusion_b)] {
            let detail = format!("threshold {}", c.threshold);
            push(&format!("accuracy_{tag}"), c.accuracy.to_string(), &detail);
            push(&format!("sensitivity_{tag}"), opt(c.sensitivity), &detail);
            push(&format!("specificity_{tag}"), opt(c.specificity), &detail);
        }
        m
    }

    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        for (k, v, _) in self.metrics() {
            writeln!(s, "{k}={v}").unwrap();
        }
        s
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn roc_rows(roc: &RocCurve) -> Vec<Vec<String>> {
    (0..roc.thresholds.len())
        .map(|i| {
            vec![
                roc.thresholds[i].to_string(),
                roc.fpr[i].to_string(),
                roc.tpr[i].to_string(),
            ]
        })
        .collect()
}

pub const EVAL_FILES: [&str; 5] = [
    "eval_report.txt",
    "eval_metrics.csv",
    "roc_a.csv",
    "roc_b.csv",
    "bland_altman.csv",
];

/// Writes the report, the metric table and the plotting point lists.
pub fn write_eval(report: &EvalReport, scores: &AlignedScores, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let txt = dir.join(EVAL_FILES[0]);
    fs::write(&txt, report.to_key_values()).map_err(|e| Error::io(&txt, e))?;
    write_rows(
        &dir.join(EVAL_FILES[1]),
        &["metric", "value", "detail"],
        report.metrics().into_iter().map(|(k, v, d)| vec![k, v, d]),
    )?;
    let roc_header = ["threshold", "fpr", "tpr"];
    write_rows(
        &dir.join(EVAL_FILES[2]),
        &roc_header,
        roc_rows(&report.roc_a),
    )?;
    write_rows(
        &dir.join(EVAL_FILES[3]),
        &roc_header,
        roc_rows(&report.roc_b),
    )?;
    write_rows(
        &dir.join(EVAL_FILES[4]),
        &["patient_id", "mean", "difference"],
        scores
            .patients
            .iter()
            .zip(&report.bland_altman.points)
            .map(|(p, (m, d))| vec![p.clone(), m.to_string(), d.to_string()]),
    )
}
