//! Slice-score tables and patient-level pooling.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const SCORES_HEADER: [&str; 5] = ["patient_id", "series_uid", "slice_index", "score", "label"];
pub const POOLED_HEADER: [&str; 5] = ["patient_id", "score", "label", "method", "k"];

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreRow {
    pub patient_id: String,
    pub series_uid: String,
    pub slice_index: u64,
    pub score: f64,
    pub label: u8,
}

/// Validated slice scores: one label per patient, unique slice keys,
/// scores in [0, 1].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreTable {
    rows: Vec<ScoreRow>,
}

fn schema(line: u64, message: impl Into<String>) -> Error {
    Error::Schema {
        line,
        message: message.into(),
    }
}

fn check_probability(v: f64, what: &str) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::Range(format!("{what} {v} outside [0, 1]")))
    }
}

fn parse_label(s: &str, line: u64) -> Result<u8> {
    match s.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(schema(line, format!("label must be 0 or 1, got {other:?}"))),
    }
}

impl ScoreTable {
    pub fn new(rows: Vec<ScoreRow>) -> Result<Self> {
        let mut keys = HashSet::with_capacity(rows.len());
        let mut labels: BTreeMap<&str, u8> = BTreeMap::new();
        for (i, r) in rows.iter().enumerate() {
            check_probability(r.score, "score")?;
            if r.label > 1 {
                return Err(schema(
                    i as u64 + 2,
                    format!("label {} is not 0/1", r.label),
                ));
            }
            if !keys.insert((r.patient_id.as_str(), r.series_uid.as_str(), r.slice_index)) {
                return Err(schema(
                    i as u64 + 2,
                    format!(
                        "duplicate slice ({}, {}, {})",
                        r.patient_id, r.series_uid, r.slice_index
                    ),
                ));
            }
            match labels.insert(&r.patient_id, r.label) {
                Some(prev) if prev != r.label => {
                    return Err(Error::LabelConflict(r.patient_id.clone()))
                }
                _ => {}
            }
        }
        Ok(ScoreTable { rows })
    }

    pub fn rows(&self) -> &[ScoreRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Scores and label per patient, across all of that patient's series.
    pub fn by_patient(&self) -> BTreeMap<&str, (Vec<f64>, u8)> {
        let mut out: BTreeMap<&str, (Vec<f64>, u8)> = BTreeMap::new();
        for r in &self.rows {
            out.entry(&r.patient_id)
                .or_insert_with(|| (Vec::new(), r.label))
                .0
                .push(r.score);
        }
        out
    }
}

pub fn read_scores_csv<R: Read>(reader: R) -> Result<ScoreTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| schema(1, e.to_string()))?;
    if header.iter().ne(SCORES_HEADER) {
        return Err(schema(
            1,
            format!("expected header {}", SCORES_HEADER.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| schema(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let slice_index = rec[2]
            .parse::<u64>()
            .map_err(|_| schema(line, format!("bad slice_index {:?}", &rec[2])))?;
        let score = rec[3]
            .parse::<f64>()
            .map_err(|_| schema(line, format!("bad score {:?}", &rec[3])))?;
        check_probability(score, &format!("score on line {line}"))?;
        rows.push(ScoreRow {
            patient_id: rec[0].to_string(),
            series_uid: rec[1].to_string(),
            slice_index,
            score,
            label: parse_label(&rec[4], line)?,
        });
    }
    ScoreTable::new(rows)
}

pub fn load_scores_csv(path: &Path) -> Result<ScoreTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_scores_csv(io::BufReader::new(file))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pooling {
    Mean,
    Max,
    TopK(usize),
}

impl Pooling {
    pub fn method(self) -> &'static str {
        match self {
            Pooling::Mean => "mean",
            Pooling::Max => "max",
            Pooling::TopK(_) => "topk",
        }
    }

    pub fn k(self) -> Option<usize> {
        match self {
            Pooling::TopK(k) => Some(k),
            _ => None,
        }
    }

    /// Builds a pooling from its CSV/CLI spelling.
    pub fn from_parts(method: &str, k: Option<usize>) -> Result<Self> {
        match (method, k) {
            ("mean", _) => Ok(Pooling::Mean),
            ("max", _) => Ok(Pooling::Max),
            ("topk", Some(k)) if k >= 1 => Ok(Pooling::TopK(k)),
            ("topk", Some(_)) => Err(Error::Range("top-k pooling needs k >= 1".into())),
            ("topk", None) => Err(Error::Config("top-k pooling needs k".into())),
            (other, _) => Err(Error::Config(format!("unknown pooling method {other:?}"))),
        }
    }
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pooling::TopK(k) => write!(f, "top-{k}"),
            other => f.write_str(other.method()),
        }
    }
}

impl FromStr for Pooling {
    type Err = Error;

    /// Accepts `mean`, `max`, or `topN` / `top-N`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(k) = s.strip_prefix("top").map(|k| k.trim_start_matches('-')) {
            if !k.is_empty() && k != "k" {
                let k = k
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad pooling {s:?}")))?;
                return Pooling::from_parts("topk", Some(k));
            }
        }
        Pooling::from_parts(s, None)
    }
}

/// Pools one patient's slice scores.
///
/// Values are summed in descending order so the result does not depend on
/// slice order, and top-n pooling equals mean pooling bit for bit. Top-k
/// with fewer than k scores averages all of them.
pub fn pool_patient(scores: &[f64], pooling: Pooling) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("no scores to pool"));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let take = match pooling {
        Pooling::Mean => sorted.len(),
        Pooling::Max => 1,
        Pooling::TopK(0) => return Err(Error::Range("top-k pooling needs k >= 1".into())),
        Pooling::TopK(k) => k.min(sorted.len()),
    };
    Ok(sorted[..take].iter().sum::<f64>() / take as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatientScore {
    pub patient_id: String,
    pub score: f64,
    pub label: u8,
    pub pooling: Pooling,
}

/// One pooled score per patient, sorted by patient id.
pub fn pool_table(table: &ScoreTable, pooling: Pooling) -> Result<Vec<PatientScore>> {
    table
        .by_patient()
        .into_iter()
        .map(|(patient, (scores, label))| {
            Ok(PatientScore {
                patient_id: patient.to_string(),
                score: pool_patient(&scores, pooling)?,
                label,
                pooling,
            })
        })
        .collect()
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Mean of the two central values for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}

/// Median over patients of the sample standard deviation of their slice scores.
pub fn within_patient_dispersion(table: &ScoreTable) -> Result<f64> {
    let stds: Vec<f64> = table
        .by_patient()
        .values()
        .map(|(scores, _)| sample_std(scores))
        .collect();
    median(&stds).ok_or(Error::EmptyInput("score table has no patients"))
}

pub fn write_pooled_csv_to<W: Write>(scores: &[PatientScore], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let err = |e: csv::Error| Error::io("<pooled csv>", io::Error::other(e));
    w.write_record(POOLED_HEADER).map_err(err)?;
    for s in scores {
        w.write_record([
            s.patient_id.clone(),
            s.score.to_string(),
            s.label.to_string(),
            s.pooling.method().to_string(),
            s.pooling.k().map(|k| k.to_string()).unwrap_or_default(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io("<pooled csv>", e))
}

pub fn write_pooled_csv(scores: &[PatientScore], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_pooled_csv_to(scores, io::BufWriter::new(file))
}

pub fn read_pooled_csv<R: Read>(reader: R) -> Result<Vec<PatientScore>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| schema(1, e.to_string()))?;
    if header.iter().ne(POOLED_HEADER) {
        return Err(schema(
            1,
            format!("expected header {}", POOLED_HEADER.join(",")),
        ));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| schema(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let score = rec[1]
            .parse::<f64>()
            .map_err(|_| schema(line, format!("bad score {:?}", &rec[1])))?;
        check_probability(score, &format!("score on line {line}"))?;
        let k = match &rec[4] {
            "" => None,
            k => Some(
                k.parse::<usize>()
                    .map_err(|_| schema(line, format!("bad k {k:?}")))?,
            ),
        };
        let pooling = Pooling::from_parts(&rec[3], k).map_err(|e| schema(line, e.to_string()))?;
        if !seen.insert(rec[0].to_string()) {
            return Err(schema(line, format!("duplicate patient {:?}", &rec[0])));
        }
        out.push(PatientScore {
            patient_id: rec[0].to_string(),
            score,
            label: parse_label(&rec[2], line)?,
            pooling,
        });
    }
    Ok(out)
}

pub fn load_pooled_csv(path: &Path) -> Result<Vec<PatientScore>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_pooled_csv(io::BufReader::new(file))
}
