//! QC CSV report and corpus-level summary.

use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::qc::{QcStatus, RejectReason, SeriesOutcome};

pub const REPORT_FILE_NAME: &str = "qc_report.csv";
pub const SUMMARY_FILE_NAME: &str = "qc_summary.txt";
pub const QC_HEADER: [&str; 6] = [
    "patient_id",
    "series_uid",
    "status",
    "reason",
    "original_slices",
    "kept_slices",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QcRecord {
    pub patient_id: String,
    pub series_uid: String,
    pub status: QcStatus,
    /// Empty when accepted.
    pub reason: String,
    pub original_slices: u64,
    pub kept_slices: u64,
}

impl From<&SeriesOutcome> for QcRecord {
    fn from(o: &SeriesOutcome) -> Self {
        QcRecord {
            patient_id: o.patient_id.clone(),
            series_uid: o.series_uid.clone(),
            status: o.status,
            reason: o.reason.map(|r| r.as_str().to_string()).unwrap_or_default(),
            original_slices: o.original_slices as u64,
            kept_slices: o.kept_slices as u64,
        }
    }
}

fn sort_records(records: &mut [QcRecord]) {
    records.sort_by(|a, b| {
        (a.patient_id.as_str(), a.series_uid.as_str())
            .cmp(&(b.patient_id.as_str(), b.series_uid.as_str()))
    });
}

/// Serializes records sorted by (patient_id, series_uid), LF-terminated,
/// quoting only where RFC 4180 requires it.
pub fn write_qc_csv_to<W: Write>(records: &[QcRecord], out: W) -> Result<()> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(out);
    let csv_err = |e: csv::Error| Error::io("<qc csv>", io::Error::other(e));
    w.write_record(QC_HEADER).map_err(csv_err)?;
    for r in &sorted {
        w.write_record([
            r.patient_id.as_str(),
            r.series_uid.as_str(),
            r.status.as_str(),
            r.reason.as_str(),
            &r.original_slices.to_string(),
            &r.kept_slices.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<qc csv>", e))
}

pub fn write_qc_csv(records: &[QcRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_qc_csv_to(records, io::BufWriter::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_qc_csv(path: &Path) -> Result<Vec<QcRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let header = rdr.headers().map_err(|e| Error::Schema {
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().ne(QC_HEADER) {
        return Err(Error::Schema {
            line: 1,
            message: format!("expected header {}", QC_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Schema {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let schema = |message: String| Error::Schema { line, message };
        let status = match &row[2] {
            "accepted" => QcStatus::Accepted,
            "rejected" => QcStatus::Rejected,
            other => return Err(schema(format!("unknown status {other:?}"))),
        };
        let reason = row[3].to_string();
        match status {
            QcStatus::Accepted if !reason.is_empty() => {
                return Err(schema("accepted row carries a reason".into()))
            }
            QcStatus::Rejected => {
                reason
                    .parse::<RejectReason>()
                    .map_err(|_| schema(format!("unknown reason {reason:?}")))?;
            }
            _ => {}
        }
        let count = |i: usize| {
            row[i]
                .parse::<u64>()
                .map_err(|_| schema(format!("bad count {:?}", &row[i])))
        };
        let record = QcRecord {
            patient_id: row[0].to_string(),
            series_uid: row[1].to_string(),
            status,
            reason,
            original_slices: count(4)?,
            kept_slices: count(5)?,
        };
        if record.kept_slices > record.original_slices
            || (status == QcStatus::Rejected && record.kept_slices != 0)
        {
            return Err(schema("kept_slices inconsistent with status".into()));
        }
        out.push(record);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QcSummary {
    pub total_series: u64,
    pub accepted_series: u64,
    pub total_raw_images: u64,
    pub total_kept_images: u64,
    pub discard_proportion: f64,
}

pub fn summarize(records: &[QcRecord]) -> QcSummary {
    let total_raw_images: u64 = records.iter().map(|r| r.original_slices).sum();
    let total_kept_images: u64 = records.iter().map(|r| r.kept_slices).sum();
    QcSummary {
        total_series: records.len() as u64,
        accepted_series: records
            .iter()
            .filter(|r| r.status == QcStatus::Accepted)
            .count() as u64,
        total_raw_images,
        total_kept_images,
        discard_proportion: if total_raw_images == 0 {
            0.0
        } else {
            1.0 - total_kept_images as f64 / total_raw_images as f64
        },
    }
}

impl fmt::Display for QcSummary {
    /// `key=value` lines.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "total_series={}", self.total_series)?;
        writeln!(f, "accepted_series={}", self.accepted_series)?;
        writeln!(
            f,
            "rejected_series={}",
            self.total_series - self.accepted_series
        )?;
        writeln!(f, "total_raw_images={}", self.total_raw_images)?;
        writeln!(f, "total_kept_images={}", self.total_kept_images)?;
        writeln!(f, "discard_proportion={}", self.discard_proportion)
    }
}

pub fn write_summary(summary: &QcSummary, path: &Path) -> Result<()> {
    std::fs::write(path, summary.to_string()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(p: &str, s: &str, orig: u64, kept: u64) -> QcRecord {
        QcRecord {
            patient_id: p.into(),
            series_uid: s.into(),
            status: if kept > 0 {
                QcStatus::Accepted
            } else {
                QcStatus::Rejected
            },
            reason: if kept > 0 {
                String::new()
            } else {
                "TOO_FEW_SLICES".into()
            },
            original_slices: orig,
            kept_slices: kept,
        }
    }

    fn csv_text(records: &[QcRecord]) -> String {
        let mut buf = Vec::new();
        write_qc_csv_to(records, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(
            csv_text(&[]),
            "patient_id,series_uid,status,reason,original_slices,kept_slices\n"
        );
    }

    #[test]
    fn accepted_row_and_sorting() {
        let text = csv_text(&[
            rec("b", "2", 50, 0),
            rec("a", "9", 100, 60),
            rec("a", "1", 70, 0),
        ]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "a,1,rejected,TOO_FEW_SLICES,70,0");
        assert_eq!(lines[2], "a,9,accepted,,100,60");
        assert_eq!(lines[3], "b,2,rejected,TOO_FEW_SLICES,50,0");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn quoting_when_needed() {
        let text = csv_text(&[rec("doe, \"j\"", "1", 10, 5)]);
        assert!(text.contains("\"doe, \"\"j\"\"\",1,accepted"));
    }

    #[test]
    fn summary_examples() {
        let s = summarize(&[rec("a", "1", 100, 60), rec("b", "2", 50, 0)]);
        assert_eq!(s.total_raw_images, 150);
        assert_eq!(s.total_kept_images, 60);
        assert!((s.discard_proportion - 0.6).abs() < 1e-15);
        assert_eq!(s.total_series, 2);
        assert_eq!(s.accepted_series, 1);

        assert_eq!(summarize(&[]), QcSummary::default());
        assert_eq!(summarize(&[rec("a", "1", 80, 80)]).discard_proportion, 0.0);
    }
}
