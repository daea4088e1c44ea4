//! End-to-end QC run over a directory of DICOM files.

use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::dicom::{assemble_series, scan_directory, SeriesRecord};
use crate::error::{Error, Result};
use crate::export::{export_block, series_dir, write_montage_pgm};
use crate::qc::{process_series, RejectReason, SeriesOutcome};
use crate::report::{
    summarize, write_qc_csv, write_summary, QcRecord, QcSummary, REPORT_FILE_NAME,
    SUMMARY_FILE_NAME,
};

pub const MONTAGE_FILE_NAME: &str = "montage.pgm";

#[derive(Clone, Debug)]
pub struct QcRun {
    /// Sorted by (patient_id, series_uid).
    pub outcomes: Vec<SeriesOutcome>,
    pub summary: QcSummary,
    pub skipped_files: usize,
    pub exported: Vec<PathBuf>,
}

fn process_record(
    record: &SeriesRecord,
    output: &Path,
    cfg: &PipelineConfig,
    montage: bool,
) -> Result<(SeriesOutcome, Option<PathBuf>)> {
    let series = match assemble_series(record) {
        Ok(s) => s,
        Err(e) => {
            let reason = RejectReason::from_ingest_error(&e);
            warn!("series {} rejected ({reason}): {e}", record.series_uid);
            return Ok((
                SeriesOutcome::rejected(
                    &record.series_uid,
                    &record.patient_id,
                    record.files.len(),
                    reason,
                ),
                None,
            ));
        }
    };

    let result = process_series(&series, &cfg.detect, &cfg.gate);
    drop(series);
    let outcome = result.outcome;
    let Some(block) = result.block else {
        info!(
            "series {} rejected ({})",
            outcome.series_uid,
            outcome.reason.map_or("", |r| r.as_str())
        );
        return Ok((outcome, None));
    };
    if outcome.orientation_missing {
        warn!(
            "series {} has no ImageOrientationPatient; assumed axial",
            outcome.series_uid
        );
    }
    let path = export_block(&outcome, &block, output, cfg.overwrite)?;
    if montage {
        let dir = series_dir(output, &outcome.patient_id, &outcome.series_uid);
        write_montage_pgm(
            &block,
            &dir.join(MONTAGE_FILE_NAME),
            cfg.montage_columns,
            &cfg.window,
        )?;
    }
    info!(
        "series {} accepted: slices {:?} ({} of {})",
        outcome.series_uid, outcome.block, outcome.kept_slices, outcome.original_slices
    );
    Ok((outcome, Some(path)))
}

/// Scans `input`, processes every series on `cfg.workers` threads and
/// writes lung blocks, `qc_report.csv` and `qc_summary.txt` under `output`.
///
/// Outputs depend only on the inputs and the configuration, never on the
/// number of workers or completion order.
pub fn run_qc(input: &Path, output: &Path, cfg: &PipelineConfig, montage: bool) -> Result<QcRun> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    pool.install(|| {
        let scan = scan_directory(input)?;
        info!(
            "found {} series in {} files ({} skipped)",
            scan.records.len(),
            scan.examined,
            scan.skipped
        );
        fs::create_dir_all(output).map_err(|e| Error::io(output, e))?;

        let results: Vec<_> = scan
            .records
            .par_iter()
            .map(|r| process_record(r, output, cfg, montage))
            .collect();
        let mut outcomes = Vec::with_capacity(results.len());
        let mut exported = Vec::new();
        for r in results {
            let (outcome, path) = r?;
            outcomes.push(outcome);
            exported.extend(path);
        }

        let records: Vec<QcRecord> = outcomes.iter().map(QcRecord::from).collect();
        let summary = summarize(&records);
        write_qc_csv(&records, &output.join(REPORT_FILE_NAME))?;
        write_summary(&summary, &output.join(SUMMARY_FILE_NAME))?;
        Ok(QcRun {
            outcomes,
            summary,
            skipped_files: scan.skipped,
            exported,
        })
    })
}
