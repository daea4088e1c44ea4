use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, warn};
use rayon::prelude::*;
use walkdir::WalkDir;

use super::read_header;
use crate::error::{Error, Result};

/// All files sharing one SeriesInstanceUID.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesRecord {
    pub series_uid: String,
    pub patient_id: String,
    /// Sorted paths.
    pub files: Vec<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScanReport {
    /// Sorted by (patient_id, series_uid).
    pub records: Vec<SeriesRecord>,
    /// Files that were not DICOM or whose header could not be decoded.
    pub skipped: usize,
    pub examined: usize,
}

/// Walks `root` and groups every decodable DICOM file by series.
///
/// Only an unreadable root is an error; problems with individual files are
/// logged and counted in [`ScanReport::skipped`].
pub fn scan_directory(root: &Path) -> Result<ScanReport> {
    let meta = fs::metadata(root).map_err(|e| Error::io(root, e))?;
    if !meta.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotADirectory, "not a directory"),
        ));
    }
    fs::read_dir(root).map_err(|e| Error::io(root, e))?;

    let mut paths = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        match entry {
            Ok(e) if e.file_type().is_file() => paths.push(e.into_path()),
            Ok(_) => {}
            Err(e) => warn!("skipping unreadable entry under {}: {e}", root.display()),
        }
    }

    let headers: Vec<_> = paths
        .par_iter()
        .map(|path| {
            let header = fs::read(path)
                .map_err(|e| Error::io(path, e))
                .and_then(|bytes| read_header(&bytes));
            (path, header)
        })
        .collect();

    let mut groups: BTreeMap<String, SeriesRecord> = BTreeMap::new();
    let mut skipped = 0;
    for (path, header) in headers {
        match header {
            Ok(h) => {
                let record = groups
                    .entry(h.series_uid.clone())
                    .or_insert_with(|| SeriesRecord {
                        series_uid: h.series_uid.clone(),
                        patient_id: h.patient_id.clone(),
                        files: Vec::new(),
                    });
                if record.patient_id != h.patient_id {
                    warn!(
                        "series {} mixes patient ids {:?} and {:?}; keeping the first",
                        h.series_uid, record.patient_id, h.patient_id
                    );
                }
                record.files.push(path.clone());
            }
            Err(Error::NotDicom) => {
                debug!("not DICOM: {}", path.display());
                skipped += 1;
            }
            Err(e) => {
                warn!("skipping {}: {e}", path.display());
                skipped += 1;
            }
        }
    }

    let mut records: Vec<SeriesRecord> = groups.into_values().collect();
    for r in &mut records {
        r.files.sort();
    }
    records.sort_by(|a, b| {
        (a.patient_id.as_str(), a.series_uid.as_str())
            .cmp(&(b.patient_id.as_str(), b.series_uid.as_str()))
    });
    Ok(ScanReport {
        records,
        skipped,
        examined: paths.len(),
    })
}
