use std::cmp::Ordering;
use std::fs;

use super::{decode_raw, hu_convert, parse_dicom_file, DicomHeader, SeriesRecord};
use crate::error::{Error, Result};

/// One axial slice in Hounsfield units, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct HuSlice {
    pub data: Vec<f32>,
    pub rows: usize,
    pub cols: usize,
    /// Superior-inferior position in mm; the instance number when the
    /// series carries no ImagePositionPatient.
    pub z: f64,
    pub instance_number: Option<i32>,
    pub source_sop_uid: String,
}

impl HuSlice {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "slice data does not match {rows}x{cols}"
        );
        HuSlice {
            data,
            rows,
            cols,
            z: 0.0,
            instance_number: None,
            source_sop_uid: String::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Axial,
    NotAxial,
    /// At least one slice lacks ImageOrientationPatient; accepted with a warning.
    Missing,
}

impl Orientation {
    const TOLERANCE: f64 = 0.01;

    pub fn classify(cosines: &[f64; 6]) -> Orientation {
        let axial = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        if cosines
            .iter()
            .zip(axial)
            .all(|(c, a)| (c - a).abs() <= Self::TOLERANCE)
        {
            Orientation::Axial
        } else {
            Orientation::NotAxial
        }
    }
}

/// A CT series with slices in ascending z.
#[derive(Clone, Debug, PartialEq)]
pub struct SortedSeries {
    pub series_uid: String,
    pub patient_id: String,
    pub slices: Vec<HuSlice>,
    pub matrix: (usize, usize),
    pub orientation: Orientation,
}

impl SortedSeries {
    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }
}

/// A decoded file awaiting assembly into a series.
#[derive(Clone, Debug)]
pub struct ParsedSlice {
    pub header: DicomHeader,
    pub hu: Vec<f32>,
    /// Where the slice came from; the last-resort ordering key.
    pub source: String,
}

impl ParsedSlice {
    pub fn from_bytes(bytes: &[u8], source: impl Into<String>) -> Result<Self> {
        let (header, payload) = parse_dicom_file(bytes)?;
        let raw = decode_raw(&header, payload);
        let hu = hu_convert(&raw, header.rescale_slope, header.rescale_intercept);
        Ok(ParsedSlice {
            header,
            hu,
            source: source.into(),
        })
    }
}

fn cmp_instance(a: Option<i32>, b: Option<i32>) -> Ordering {
    match (a, b) {
        (Some(a), Some(b)) => a.cmp(&b),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

/// Orders parsed slices along z and checks that they form one consistent
/// volume.
///
/// When every slice has ImagePositionPatient the order is (z, instance
/// number); otherwise every slice must carry an instance number and that
/// alone orders the series. SOP instance UID and source name break any
/// remaining ties so the result does not depend on input order.
pub fn build_sorted_series(
    series_uid: &str,
    patient_id: &str,
    mut parsed: Vec<ParsedSlice>,
) -> Result<SortedSeries> {
    let first = parsed
        .first()
        .ok_or_else(|| Error::MalformedSeries(format!("{series_uid}: no slices")))?;
    let matrix = (first.header.rows as usize, first.header.cols as usize);
    if let Some(odd) = parsed
        .iter()
        .find(|p| (p.header.rows as usize, p.header.cols as usize) != matrix)
    {
        return Err(Error::MalformedSeries(format!(
            "{series_uid}: mixed matrix sizes {}x{} and {}x{}",
            matrix.0, matrix.1, odd.header.rows, odd.header.cols
        )));
    }
    if let Some(bad) = parsed.iter().find(|p| p.hu.iter().any(|v| !v.is_finite())) {
        return Err(Error::MalformedSeries(format!(
            "{series_uid}: non-finite HU in {}",
            bad.source
        )));
    }

    if let Some(bare) = parsed
        .iter()
        .find(|p| p.header.image_position_patient.is_none() && p.header.instance_number.is_none())
    {
        return Err(Error::MissingGeometry(bare.source.clone()));
    }
    let by_position = parsed
        .iter()
        .all(|p| p.header.image_position_patient.is_some());
    if !by_position {
        if let Some(p) = parsed.iter().find(|p| p.header.instance_number.is_none()) {
            return Err(Error::MissingGeometry(format!(
                "{}: no instance number while other slices lack a position",
                p.source
            )));
        }
    }
    let z_of = |p: &ParsedSlice| -> f64 {
        if by_position {
            p.header.image_position_patient.map_or(0.0, |pos| pos[2])
        } else {
            p.header.instance_number.unwrap_or_default() as f64
        }
    };

    parsed.sort_by(|a, b| {
        z_of(a)
            .total_cmp(&z_of(b))
            .then_with(|| cmp_instance(a.header.instance_number, b.header.instance_number))
            .then_with(|| a.header.sop_uid.cmp(&b.header.sop_uid))
            .then_with(|| a.source.cmp(&b.source))
    });

    let orientation = parsed.iter().fold(Orientation::Axial, |acc, p| {
        match (
            acc,
            p.header
                .image_orientation_patient
                .map(|o| Orientation::classify(&o)),
        ) {
            (Orientation::NotAxial, _) | (_, Some(Orientation::NotAxial)) => Orientation::NotAxial,
            (Orientation::Missing, _) | (_, None) => Orientation::Missing,
            _ => Orientation::Axial,
        }
    });

    let slices = parsed
        .into_iter()
        .map(|p| {
            let z = z_of(&p);
            HuSlice {
                data: p.hu,
                rows: matrix.0,
                cols: matrix.1,
                z,
                instance_number: p.header.instance_number,
                source_sop_uid: p.header.sop_uid,
            }
        })
        .collect();

    Ok(SortedSeries {
        series_uid: series_uid.to_string(),
        patient_id: patient_id.to_string(),
        slices,
        matrix,
        orientation,
    })
}

/// Reads, decodes and orders every file of a series.
///
/// A compressed transfer syntax anywhere in the series surfaces as
/// `UnsupportedTransferSyntax`; any other unreadable or malformed file turns
/// the whole series into `MalformedSeries` instead of silently dropping it.
pub fn assemble_series(record: &SeriesRecord) -> Result<SortedSeries> {
    let mut files = record.files.clone();
    files.sort();
    let mut parsed = Vec::with_capacity(files.len());
    for path in &files {
        let source = path.display().to_string();
        let bytes = fs::read(path).map_err(|e| Error::MalformedSeries(format!("{source}: {e}")))?;
        match ParsedSlice::from_bytes(&bytes, source.clone()) {
            Ok(p) => parsed.push(p),
            Err(e @ Error::UnsupportedTransferSyntax(_)) => return Err(e),
            Err(e) => return Err(Error::MalformedSeries(format!("{source}: {e}"))),
        }
    }
    build_sorted_series(&record.series_uid, &record.patient_id, parsed)
}
