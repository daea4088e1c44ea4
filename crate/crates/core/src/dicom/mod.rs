//! Minimal DICOM Part-10 ingestion for uncompressed little-endian CT.
//!
//! Only the handful of tags needed to group, order and calibrate axial CT
//! slices are decoded; everything else is skipped structurally.

mod hu;
mod parse;
mod scan;
mod series;

pub use hu::{decode_raw, hu_convert};
pub use parse::{parse_dicom_file, read_header};
pub use scan::{scan_directory, ScanReport, SeriesRecord};
pub use series::{
    assemble_series, build_sorted_series, HuSlice, Orientation, ParsedSlice, SortedSeries,
};

pub const IMPLICIT_VR_LITTLE_ENDIAN: &str = "1.2.840.10008.1.2";
pub const EXPLICIT_VR_LITTLE_ENDIAN: &str = "1.2.840.10008.1.2.1";
pub const EXPLICIT_VR_BIG_ENDIAN: &str = "1.2.840.10008.1.2.2";
pub const DEFLATED_EXPLICIT_VR_LITTLE_ENDIAN: &str = "1.2.840.10008.1.2.1.99";
pub const JPEG_BASELINE: &str = "1.2.840.10008.1.2.4.50";

/// A (group, element) pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag(pub u16, pub u16);

pub mod tags {
    use super::Tag;

    pub const TRANSFER_SYNTAX_UID: Tag = Tag(0x0002, 0x0010);
    pub const SOP_INSTANCE_UID: Tag = Tag(0x0008, 0x0018);
    pub const PATIENT_ID: Tag = Tag(0x0010, 0x0020);
    pub const SERIES_INSTANCE_UID: Tag = Tag(0x0020, 0x000E);
    pub const INSTANCE_NUMBER: Tag = Tag(0x0020, 0x0013);
    pub const IMAGE_POSITION_PATIENT: Tag = Tag(0x0020, 0x0032);
    pub const IMAGE_ORIENTATION_PATIENT: Tag = Tag(0x0020, 0x0037);
    pub const ROWS: Tag = Tag(0x0028, 0x0010);
    pub const COLUMNS: Tag = Tag(0x0028, 0x0011);
    pub const BITS_ALLOCATED: Tag = Tag(0x0028, 0x0100);
    pub const PIXEL_REPRESENTATION: Tag = Tag(0x0028, 0x0103);
    pub const RESCALE_INTERCEPT: Tag = Tag(0x0028, 0x1052);
    pub const RESCALE_SLOPE: Tag = Tag(0x0028, 0x1053);
    pub const PIXEL_DATA: Tag = Tag(0x7FE0, 0x0010);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PixelRepresentation {
    Unsigned,
    Signed,
}

/// The subset of a DICOM header the pipeline needs.
#[derive(Clone, Debug, PartialEq)]
pub struct DicomHeader {
    pub series_uid: String,
    pub sop_uid: String,
    pub patient_id: String,
    pub transfer_syntax_uid: String,
    pub rows: u16,
    pub cols: u16,
    pub bits_allocated: u16,
    pub pixel_representation: PixelRepresentation,
    pub rescale_slope: f64,
    pub rescale_intercept: f64,
    pub image_position_patient: Option<[f64; 3]>,
    pub image_orientation_patient: Option<[f64; 6]>,
    pub instance_number: Option<i32>,
}

impl DicomHeader {
    pub fn pixel_count(&self) -> usize {
        self.rows as usize * self.cols as usize
    }

    /// Bytes of pixel payload implied by rows, columns and bits allocated.
    pub fn payload_len(&self) -> usize {
        self.pixel_count() * (self.bits_allocated as usize / 8)
    }
}

pub fn is_supported_transfer_syntax(uid: &str) -> bool {
    uid == IMPLICIT_VR_LITTLE_ENDIAN || uid == EXPLICIT_VR_LITTLE_ENDIAN
}
