//! Persisting accepted lung blocks.
//!
//! Stored voxels are raw HU rounded to int16; the lung window only affects
//! the optional PGM montage used for visual review.

mod montage;
mod npy;

pub use montage::{montage_dimensions, write_montage_pgm};
pub use npy::{npy_header, read_npy_int16, write_npy_int16, NpyVolume};

use std::fs;
use std::path::{Path, PathBuf};

use crate::dicom::SortedSeries;
use crate::error::{Error, Result};
use crate::qc::SeriesOutcome;

pub const BLOCK_FILE_NAME: &str = "lung_block.npy";

/// A contiguous run of slices as int16 HU, shape (depth, rows, cols).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LungBlock {
    pub voxels: Vec<i16>,
    pub depth: usize,
    pub rows: usize,
    pub cols: usize,
    pub series_uid: String,
    pub patient_id: String,
    pub source_block: (usize, usize),
}

impl LungBlock {
    pub fn slice(&self, index: usize) -> &[i16] {
        let n = self.rows * self.cols;
        &self.voxels[index * n..(index + 1) * n]
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.depth, self.rows, self.cols]
    }
}

/// Rounds half away from zero and saturates to the int16 range.
pub fn quantize_hu(v: f32) -> i16 {
    let r = v.round();
    if r >= i16::MAX as f32 {
        i16::MAX
    } else if r <= i16::MIN as f32 {
        i16::MIN
    } else {
        r as i16
    }
}

/// Extracts slices `start..=end` of a sorted series as int16 HU.
pub fn quantize_block(series: &SortedSeries, (start, end): (usize, usize)) -> LungBlock {
    assert!(
        start <= end && end < series.len(),
        "block ({start}, {end}) outside a {}-slice series",
        series.len()
    );
    let (rows, cols) = series.matrix;
    let mut voxels = Vec::with_capacity((end - start + 1) * rows * cols);
    for s in &series.slices[start..=end] {
        voxels.extend(s.data.iter().map(|&v| quantize_hu(v)));
    }
    LungBlock {
        voxels,
        depth: end - start + 1,
        rows,
        cols,
        series_uid: series.series_uid.clone(),
        patient_id: series.patient_id.clone(),
        source_block: (start, end),
    }
}

/// Makes an identifier safe to use as one path component.
///
/// Bytes outside `[A-Za-z0-9._-]` are percent-encoded, as are the reserved
/// names `.` and `..`; the empty string becomes a lone `%`, which no other
/// input can produce. The mapping is injective.
pub fn path_component(id: &str) -> String {
    if id.is_empty() {
        return "%".to_string();
    }
    if id == "." || id == ".." {
        return id.bytes().map(|b| format!("%{b:02X}")).collect();
    }
    let mut out = String::with_capacity(id.len());
    for b in id.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_' | b'-') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

pub fn series_dir(out_root: &Path, patient_id: &str, series_uid: &str) -> PathBuf {
    out_root
        .join(path_component(patient_id))
        .join(path_component(series_uid))
}

/// Writes `out_root/<patient_id>/<series_uid>/lung_block.npy`.
///
/// # Panics
///
/// If `outcome` is not accepted.
pub fn export_block(
    outcome: &SeriesOutcome,
    block: &LungBlock,
    out_root: &Path,
    overwrite: bool,
) -> Result<PathBuf> {
    assert!(
        outcome.is_accepted(),
        "export_block called for rejected series {}",
        outcome.series_uid
    );
    let dir = series_dir(out_root, &outcome.patient_id, &outcome.series_uid);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let path = dir.join(BLOCK_FILE_NAME);
    write_npy_int16(block, &path, overwrite)?;
    Ok(path)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowConfig {
    pub center: f64,
    pub width: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            center: -500.0,
            width: 1500.0,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width.is_nan()
            || self.width <= 0.0
            || !self.center.is_finite()
            || !self.width.is_finite()
        {
            return Err(Error::Config(format!(
                "window width must be positive, got {}",
                self.width
            )));
        }
        Ok(())
    }

    pub fn lower(&self) -> f64 {
        self.center - self.width / 2.0
    }

    /// Maps one HU value to a display grey level.
    pub fn apply(&self, hu: f64) -> u8 {
        let lower = self.lower();
        let v = hu.clamp(lower, lower + self.width);
        ((v - lower) / self.width * 255.0).round() as u8
    }
}

/// Clips to the window and rescales linearly onto 0..=255.
pub fn window_rescale<T: Copy + Into<f64>>(values: &[T], cfg: &WindowConfig) -> Vec<u8> {
    values.iter().map(|&v| cfg.apply(v.into())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_rounding_and_clamp() {
        assert_eq!(quantize_hu(-1023.6), -1024);
        assert_eq!(quantize_hu(40000.0), 32767);
        assert_eq!(quantize_hu(-40000.0), -32768);
        assert_eq!(quantize_hu(0.0), 0);
        assert_eq!(quantize_hu(2.5), 3);
        assert_eq!(quantize_hu(-2.5), -3);
    }

    #[test]
    fn window_examples() {
        let w = WindowConfig::default();
        assert_eq!(
            window_rescale(&[-1250.0f64, 250.0, -500.0], &w),
            vec![0, 255, 128]
        );
        assert_eq!(window_rescale(&[-3000i16, 3000], &w), vec![0, 255]);
    }

    #[test]
    fn path_components() {
        assert_eq!(path_component("100012"), "100012");
        assert_eq!(path_component("1.2.3"), "1.2.3");
        assert_eq!(path_component("a/b"), "a%2Fb");
        assert_eq!(path_component("%"), "%25");
        assert_eq!(path_component(""), "%");
        assert_eq!(path_component(".."), "%2E%2E");
        assert_eq!(
            series_dir(Path::new("out"), "100012", "1.2.3").join(BLOCK_FILE_NAME),
            Path::new("out/100012/1.2.3/lung_block.npy")
        );
    }
}
