//! Synthetic chest CT phantoms with known lung extent.

mod fixture;

pub use fixture::{FixtureEncoding, SliceFixture};

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dicom::{HuSlice, Orientation, SortedSeries};
use crate::error::{Error, Result};

pub const LUNG_HU: i32 = -850;
pub const LUNG_NOISE: i32 = 20;
pub const TISSUE_HU: (i32, i32) = (0, 60);
/// Raw = HU + 1024 in the written files.
pub const RESCALE_INTERCEPT: i32 = -1024;
pub const SLICE_SPACING_MM: f64 = 1.25;

/// Axis-aligned ellipse in pixel coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse {
    pub center_row: f64,
    pub center_col: f64,
    pub semi_rows: f64,
    pub semi_cols: f64,
}

impl Ellipse {
    pub fn contains(&self, row: usize, col: usize) -> bool {
        let dr = (row as f64 - self.center_row) / self.semi_rows;
        let dc = (col as f64 - self.center_col) / self.semi_cols;
        dr * dr + dc * dc <= 1.0
    }

    /// Smallest distance from the bounding box to the image border.
    pub fn margin(&self, rows: usize, cols: usize) -> f64 {
        let top = self.center_row - self.semi_rows;
        let left = self.center_col - self.semi_cols;
        let bottom = (rows - 1) as f64 - (self.center_row + self.semi_rows);
        let right = (cols - 1) as f64 - (self.center_col + self.semi_cols);
        top.min(left).min(bottom).min(right)
    }
}

/// A series of soft-tissue slices with two low-density ellipses on an
/// inclusive slice range.
#[derive(Clone, Debug, PartialEq)]
pub struct PhantomSpec {
    pub patient_id: String,
    pub series_uid: String,
    pub slices: usize,
    pub rows: usize,
    pub cols: usize,
    pub lung_slices: Option<(usize, usize)>,
    pub lungs: [Ellipse; 2],
    pub seed: u64,
}

fn default_lungs(rows: usize, cols: usize) -> [Ellipse; 2] {
    let (r, c) = (rows as f64 / 2.0, cols as f64 / 2.0);
    let semi_rows = (rows as f64 * 0.18).round();
    let semi_cols = (cols as f64 * 0.11).round();
    let offset = semi_cols + cols as f64 * 0.04;
    [
        Ellipse {
            center_row: r,
            center_col: c - offset,
            semi_rows,
            semi_cols,
        },
        Ellipse {
            center_row: r,
            center_col: c + offset,
            semi_rows,
            semi_cols,
        },
    ]
}

impl PhantomSpec {
    /// A 512x512 phantom with fixed lung shapes.
    pub fn new(
        patient_id: &str,
        series_uid: &str,
        slices: usize,
        lung_slices: Option<(usize, usize)>,
    ) -> Self {
        Self::with_matrix(patient_id, series_uid, slices, (512, 512), lung_slices)
    }

    pub fn with_matrix(
        patient_id: &str,
        series_uid: &str,
        slices: usize,
        (rows, cols): (usize, usize),
        lung_slices: Option<(usize, usize)>,
    ) -> Self {
        if let Some((s, e)) = lung_slices {
            assert!(
                s <= e && e < slices,
                "lung range ({s}, {e}) outside {slices} slices"
            );
        }
        PhantomSpec {
            patient_id: patient_id.to_string(),
            series_uid: series_uid.to_string(),
            slices,
            rows,
            cols,
            lung_slices,
            lungs: default_lungs(rows, cols),
            seed: 0,
        }
    }

    /// Random 512x512 phantom: 64 to 140 slices, a lung run of at least
    /// `min_run` slices, semi-axes 45..=70 across and 65..=110 down, and
    /// at least `min_margin` pixels between each ellipse and the border.
    pub fn random<R: Rng>(rng: &mut R, index: usize, min_run: usize, min_margin: usize) -> Self {
        let (rows, cols) = (512usize, 512usize);
        let slices = rng.random_range(64..=140);
        let run = rng.random_range(min_run.min(slices)..=slices);
        let start = rng.random_range(0..=slices - run);

        let gap = rng.random_range(20.0..60.0);
        let mut lungs = [Ellipse {
            center_row: 0.0,
            center_col: 0.0,
            semi_rows: 0.0,
            semi_cols: 0.0,
        }; 2];
        let mut left_edge = 0.0;
        for (i, lung) in lungs.iter_mut().enumerate() {
            let semi_cols = rng.random_range(45..=70) as f64;
            let semi_rows = rng.random_range(65..=110) as f64;
            let lo = semi_rows + min_margin as f64;
            let hi = (rows - 1) as f64 - semi_rows - min_margin as f64;
            let center_row = rng.random_range(lo..=hi).round();
            let center_col = if i == 0 {
                let c = rng
                    .random_range(semi_cols + min_margin as f64..=200.0)
                    .round();
                left_edge = c + semi_cols;
                c
            } else {
                (left_edge + gap + semi_cols).round()
            };
            *lung = Ellipse {
                center_row,
                center_col,
                semi_rows,
                semi_cols,
            };
        }
        debug_assert!(lungs
            .iter()
            .all(|l| l.margin(rows, cols) >= min_margin as f64));

        PhantomSpec {
            patient_id: format!("RND{index:03}"),
            series_uid: format!("2.25.9000.{index}"),
            slices,
            rows,
            cols,
            lung_slices: Some((start, start + run - 1)),
            lungs,
            seed: rng.random(),
        }
    }

    pub fn has_lung(&self, index: usize) -> bool {
        self.lung_slices
            .is_some_and(|(s, e)| (s..=e).contains(&index))
    }

    pub fn is_lung_pixel(&self, row: usize, col: usize) -> bool {
        self.lungs.iter().any(|l| l.contains(row, col))
    }

    /// Pixels inside either ellipse on a lung slice.
    pub fn lung_pixel_count(&self) -> usize {
        (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
            .filter(|&(r, c)| self.is_lung_pixel(r, c))
            .count()
    }

    pub fn lung_fraction(&self) -> f64 {
        self.lung_pixel_count() as f64 / (self.rows * self.cols) as f64
    }

    /// Integer HU values of one slice, row-major.
    pub fn slice_hu(&self, index: usize) -> Vec<i32> {
        let mut rng = ChaCha8Rng::seed_from_u64(
            self.seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        let lung = self.has_lung(index);
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(if lung && self.is_lung_pixel(r, c) {
                    LUNG_HU + rng.random_range(-LUNG_NOISE..=LUNG_NOISE)
                } else {
                    rng.random_range(TISSUE_HU.0..=TISSUE_HU.1)
                });
            }
        }
        out
    }

    pub fn hu_slice(&self, index: usize) -> HuSlice {
        let data = self.slice_hu(index).into_iter().map(|v| v as f32).collect();
        let mut s = HuSlice::new(self.rows, self.cols, data);
        s.z = index as f64 * SLICE_SPACING_MM;
        s.instance_number = Some(index as i32 + 1);
        s.source_sop_uid = self.sop_uid(index);
        s
    }

    pub fn sop_uid(&self, index: usize) -> String {
        format!("{}.{}", self.series_uid, index + 1)
    }

    /// The phantom as an already sorted in-memory series.
    pub fn sorted_series(&self) -> SortedSeries {
        SortedSeries {
            series_uid: self.series_uid.clone(),
            patient_id: self.patient_id.clone(),
            slices: (0..self.slices).map(|i| self.hu_slice(i)).collect(),
            matrix: (self.rows, self.cols),
            orientation: Orientation::Axial,
        }
    }

    pub fn fixture(&self, index: usize, encoding: FixtureEncoding) -> SliceFixture {
        let raw: Vec<u16> = self
            .slice_hu(index)
            .into_iter()
            .map(|hu| (hu - RESCALE_INTERCEPT) as u16)
            .collect();
        let mut f = SliceFixture::ct(
            &self.series_uid,
            &self.sop_uid(index),
            self.rows as u16,
            self.cols as u16,
            &raw,
        );
        f.encoding = encoding;
        f.patient_id = Some(self.patient_id.clone());
        f.rescale_intercept = Some(RESCALE_INTERCEPT as f64);
        f.position = Some([0.0, 0.0, index as f64 * SLICE_SPACING_MM]);
        f.instance_number = Some(index as i32 + 1);
        f
    }

    /// Writes one file per slice into `dir` under shuffled names, so that
    /// directory order says nothing about slice order.
    pub fn write_files(&self, dir: &Path, encoding: FixtureEncoding) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut names: Vec<usize> = (0..self.slices).collect();
        names.shuffle(&mut ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(1)));
        let mut paths = Vec::with_capacity(self.slices);
        for (index, name) in names.into_iter().enumerate() {
            let path = dir.join(format!("IM{name:05}.dcm"));
            let bytes = self.fixture(index, encoding).to_bytes();
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            paths.push(path);
        }
        Ok(paths)
    }
}

/// A phantom written to disk together with its expected QC result.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub spec: PhantomSpec,
    pub encoding: FixtureEncoding,
    /// Expected block for accepted series.
    pub expected_block: Option<(usize, usize)>,
    /// Expected reject reason code for rejected series.
    pub expected_reason: Option<&'static str>,
}

/// Three phantoms: one accepted with lungs on slices 20..=79 of 100, one
/// with a 15-slice lung run and one with no lung at all.
pub fn demo_corpus() -> Vec<CorpusEntry> {
    let mut accepted = PhantomSpec::new("PAT001", "2.25.1001", 100, Some((20, 79)));
    accepted.seed = 11;
    let mut short = PhantomSpec::new("PAT002", "2.25.1002", 64, Some((20, 34)));
    short.seed = 12;
    let mut empty = PhantomSpec::new("PAT003", "2.25.1003", 64, None);
    empty.seed = 13;
    vec![
        CorpusEntry {
            spec: accepted,
            encoding: FixtureEncoding::ExplicitLittle,
            expected_block: Some((20, 79)),
            expected_reason: None,
        },
        CorpusEntry {
            spec: short,
            encoding: FixtureEncoding::ImplicitLittle,
            expected_block: None,
            expected_reason: Some("BLOCK_TOO_SHORT"),
        },
        CorpusEntry {
            spec: empty,
            encoding: FixtureEncoding::ExplicitLittle,
            expected_block: None,
            expected_reason: Some("NO_LUNG_BLOCK"),
        },
    ]
}

/// Writes `entries` under `root`, one directory per series.
pub fn write_corpus(root: &Path, entries: &[CorpusEntry]) -> Result<()> {
    for e in entries {
        e.spec.write_files(
            &root.join(format!("series_{}", e.spec.patient_id)),
            e.encoding,
        )?;
    }
    Ok(())
}
