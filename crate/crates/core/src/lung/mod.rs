//! Per-slice lung detection.
//!
//! A slice is thresholded to the parenchymal HU range, cleaned by a disk
//! opening then closing, stripped of small connected components, and finally
//! flagged as lung-containing when the surviving mask covers enough of the
//! field of view.

mod bitplane;
mod components;
mod mask;
pub mod morphology;

use bitplane::BitPlane;
pub use components::{filter_components, label_components, Connectivity};
pub use mask::BinaryMask;
pub use morphology::{morph_close, morph_open};

use crate::dicom::HuSlice;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LungDetectConfig {
    pub hu_low: f64,
    pub hu_high: f64,
    pub open_radius: usize,
    pub close_radius: usize,
    pub min_region_frac: f64,
    pub min_lung_ratio: f64,
    pub connectivity: Connectivity,
}

impl Default for LungDetectConfig {
    fn default() -> Self {
        LungDetectConfig {
            hu_low: -950.0,
            hu_high: -700.0,
            open_radius: 2,
            close_radius: 5,
            min_region_frac: 0.01,
            min_lung_ratio: 0.05,
            connectivity: Connectivity::Eight,
        }
    }
}

impl LungDetectConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hu_low.is_nan() || self.hu_high.is_nan() || self.hu_low >= self.hu_high {
            return Err(Error::Config(format!(
                "hu_low ({}) must be below hu_high ({})",
                self.hu_low, self.hu_high
            )));
        }
        if self.open_radius < 1 || self.close_radius < 1 {
            return Err(Error::Config("morphology radii must be at least 1".into()));
        }
        for (name, v) in [
            ("min_region_frac", self.min_region_frac),
            ("min_lung_ratio", self.min_lung_ratio),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SliceLungStats {
    pub mask: BinaryMask,
    /// Foreground pixels of `mask` over rows * cols.
    pub area_ratio: f64,
    pub lung_flag: bool,
}

/// Marks pixels inside the closed interval `[low, high]`.
pub fn threshold_hu(slice: &HuSlice, low: f64, high: f64) -> BinaryMask {
    let data = slice
        .data
        .iter()
        .map(|&v| {
            let v = v as f64;
            low <= v && v <= high
        })
        .collect();
    BinaryMask::from_vec(slice.rows, slice.cols, data)
}

/// Threshold, open, close, drop small components, then measure.
pub fn detect_lung_slice(slice: &HuSlice, cfg: &LungDetectConfig) -> SliceLungStats {
    let (low, high) = (cfg.hu_low, cfg.hu_high);
    let plane = BitPlane::from_fn(slice.rows, slice.cols, |i| {
        let v = slice.data[i] as f64;
        low <= v && v <= high
    });
    let mask = if plane.any() {
        let plane = morphology::open_bits(&plane, cfg.open_radius);
        let plane = morphology::close_bits(&plane, cfg.close_radius);
        filter_components(&plane.to_mask(), cfg.min_region_frac, cfg.connectivity)
    } else {
        plane.to_mask()
    };
    let area_ratio = mask.count() as f64 / mask.len() as f64;
    SliceLungStats {
        lung_flag: area_ratio >= cfg.min_lung_ratio,
        area_ratio,
        mask,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(v: f32) -> HuSlice {
        HuSlice::new(512, 512, vec![v; 512 * 512])
    }

    #[test]
    fn threshold_bounds_are_inclusive() {
        assert!(threshold_hu(&constant(-800.0), -950.0, -700.0).all());
        assert!(!threshold_hu(&constant(0.0), -950.0, -700.0).any());
        let s = HuSlice::new(1, 4, vec![-950.0, -951.0, -700.0, -699.0]);
        assert_eq!(
            threshold_hu(&s, -950.0, -700.0).into_vec(),
            vec![true, false, true, false]
        );
    }

    #[test]
    fn constant_slices() {
        let cfg = LungDetectConfig::default();
        let lung = detect_lung_slice(&constant(-800.0), &cfg);
        assert_eq!(lung.area_ratio, 1.0);
        assert!(lung.lung_flag);
        let tissue = detect_lung_slice(&constant(40.0), &cfg);
        assert_eq!(tissue.area_ratio, 0.0);
        assert!(!tissue.lung_flag);
    }

    #[test]
    fn config_validation() {
        assert!(LungDetectConfig::default().validate().is_ok());
        let bad = LungDetectConfig {
            hu_low: -700.0,
            hu_high: -950.0,
            ..Default::default()
        };
        assert_eq!(bad.validate().unwrap_err().code(), "CONFIG_ERROR");
        let bad = LungDetectConfig {
            min_lung_ratio: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
