//! Plain-text pipeline configuration: `key = value` lines, `#` comments.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::export::WindowConfig;
use crate::lung::{Connectivity, LungDetectConfig};
use crate::qc::GateConfig;

pub const CONFIG_ENV: &str = "VIRTUAL_EYES_CONFIG";

pub const KEYS: [&str; 15] = [
    "hu_low",
    "hu_high",
    "open_radius",
    "close_radius",
    "min_region_frac",
    "min_lung_ratio",
    "connectivity",
    "min_slices",
    "required_matrix",
    "min_block",
    "window_center",
    "window_width",
    "workers",
    "overwrite",
    "montage_columns",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineConfig {
    pub detect: LungDetectConfig,
    pub gate: GateConfig,
    pub window: WindowConfig,
    pub workers: usize,
    pub overwrite: bool,
    pub montage_columns: usize,
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            detect: LungDetectConfig::default(),
            gate: GateConfig::default(),
            window: WindowConfig::default(),
            workers: default_workers(),
            overwrite: false,
            montage_columns: 8,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: invalid value {value:?} for {key}")))
}

impl PipelineConfig {
    /// Applies `key = value` lines on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        let mut seen = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Config(format!("line {line_no}: expected key = value")))?;
            if !KEYS.contains(&key) {
                return Err(Error::Config(format!(
                    "line {line_no}: unknown key {key:?}"
                )));
            }
            if seen.contains(&key) {
                return Err(Error::Config(format!(
                    "line {line_no}: duplicate key {key:?}"
                )));
            }
            seen.push(key);
            cfg.set(key, value, line_no)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        match key {
            "hu_low" => self.detect.hu_low = parse_value(key, value, line)?,
            "hu_high" => self.detect.hu_high = parse_value(key, value, line)?,
            "open_radius" => self.detect.open_radius = parse_value(key, value, line)?,
            "close_radius" => self.detect.close_radius = parse_value(key, value, line)?,
            "min_region_frac" => self.detect.min_region_frac = parse_value(key, value, line)?,
            "min_lung_ratio" => self.detect.min_lung_ratio = parse_value(key, value, line)?,
            "connectivity" => {
                let n: u32 = parse_value(key, value, line)?;
                self.detect.connectivity = Connectivity::from_neighbours(n).ok_or_else(|| {
                    Error::Config(format!("line {line}: connectivity must be 4 or 8"))
                })?;
            }
            "min_slices" => self.gate.min_slices = parse_value(key, value, line)?,
            "required_matrix" => {
                let (r, c) = value.split_once(['x', 'X']).ok_or_else(|| {
                    Error::Config(format!("line {line}: matrix must look like 512x512"))
                })?;
                self.gate.required_matrix = (
                    parse_value(key, r.trim(), line)?,
                    parse_value(key, c.trim(), line)?,
                );
            }
            "min_block" => self.gate.min_block = parse_value(key, value, line)?,
            "window_center" => self.window.center = parse_value(key, value, line)?,
            "window_width" => self.window.width = parse_value(key, value, line)?,
            "workers" => self.workers = parse_value(key, value, line)?,
            "overwrite" => self.overwrite = parse_value(key, value, line)?,
            "montage_columns" => self.montage_columns = parse_value(key, value, line)?,
            _ => unreachable!("key list and setter disagree on {key}"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.detect.validate()?;
        self.gate.validate()?;
        self.window.validate()?;
        if self.workers < 1 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.montage_columns < 1 {
            return Err(Error::Config("montage_columns must be at least 1".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

impl fmt::Display for PipelineConfig {
    /// Renders every key, in a form [`PipelineConfig::parse`] accepts.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.detect;
        writeln!(f, "hu_low = {}", d.hu_low)?;
        writeln!(f, "hu_high = {}", d.hu_high)?;
        writeln!(f, "open_radius = {}", d.open_radius)?;
        writeln!(f, "close_radius = {}", d.close_radius)?;
        writeln!(f, "min_region_frac = {}", d.min_region_frac)?;
        writeln!(f, "min_lung_ratio = {}", d.min_lung_ratio)?;
        writeln!(f, "connectivity = {}", d.connectivity.neighbours())?;
        writeln!(f, "min_slices = {}", self.gate.min_slices)?;
        let (r, c) = self.gate.required_matrix;
        writeln!(f, "required_matrix = {r}x{c}")?;
        writeln!(f, "min_block = {}", self.gate.min_block)?;
        writeln!(f, "window_center = {}", self.window.center)?;
        writeln!(f, "window_width = {}", self.window.width)?;
        writeln!(f, "workers = {}", self.workers)?;
        writeln!(f, "overwrite = {}", self.overwrite)?;
        writeln!(f, "montage_columns = {}", self.montage_columns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_published_constants() {
        let c = PipelineConfig::default();
        assert_eq!(c.gate.min_slices, 64);
        assert_eq!(c.gate.required_matrix, (512, 512));
        assert_eq!(c.gate.min_block, 20);
        assert_eq!((c.detect.hu_low, c.detect.hu_high), (-950.0, -700.0));
        assert_eq!((c.detect.open_radius, c.detect.close_radius), (2, 5));
        assert_eq!(c.detect.min_region_frac, 0.01);
        assert_eq!(c.detect.min_lung_ratio, 0.05);
        assert_eq!((c.window.center, c.window.width), (-500.0, 1500.0));
        assert!(c.workers >= 1);
    }

    #[test]
    fn parses_overrides_and_comments() {
        let c = PipelineConfig::parse(
            "# tuned\nmin_block = 25  # longer\nconnectivity=4\nrequired_matrix = 256x256\noverwrite = true\n",
        )
        .unwrap();
        assert_eq!(c.gate.min_block, 25);
        assert_eq!(c.detect.connectivity, Connectivity::Four);
        assert_eq!(c.gate.required_matrix, (256, 256));
        assert!(c.overwrite);
    }

    #[test]
    fn rejects_unknown_duplicate_and_invalid() {
        for text in [
            "min_blok = 3",
            "min_block = 3\nmin_block = 4",
            "connectivity = 6",
            "hu_low = -600",
            "workers = 0",
            "just words",
        ] {
            assert_eq!(
                PipelineConfig::parse(text).unwrap_err().code(),
                "CONFIG_ERROR",
                "{text}"
            );
        }
    }

    #[test]
    fn display_round_trips() {
        let mut c = PipelineConfig {
            workers: 3,
            ..Default::default()
        };
        c.detect.min_lung_ratio = 0.07;
        assert_eq!(PipelineConfig::parse(&c.to_string()).unwrap(), c);
    }
}
