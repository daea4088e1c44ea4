//! C ABI for the virtual-eyes library.
//!
//! Every fallible function returns a [`VeStatus`]. After a non-zero status,
//! [`ve_last_error_message`] describes the failure on the calling thread.
//! Handles are opaque, created by the `*_read`, `*_from_hu` and `*_load`
//! functions and released with the matching `*_free`.
//!
//! # Safety
//!
//! Pointer arguments must be either null (reported as
//! `VE_STATUS_NULL_POINTER` unless documented as optional) or valid for the
//! stated number of elements. Strings are NUL-terminated UTF-8. Handles must
//! come from this library and must not be used after being freed.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::slice;

use virtual_eyes::config::PipelineConfig;
use virtual_eyes::dicom::{hu_convert, HuSlice, ParsedSlice};
use virtual_eyes::lung::{detect_lung_slice, Connectivity, LungDetectConfig};
use virtual_eyes::pipeline::run_qc;
use virtual_eyes::qc::extract_longest_block;
use virtual_eyes::scoring::{load_scores_csv, pool_table, write_pooled_csv, Pooling, ScoreTable};
use virtual_eyes::stats;
use virtual_eyes::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Panic = 3,
    Io = 10,
    NotDicom = 11,
    UnsupportedTransferSyntax = 12,
    Malformed = 13,
    MissingGeometry = 14,
    MalformedSeries = 15,
    DuplicateOutput = 16,
    Schema = 17,
    LabelConflict = 18,
    Range = 19,
    EmptyInput = 20,
    DegenerateLabels = 21,
    DegenerateVariance = 22,
    LengthMismatch = 23,
    Config = 24,
}

impl From<&Error> for VeStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => VeStatus::Io,
            Error::NotDicom => VeStatus::NotDicom,
            Error::UnsupportedTransferSyntax(_) => VeStatus::UnsupportedTransferSyntax,
            Error::Malformed(_) => VeStatus::Malformed,
            Error::MissingGeometry(_) => VeStatus::MissingGeometry,
            Error::MalformedSeries(_) => VeStatus::MalformedSeries,
            Error::DuplicateOutput(_) => VeStatus::DuplicateOutput,
            Error::Schema { .. } => VeStatus::Schema,
            Error::LabelConflict(_) => VeStatus::LabelConflict,
            Error::Range(_) => VeStatus::Range,
            Error::EmptyInput(_) => VeStatus::EmptyInput,
            Error::DegenerateLabels { .. } => VeStatus::DegenerateLabels,
            Error::DegenerateVariance => VeStatus::DegenerateVariance,
            Error::LengthMismatch(_) => VeStatus::LengthMismatch,
            Error::Config(_) => VeStatus::Config,
        }
    }
}

/// Status and message handed back across the boundary.
struct Fail(VeStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(VeStatus::from(&e), format!("{} ({})", e, e.code()))
    }
}

type FfiResult<T = ()> = Result<T, Fail>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> FfiResult) -> VeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VeStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            VeStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(VeStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: impl Into<String>) -> Fail {
    Fail(VeStatus::InvalidArgument, message.into())
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &str) -> FfiResult<&'a mut [T]> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn path_arg(p: *const c_char, what: &str) -> FfiResult<PathBuf> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn labels_arg(p: *const u8, len: usize) -> FfiResult<Vec<bool>> {
    input(p, len, "labels")?
        .iter()
        .map(|&l| match l {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(invalid(format!("label {other} is not 0 or 1"))),
        })
        .collect()
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ve_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code, such as `"DEGENERATE_VARIANCE"`.
#[no_mangle]
pub extern "C" fn ve_status_name(status: VeStatus) -> *const c_char {
    let name: &'static CStr = match status {
        VeStatus::Ok => c"OK",
        VeStatus::NullPointer => c"NULL_POINTER",
        VeStatus::InvalidArgument => c"INVALID_ARGUMENT",
        VeStatus::Panic => c"PANIC",
        VeStatus::Io => c"IO_ERROR",
        VeStatus::NotDicom => c"NOT_DICOM",
        VeStatus::UnsupportedTransferSyntax => c"UNSUPPORTED_TRANSFER_SYNTAX",
        VeStatus::Malformed => c"MALFORMED",
        VeStatus::MissingGeometry => c"MISSING_GEOMETRY",
        VeStatus::MalformedSeries => c"MALFORMED_SERIES",
        VeStatus::DuplicateOutput => c"DUPLICATE_OUTPUT",
        VeStatus::Schema => c"SCHEMA_ERROR",
        VeStatus::LabelConflict => c"LABEL_CONFLICT",
        VeStatus::Range => c"RANGE_ERROR",
        VeStatus::EmptyInput => c"EMPTY_INPUT",
        VeStatus::DegenerateLabels => c"DEGENERATE_LABELS",
        VeStatus::DegenerateVariance => c"DEGENERATE_VARIANCE",
        VeStatus::LengthMismatch => c"LENGTH_MISMATCH",
        VeStatus::Config => c"CONFIG_ERROR",
    };
    name.as_ptr()
}

#[no_mangle]
pub extern "C" fn ve_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// One axial slice in Hounsfield units.
pub struct VeSlice(HuSlice);

/// Reads one DICOM file and converts its pixels to HU.
#[no_mangle]
pub unsafe extern "C" fn ve_slice_read_dicom(
    path: *const c_char,
    out: *mut *mut VeSlice,
) -> VeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let path = path_arg(path, "path")?;
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let parsed = ParsedSlice::from_bytes(&bytes, path.display().to_string())?;
        let rows = parsed.header.rows as usize;
        let cols = parsed.header.cols as usize;
        *out = Box::into_raw(Box::new(VeSlice(HuSlice::new(rows, cols, parsed.hu))));
        Ok(())
    })
}

/// Copies `rows * cols` row-major HU values into a new slice.
#[no_mangle]
pub unsafe extern "C" fn ve_slice_from_hu(
    rows: usize,
    cols: usize,
    hu: *const f32,
    out: *mut *mut VeSlice,
) -> VeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let n = rows
            .checked_mul(cols)
            .filter(|&n| n > 0)
            .ok_or_else(|| invalid("slice dimensions must be positive"))?;
        let data = input(hu, n, "hu")?.to_vec();
        *out = Box::into_raw(Box::new(VeSlice(HuSlice::new(rows, cols, data))));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ve_slice_free(slice: *mut VeSlice) {
    if !slice.is_null() {
        drop(Box::from_raw(slice));
    }
}

/// Number of rows, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ve_slice_rows(slice: *const VeSlice) -> usize {
    slice.as_ref().map_or(0, |s| s.0.rows)
}

/// Number of columns, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ve_slice_cols(slice: *const VeSlice) -> usize {
    slice.as_ref().map_or(0, |s| s.0.cols)
}

/// Copies the HU values; `len` must equal rows * cols.
#[no_mangle]
pub unsafe extern "C" fn ve_slice_copy_hu(
    slice: *const VeSlice,
    out: *mut f32,
    len: usize,
) -> VeStatus {
    guard(|| {
        let s = &slice.as_ref().ok_or_else(|| null("slice"))?.0;
        if len != s.data.len() {
            return Err(
                Error::LengthMismatch(format!("buffer {len} vs slice {}", s.data.len())).into(),
            );
        }
        output(out, len, "out")?.copy_from_slice(&s.data);
        Ok(())
    })
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VeLungConfig {
    pub hu_low: f64,
    pub hu_high: f64,
    pub open_radius: usize,
    pub close_radius: usize,
    pub min_region_frac: f64,
    pub min_lung_ratio: f64,
    /// 4 or 8.
    pub connectivity: u32,
}

impl From<LungDetectConfig> for VeLungConfig {
    fn from(c: LungDetectConfig) -> Self {
        VeLungConfig {
            hu_low: c.hu_low,
            hu_high: c.hu_high,
            open_radius: c.open_radius,
            close_radius: c.close_radius,
            min_region_frac: c.min_region_frac,
            min_lung_ratio: c.min_lung_ratio,
            connectivity: match c.connectivity {
                Connectivity::Four => 4,
                Connectivity::Eight => 8,
            },
        }
    }
}

fn lung_config(c: &VeLungConfig) -> FfiResult<LungDetectConfig> {
    let connectivity = match c.connectivity {
        4 => Connectivity::Four,
        8 => Connectivity::Eight,
        other => {
            return Err(Error::Config(format!("connectivity must be 4 or 8, got {other}")).into())
        }
    };
    let cfg = LungDetectConfig {
        hu_low: c.hu_low,
        hu_high: c.hu_high,
        open_radius: c.open_radius,
        close_radius: c.close_radius,
        min_region_frac: c.min_region_frac,
        min_lung_ratio: c.min_lung_ratio,
        connectivity,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[no_mangle]
pub unsafe extern "C" fn ve_lung_config_default(out: *mut VeLungConfig) -> VeStatus {
    guard(|| {
        *out_ref(out, "out")? = LungDetectConfig::default().into();
        Ok(())
    })
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VeLungStats {
    pub area_ratio: f64,
    pub lung_flag: bool,
}

/// Segments the lung on one slice. `config` may be null for the defaults.
/// When `mask` is non-null it receives rows * cols bytes of 0/1, and
/// `mask_len` must match.
#[no_mangle]
pub unsafe extern "C" fn ve_detect_lung_slice(
    slice: *const VeSlice,
    config: *const VeLungConfig,
    out: *mut VeLungStats,
    mask: *mut u8,
    mask_len: usize,
) -> VeStatus {
    guard(|| {
        let s = &slice.as_ref().ok_or_else(|| null("slice"))?.0;
        let out = out_ref(out, "out")?;
        let cfg = match config.as_ref() {
            Some(c) => lung_config(c)?,
            None => LungDetectConfig::default(),
        };
        if !mask.is_null() && mask_len != s.data.len() {
            return Err(Error::LengthMismatch(format!(
                "mask {mask_len} vs slice {}",
                s.data.len()
            ))
            .into());
        }
        let stats = detect_lung_slice(s, &cfg);
        if !mask.is_null() {
            for (dst, &src) in output(mask, mask_len, "mask")?
                .iter_mut()
                .zip(stats.mask.as_slice())
            {
                *dst = src as u8;
            }
        }
        *out = VeLungStats {
            area_ratio: stats.area_ratio,
            lung_flag: stats.lung_flag,
        };
        Ok(())
    })
}

/// `hu[i] = slope * raw[i] + intercept` for `n` values.
#[no_mangle]
pub unsafe extern "C" fn ve_hu_convert(
    raw: *const i32,
    n: usize,
    slope: f64,
    intercept: f64,
    hu: *mut f32,
) -> VeStatus {
    guard(|| {
        let values = hu_convert(input(raw, n, "raw")?, slope, intercept);
        output(hu, n, "hu")?.copy_from_slice(&values);
        Ok(())
    })
}

/// Longest run of non-zero flags, inclusive bounds. `found` is set to
/// false, and the bounds left untouched, when no flag is set.
#[no_mangle]
pub unsafe extern "C" fn ve_extract_longest_block(
    flags: *const u8,
    n: usize,
    found: *mut bool,
    start: *mut usize,
    end: *mut usize,
) -> VeStatus {
    guard(|| {
        let found = out_ref(found, "found")?;
        let start = out_ref(start, "start")?;
        let end = out_ref(end, "end")?;
        let flags: Vec<bool> = input(flags, n, "flags")?.iter().map(|&f| f != 0).collect();
        *found = false;
        if let Some((s, e)) = extract_longest_block(&flags) {
            (*found, *start, *end) = (true, s, e);
        }
        Ok(())
    })
}

/// Labels are 0 or 1.
#[no_mangle]
pub unsafe extern "C" fn ve_auc(
    scores: *const f64,
    labels: *const u8,
    n: usize,
    out: *mut f64,
) -> VeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = stats::auc(input(scores, n, "scores")?, &labels_arg(labels, n)?)?;
        Ok(())
    })
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VeDeLong {
    pub auc_a: f64,
    pub auc_b: f64,
    pub delta: f64,
    pub variance: f64,
    pub z: f64,
    pub p_two_sided: f64,
}

#[no_mangle]
pub unsafe extern "C" fn ve_delong(
    scores_a: *const f64,
    scores_b: *const f64,
    labels: *const u8,
    n: usize,
    out: *mut VeDeLong,
) -> VeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let r = stats::delong_test(
            input(scores_a, n, "scores_a")?,
            input(scores_b, n, "scores_b")?,
            &labels_arg(labels, n)?,
        )?;
        *out = VeDeLong {
            auc_a: r.auc_a,
            auc_b: r.auc_b,
            delta: r.delta,
            variance: r.variance,
            z: r.z,
            p_two_sided: r.p_two_sided,
        };
        Ok(())
    })
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VeKs {
    pub d: f64,
    pub p: f64,
}

#[no_mangle]
pub unsafe extern "C" fn ve_ks(
    a: *const f64,
    n_a: usize,
    b: *const f64,
    n_b: usize,
    out: *mut VeKs,
) -> VeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let r = stats::ks_two_sample(input(a, n_a, "a")?, input(b, n_b, "b")?)?;
        *out = VeKs { d: r.d, p: r.p };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ve_brier(
    probs: *const f64,
    labels: *const u8,
    n: usize,
    out: *mut f64,
) -> VeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = stats::brier(input(probs, n, "probs")?, &labels_arg(labels, n)?)?;
        Ok(())
    })
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VeBlandAltman {
    pub bias: f64,
    pub sd: f64,
    pub loa_low: f64,
    pub loa_high: f64,
}

#[no_mangle]
pub unsafe extern "C" fn ve_bland_altman(
    a: *const f64,
    b: *const f64,
    n: usize,
    out: *mut VeBlandAltman,
) -> VeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let r = stats::bland_altman(input(a, n, "a")?, input(b, n, "b")?)?;
        *out = VeBlandAltman {
            bias: r.bias,
            sd: r.sd,
            loa_low: r.loa_low,
            loa_high: r.loa_high,
        };
        Ok(())
    })
}

/// Validated slice-score table.
pub struct VeScoreTable(ScoreTable);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VePoolMethod {
    Mean = 0,
    Max = 1,
    TopK = 2,
}

fn pooling(method: VePoolMethod, k: usize) -> FfiResult<Pooling> {
    Ok(match method {
        VePoolMethod::Mean => Pooling::Mean,
        VePoolMethod::Max => Pooling::Max,
        VePoolMethod::TopK => Pooling::from_parts("topk", Some(k))?,
    })
}

#[no_mangle]
pub unsafe extern "C" fn ve_scores_load(
    path: *const c_char,
    out: *mut *mut VeScoreTable,
) -> VeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let table = load_scores_csv(&path_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(VeScoreTable(table)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ve_scores_free(table: *mut VeScoreTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of slice rows, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ve_scores_row_count(table: *const VeScoreTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.len())
}

/// Number of distinct patients, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ve_scores_patient_count(table: *const VeScoreTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.by_patient().len())
}

/// Pools to one score per patient, ordered by patient id. `capacity` must
/// be at least the patient count; `labels` may be null. `k` is ignored
/// unless the method is top-k.
#[no_mangle]
pub unsafe extern "C" fn ve_scores_pool(
    table: *const VeScoreTable,
    method: VePoolMethod,
    k: usize,
    scores: *mut f64,
    labels: *mut u8,
    capacity: usize,
) -> VeStatus {
    guard(|| {
        let t = &table.as_ref().ok_or_else(|| null("table"))?.0;
        let pooled = pool_table(t, pooling(method, k)?)?;
        if capacity < pooled.len() {
            return Err(Error::LengthMismatch(format!(
                "capacity {capacity} below {} patients",
                pooled.len()
            ))
            .into());
        }
        let scores = output(scores, pooled.len(), "scores")?;
        for (dst, p) in scores.iter_mut().zip(&pooled) {
            *dst = p.score;
        }
        if !labels.is_null() {
            for (dst, p) in output(labels, pooled.len(), "labels")?
                .iter_mut()
                .zip(&pooled)
            {
                *dst = p.label;
            }
        }
        Ok(())
    })
}

/// Pools and writes the pooled CSV to `path`.
#[no_mangle]
pub unsafe extern "C" fn ve_scores_write_pooled(
    table: *const VeScoreTable,
    method: VePoolMethod,
    k: usize,
    path: *const c_char,
) -> VeStatus {
    guard(|| {
        let t = &table.as_ref().ok_or_else(|| null("table"))?.0;
        let path = path_arg(path, "path")?;
        write_pooled_csv(&pool_table(t, pooling(method, k)?)?, &path)?;
        Ok(())
    })
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VeQcSummary {
    pub total_series: u64,
    pub accepted_series: u64,
    pub total_raw_images: u64,
    pub total_kept_images: u64,
    pub discard_proportion: f64,
    pub skipped_files: u64,
}

/// Runs the whole QC pipeline. `config_path` may be null for the defaults;
/// `workers` of 0 keeps the configured worker count.
#[no_mangle]
pub unsafe extern "C" fn ve_run_qc(
    input_dir: *const c_char,
    output_dir: *const c_char,
    config_path: *const c_char,
    workers: usize,
    overwrite: bool,
    montage: bool,
    out: *mut VeQcSummary,
) -> VeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let input_dir = path_arg(input_dir, "input_dir")?;
        let output_dir = path_arg(output_dir, "output_dir")?;
        let mut cfg = if config_path.is_null() {
            PipelineConfig::default()
        } else {
            PipelineConfig::load(Path::new(&path_arg(config_path, "config_path")?))?
        };
        if workers > 0 {
            cfg.workers = workers;
        }
        cfg.overwrite |= overwrite;
        let run = run_qc(&input_dir, &output_dir, &cfg, montage)?;
        let s = run.summary;
        *out = VeQcSummary {
            total_series: s.total_series,
            accepted_series: s.accepted_series,
            total_raw_images: s.total_raw_images,
            total_kept_images: s.total_kept_images,
            discard_proportion: s.discard_proportion,
            skipped_files: run.skipped_files as u64,
        };
        Ok(())
    })
}
