//! C interface to the `nles` twin-experiment harness.
//!
//! Objects are opaque handles created and destroyed by this library. Every
//! fallible call returns an [`NlesStatus`]; on failure the thread-local
//! message from [`nles_last_error_message`] describes what went wrong.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nles::harness::{self, ErrorSeries, TwinExperiment};
use nles::interpolant::InterpolantSpec;
use nles::solver::{self, ConditionStatus, Stepper};
use nles::spectral::{Grid, LAMBDA1};
use nles::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlesStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    InvalidParameter = 4,
    Divergence = 5,
    Io = 6,
    BufferTooSmall = 7,
    Numerical = 8,
    Panic = 9,
}

/// Columns of an error series.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlesSeriesColumn {
    Time = 0,
    L2Abs = 1,
    L2Rel = 2,
    H1Rel = 3,
    EnergyResidual = 4,
}

/// Synchronization conditions evaluated for the nudged configuration.
/// `*_lhs` fields are NaN when the condition does not apply.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NlesConditionReport {
    pub grashof: f64,
    pub mu: f64,
    pub mu_threshold: f64,
    pub sync_h_lhs: f64,
    pub well_posed_h_lhs: f64,
    pub nu: f64,
    /// Number of conditions reported as violated.
    pub warnings: u32,
}

/// Opaque experiment handle.
pub struct NlesExperiment {
    inner: TwinExperiment,
}

/// Opaque error-series handle.
pub struct NlesSeries {
    inner: ErrorSeries,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> NlesStatus {
    match e {
        Error::Config(_) => NlesStatus::Config,
        Error::Divergence { .. } => NlesStatus::Divergence,
        Error::Io { .. } => NlesStatus::Io,
        Error::NoDecayingWindow
        | Error::TooFewPoints { .. }
        | Error::DegenerateFit(_)
        | Error::EmptySamples => NlesStatus::Numerical,
        _ => NlesStatus::InvalidParameter,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (NlesStatus, String)>) -> NlesStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NlesStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NlesStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (NlesStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (NlesStatus, String) {
    (NlesStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (NlesStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (NlesStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn exp_ref<'a>(
    p: *const NlesExperiment,
) -> Result<&'a TwinExperiment, (NlesStatus, String)> {
    p.as_ref().map(|e| &e.inner).ok_or_else(|| null("experiment"))
}

unsafe fn exp_mut<'a>(
    p: *mut NlesExperiment,
) -> Result<&'a mut TwinExperiment, (NlesStatus, String)> {
    p.as_mut().map(|e| &mut e.inner).ok_or_else(|| null("experiment"))
}

unsafe fn series_ref<'a>(p: *const NlesSeries) -> Result<&'a ErrorSeries, (NlesStatus, String)> {
    p.as_ref().map(|s| &s.inner).ok_or_else(|| null("series"))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn nles_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nles_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an experiment document (TOML). On success `*out` owns a new handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nles_experiment_parse(
    text: *const c_char,
    out: *mut *mut NlesExperiment,
) -> NlesStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(text, "text")?;
        let inner = nles::config::parse_experiment(text).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(NlesExperiment { inner }));
        Ok(())
    })
}

/// Writes the canonical document of `exp` into `buf` (NUL-terminated).
/// `*needed` receives the required size including the terminator; a
/// too-small buffer yields `BUFFER_TOO_SMALL` and leaves `buf` untouched.
///
/// # Safety
/// `buf` must hold `len` bytes (or be NULL with `len == 0`).
#[no_mangle]
pub unsafe extern "C" fn nles_experiment_serialize(
    exp: *const NlesExperiment,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> NlesStatus {
    guard(|| {
        let text = nles::config::serialize_experiment(exp_ref(exp)?).map_err(lib_err)?;
        let bytes = text.as_bytes();
        if !needed.is_null() {
            *needed = bytes.len() + 1;
        }
        if len < bytes.len() + 1 {
            return Err((
                NlesStatus::BufferTooSmall,
                format!("need {} bytes, got {len}", bytes.len() + 1),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), bytes.len());
        *buf.add(bytes.len()) = 0;
        Ok(())
    })
}

/// # Safety
/// `exp` must come from [`nles_experiment_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nles_experiment_free(exp: *mut NlesExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// Seeds above `i64::MAX` are rejected so the experiment stays serializable.
///
/// # Safety
/// `exp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nles_experiment_set_seed(exp: *mut NlesExperiment, seed: u64) -> NlesStatus {
    guard(|| {
        let e = exp_mut(exp)?;
        let mut next = e.clone();
        next.seed = seed;
        next.validate().map_err(lib_err)?;
        *e = next;
        Ok(())
    })
}

/// Sets the final time of both runs.
///
/// # Safety
/// `exp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nles_experiment_set_t_end(exp: *mut NlesExperiment, t_end: f64) -> NlesStatus {
    guard(|| {
        let e = exp_mut(exp)?;
        let mut next = e.clone();
        next.reference.t_end = t_end;
        next.nudged.t_end = t_end;
        next.validate().map_err(lib_err)?;
        *e = next;
        Ok(())
    })
}

/// Sets the turbulence viscosity of the nudged run.
///
/// # Safety
/// `exp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nles_experiment_set_nu_bar(exp: *mut NlesExperiment, nu_bar: f64) -> NlesStatus {
    guard(|| {
        let e = exp_mut(exp)?;
        let mut next = e.clone();
        next.nudged.nu_bar = nu_bar;
        next.validate().map_err(lib_err)?;
        *e = next;
        Ok(())
    })
}

/// Runs the twin experiment. On success `*out` owns a new series handle.
///
/// # Safety
/// `exp` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nles_run_twin(exp: *const NlesExperiment, out: *mut *mut NlesSeries) -> NlesStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let series = harness::run_twin(exp_ref(exp)?).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(NlesSeries { inner: series }));
        Ok(())
    })
}

/// Evaluates the synchronization conditions of the nudged configuration.
///
/// # Safety
/// `exp` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nles_validate_conditions(
    exp: *const NlesExperiment,
    out: *mut NlesConditionReport,
) -> NlesStatus {
    guard(|| {
        let e = exp_ref(exp)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = &e.nudged;
        let stepper = Stepper::new(*cfg, e.grid).map_err(lib_err)?;
        let g = solver::grashof(stepper.forcing(), cfg.nu, LAMBDA1).map_err(lib_err)?;
        let report = solver::validate_da_conditions(cfg, e.grid.dim(), g, None);
        let lhs = |name: &str| report.check(name).map_or(f64::NAN, |c| c.lhs);
        *out = NlesConditionReport {
            grashof: g,
            mu: cfg.mu,
            mu_threshold: report
                .check(solver::COND_MU_GRASHOF)
                .map_or(f64::NAN, |c| c.rhs),
            sync_h_lhs: lhs(solver::COND_SYNC_H),
            well_posed_h_lhs: lhs(solver::COND_WELL_POSED_H),
            nu: cfg.nu,
            warnings: report
                .checks
                .iter()
                .filter(|c| c.status == ConditionStatus::Warn)
                .count() as u32,
        };
        Ok(())
    })
}

/// Observed wave vectors (counting `k` and `-k`, excluding 0) of a Fourier
/// truncation with cutoff `k_c` on an `n^dim` grid, within the dealiased band.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nles_observed_mode_count(
    dim: u32,
    n: u32,
    k_c: u32,
    out: *mut usize,
) -> NlesStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if k_c == 0 {
            return Err((NlesStatus::InvalidParameter, "k_c must be >= 1".into()));
        }
        let grid = Grid::new(dim as usize, n as usize).map_err(lib_err)?;
        *out = InterpolantSpec::fourier(k_c).observed_mode_count(grid);
        Ok(())
    })
}

/// Number of records in `series` (0 for NULL).
///
/// # Safety
/// `series` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nles_series_len(series: *const NlesSeries) -> usize {
    series.as_ref().map_or(0, |s| s.inner.len())
}

/// Copies one column into `buf`, which must hold `len >= nles_series_len` values.
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nles_series_column(
    series: *const NlesSeries,
    column: NlesSeriesColumn,
    buf: *mut f64,
    len: usize,
) -> NlesStatus {
    guard(|| {
        let s = series_ref(series)?;
        let data = match column {
            NlesSeriesColumn::Time => &s.times,
            NlesSeriesColumn::L2Abs => &s.l2_abs,
            NlesSeriesColumn::L2Rel => &s.l2_rel,
            NlesSeriesColumn::H1Rel => &s.h1_rel,
            NlesSeriesColumn::EnergyResidual => &s.energy_residuals,
        };
        if len < data.len() {
            return Err((
                NlesStatus::BufferTooSmall,
                format!("need {} values, got {len}", data.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
        Ok(())
    })
}

/// Time average of the absolute L² error over the final `tail_fraction`.
///
/// # Safety
/// `series` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nles_series_plateau(
    series: *const NlesSeries,
    tail_fraction: f64,
    out: *mut f64,
) -> NlesStatus {
    guard(|| {
        let s = series_ref(series)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = harness::plateau_estimate(s, tail_fraction).map_err(lib_err)?;
        Ok(())
    })
}

/// Exponential decay rate of the absolute L² error before the plateau.
///
/// # Safety
/// `series` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nles_series_decay_rate(series: *const NlesSeries, out: *mut f64) -> NlesStatus {
    guard(|| {
        let s = series_ref(series)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = harness::decay_rate_fit(s, None).map_err(lib_err)?;
        Ok(())
    })
}

/// Writes the series as CSV.
///
/// # Safety
/// `series` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nles_series_write_csv(series: *const NlesSeries, path: *const c_char) -> NlesStatus {
    guard(|| {
        let s = series_ref(series)?;
        let path = str_arg(path, "path")?;
        nles::output::write_series(s, Path::new(path)).map_err(lib_err)
    })
}

/// # Safety
/// `series` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nles_series_free(series: *mut NlesSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}
