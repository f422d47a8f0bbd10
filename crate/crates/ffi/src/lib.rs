//! C interface to `pdrcon`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `_free` function. Every fallible call returns a
//! [`PdrconStatus`]; on failure a description is kept per thread and can be
//! read with [`pdrcon_last_error_message`]. Strings are returned by copying
//! into a caller buffer: the required size (including the terminating NUL) is
//! always written to `needed`, and `PDRCON_STATUS_BUFFER_TOO_SMALL` is
//! returned when `buf_len` is short.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pdrcon::fit::{fit_pdcg, FitOptions, SampleMoments};
use pdrcon::graph::{PairedVertexSet, Pdcg};
use pdrcon::lattice::count_models;
use pdrcon::nalgebra::DMatrix;
use pdrcon::search::{backward_search, Procedure, SearchConfig};
use pdrcon::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PdrconStatus {
    Ok = 0,
    InvalidArgument = 1,
    NotAPdcg = 2,
    Incompatible = 3,
    VertexSetMismatch = 4,
    NumericDomain = 5,
    FitFailed = 6,
    Ingestion = 7,
    Io = 8,
    Parse = 9,
    NullPointer = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

/// Search procedure selector for [`pdrcon_select`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PdrconProcedure {
    Coherent = 0,
    Naive = 1,
}

/// A coloured graph for paired data.
pub struct PdrconModel(Pdcg);

/// A sample covariance matrix with its sample size.
pub struct PdrconMoments(SampleMoments);

/// Summary of a maximum-likelihood fit.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PdrconFit {
    pub loglik: f64,
    pub deviance: f64,
    pub p_value: f64,
    pub df: usize,
    pub iterations: usize,
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> PdrconStatus {
    match e {
        Error::InvalidArgument(_) => PdrconStatus::InvalidArgument,
        Error::NotAPdcg(_) => PdrconStatus::NotAPdcg,
        Error::Incompatible(_) => PdrconStatus::Incompatible,
        Error::VertexSetMismatch(..) => PdrconStatus::VertexSetMismatch,
        Error::NumericDomain(_) => PdrconStatus::NumericDomain,
        Error::FitFailed(_) => PdrconStatus::FitFailed,
        Error::Ingestion(_) => PdrconStatus::Ingestion,
        Error::Io(_) => PdrconStatus::Io,
        Error::Json(_) | Error::Csv(_) => PdrconStatus::Parse,
    }
}

fn fail(status: PdrconStatus, msg: impl Into<String>) -> PdrconStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F>(f: F) -> PdrconStatus
where
    F: FnOnce() -> Result<(), PdrconStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            PdrconStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(PdrconStatus::Panic, msg)
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, PdrconStatus>;
}

impl<T> OrStatus<T> for pdrcon::Result<T> {
    fn or_status(self) -> Result<T, PdrconStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), PdrconStatus> {
    if p.is_null() {
        Err(fail(PdrconStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn copy_out(s: &str, buf: *mut c_char, buf_len: usize, needed: *mut usize) -> Result<(), PdrconStatus> {
    let bytes = s.as_bytes();
    if !needed.is_null() {
        *needed = bytes.len() + 1;
    }
    if buf.is_null() || buf_len < bytes.len() + 1 {
        return Err(fail(
            PdrconStatus::BufferTooSmall,
            format!("buffer of {buf_len} bytes, need {}", bytes.len() + 1),
        ));
    }
    ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, bytes.len());
    *buf.add(bytes.len()) = 0;
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pdrcon_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the calling thread's last error message into `buf`.
///
/// # Safety
/// `buf` must be null or valid for `buf_len` bytes; `needed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pdrcon_last_error_message(buf: *mut c_char, buf_len: usize, needed: *mut usize) -> PdrconStatus {
    // reading the message must not replace it
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    let status = match copy_out(&msg, buf, buf_len, needed) {
        Ok(()) => PdrconStatus::Ok,
        Err(s) => s,
    };
    set_error(msg);
    status
}

/// Number of models on `p` variables, as a decimal string.
///
/// # Safety
/// As for [`pdrcon_last_error_message`].
#[no_mangle]
pub unsafe extern "C" fn pdrcon_count_models(p: u32, buf: *mut c_char, buf_len: usize, needed: *mut usize) -> PdrconStatus {
    guard(|| {
        let n = count_models(p).or_status()?;
        copy_out(&n.to_string(), buf, buf_len, needed)
    })
}

/// Parses a model file (quadruplet JSON) into a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pdrcon_model_from_json(json: *const c_char, out: *mut *mut PdrconModel) -> PdrconStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| fail(PdrconStatus::Parse, format!("json is not utf-8: {e}")))?;
        let g = Pdcg::from_json(text).or_status()?;
        *out = Box::into_raw(Box::new(PdrconModel(g)));
        Ok(())
    })
}

/// The saturated model on `p` variables.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pdrcon_model_unit(p: u32, out: *mut *mut PdrconModel) -> PdrconStatus {
    guard(|| {
        non_null(out, "out")?;
        let vset = PairedVertexSet::new(p).or_status()?;
        *out = Box::into_raw(Box::new(PdrconModel(Pdcg::unit(vset))));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pdrcon_model_free(model: *mut PdrconModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Canonical model JSON.
///
/// # Safety
/// `model` must be a live handle; buffer rules as above.
#[no_mangle]
pub unsafe extern "C" fn pdrcon_model_to_json(
    model: *const PdrconModel,
    buf: *mut c_char,
    buf_len: usize,
    needed: *mut usize,
) -> PdrconStatus {
    guard(|| {
        non_null(model, "model")?;
        copy_out(&(*model).0.to_json(), buf, buf_len, needed)
    })
}

/// Number of colour classes, i.e. free parameters.
///
/// # Safety
/// `model` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pdrcon_model_num_classes(model: *const PdrconModel, out: *mut usize) -> PdrconStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        *out = (*model).0.num_classes();
        Ok(())
    })
}

/// Wraps a `p x p` covariance matrix given in row-major order.
///
/// # Safety
/// `cov` must point to `p * p` readable doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pdrcon_moments_new(cov: *const f64, p: usize, n: usize, out: *mut *mut PdrconMoments) -> PdrconStatus {
    guard(|| {
        non_null(cov, "cov")?;
        non_null(out, "out")?;
        let values = std::slice::from_raw_parts(cov, p * p);
        let m = SampleMoments::new(DMatrix::from_row_slice(p, p, values), n).or_status()?;
        *out = Box::into_raw(Box::new(PdrconMoments(m)));
        Ok(())
    })
}

/// # Safety
/// `moments` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pdrcon_moments_free(moments: *mut PdrconMoments) {
    if !moments.is_null() {
        drop(Box::from_raw(moments));
    }
}

/// Fits `model` and tests it against the saturated model.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pdrcon_fit(
    model: *const PdrconModel,
    moments: *const PdrconMoments,
    out: *mut PdrconFit,
) -> PdrconStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(moments, "moments")?;
        non_null(out, "out")?;
        let fit = fit_pdcg(&(*model).0, &(*moments).0, &FitOptions::default()).or_status()?;
        *out = PdrconFit {
            loglik: fit.loglik,
            deviance: fit.deviance,
            p_value: fit.p_value,
            df: fit.df,
            iterations: fit.iterations,
            converged: fit.converged,
        };
        Ok(())
    })
}

/// Backward elimination from the saturated model. `max_steps` of 0 means
/// the library default. Writes a new model handle and the number of fitted
/// models.
///
/// # Safety
/// `moments` must be live; `out_model` writable; `fitted_models` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pdrcon_select(
    moments: *const PdrconMoments,
    procedure: PdrconProcedure,
    alpha: f64,
    max_steps: usize,
    out_model: *mut *mut PdrconModel,
    fitted_models: *mut usize,
) -> PdrconStatus {
    guard(|| {
        non_null(moments, "moments")?;
        non_null(out_model, "out_model")?;
        let mut config = SearchConfig { alpha, ..Default::default() };
        if max_steps > 0 {
            config.max_steps = max_steps;
        }
        let proc_ = match procedure {
            PdrconProcedure::Coherent => Procedure::Coherent,
            PdrconProcedure::Naive => Procedure::Naive,
        };
        let (g, trace) = backward_search(proc_, &(*moments).0, &config).or_status()?;
        if !fitted_models.is_null() {
            *fitted_models = trace.fitted_models;
        }
        *out_model = Box::into_raw(Box::new(PdrconModel(g)));
        Ok(())
    })
}
