//! C interface to `kseries`.
//!
//! Every function returns a [`KsStatus`]. On failure a message is kept per
//! thread and can be read with [`ks_last_error_message`]. Objects are opaque
//! handles owned by the caller and released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kseries::distributions::ReferenceDistribution;
use kseries::estimator::{fit_gram_charlier, fit_multivariate, DensityEstimate, MomentTensor};
use kseries::loopsim::{parse, simulate_moments, SimulationSpec};
use kseries::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    InsufficientMoments = 5,
    MomentMatrixNotPd = 6,
    Quadrature = 7,
    DimensionMismatch = 8,
    SingularSystem = 9,
    InvalidDistribution = 10,
    InvalidMoments = 11,
    DegenerateEstimate = 12,
    NumericOverflow = 13,
    Io = 14,
    Panic = 15,
}

impl From<&Error> for KsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InsufficientMoments { .. } => KsStatus::InsufficientMoments,
            Error::MomentMatrixNotPD { .. } | Error::NonPositiveVariance(_) => KsStatus::MomentMatrixNotPd,
            Error::QuadratureFailure { .. } => KsStatus::Quadrature,
            Error::DegreeMismatch(_) | Error::DimensionMismatch { .. } => KsStatus::DimensionMismatch,
            Error::SingularSystem(_) => KsStatus::SingularSystem,
            Error::InvalidDistribution(_) => KsStatus::InvalidDistribution,
            Error::InvalidMoments(_) | Error::EmptyData => KsStatus::InvalidMoments,
            Error::DegenerateEstimate(_) => KsStatus::DegenerateEstimate,
            Error::Parse(_) => KsStatus::Parse,
            Error::NumericOverflow { .. } => KsStatus::NumericOverflow,
            Error::Io(_) | Error::Csv(_) => KsStatus::Io,
            Error::Json(_) | Error::InvalidArgument(_) => KsStatus::InvalidArgument,
        }
    }
}

/// Moment tensor (univariate moments are the one-dimensional case).
pub struct KsMoments(MomentTensor);

pub struct KsReference(ReferenceDistribution);

pub struct KsEstimate(DensityEstimate);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: KsStatus, msg: impl Into<String>) -> KsStatus {
    set_error(msg.into());
    status
}

fn guard<F: FnOnce() -> Result<(), KsStatus>>(f: F) -> KsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(KsStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: kseries::Result<T>) -> Result<T, KsStatus> {
    r.map_err(|e| fail(KsStatus::from(&e), e.to_string()))
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, KsStatus> {
    if s.is_null() {
        return Err(fail(KsStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(KsStatus::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, KsStatus> {
    p.as_ref().ok_or_else(|| fail(KsStatus::NullPointer, format!("{what} is null")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), KsStatus> {
    if out.is_null() {
        return Err(fail(KsStatus::NullPointer, "output pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], KsStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(KsStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn give_string(out: *mut *mut c_char, s: String) -> Result<(), KsStatus> {
    if out.is_null() {
        return Err(fail(KsStatus::NullPointer, "output pointer is null"));
    }
    *out = CString::new(s)
        .map_err(|_| fail(KsStatus::InvalidArgument, "string contains NUL"))?
        .into_raw();
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn ks_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ks_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ks_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Moment tensor from `values` in row-major order over `degrees`, i.e.
/// `prod(degrees[j] + 1)` values with `values[0] == 1`.
///
/// # Safety
/// `degrees` must hold `ndims` entries and `values` `nvalues` entries.
#[no_mangle]
pub unsafe extern "C" fn ks_moments_new(
    degrees: *const usize,
    ndims: usize,
    values: *const f64,
    nvalues: usize,
    out: *mut *mut KsMoments,
) -> KsStatus {
    guard(|| {
        let d = slice(degrees, ndims, "degrees")?.to_vec();
        let v = slice(values, nvalues, "values")?.to_vec();
        let m = lift(MomentTensor::new(d, v))?;
        store(out, KsMoments(m))
    })
}

/// # Safety
/// `json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ks_moments_from_json(json: *const c_char, out: *mut *mut KsMoments) -> KsStatus {
    guard(|| {
        let v = lift(serde_json::from_str(text(json)?).map_err(Error::from))?;
        store(out, KsMoments(lift(MomentTensor::from_json(&v))?))
    })
}

/// # Safety
/// `m` must be a live handle; `out_json` receives a string for
/// [`ks_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ks_moments_to_json(m: *const KsMoments, out_json: *mut *mut c_char) -> KsStatus {
    guard(|| {
        let m = handle(m, "moments")?;
        give_string(out_json, lift(m.0.to_json())?.to_string())
    })
}

/// Number of stored values; `0` for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_moments_len(m: *const KsMoments) -> usize {
    m.as_ref().map_or(0, |m| m.0.values().len())
}

/// Copies the values into `values`, which must hold [`ks_moments_len`] entries.
///
/// # Safety
/// `m` must be a live handle and `values` writable for `len` entries.
#[no_mangle]
pub unsafe extern "C" fn ks_moments_values(m: *const KsMoments, values: *mut f64, len: usize) -> KsStatus {
    guard(|| {
        let m = handle(m, "moments")?;
        let src = m.0.values();
        if values.is_null() {
            return Err(fail(KsStatus::NullPointer, "values is null"));
        }
        if len != src.len() {
            return Err(fail(
                KsStatus::DimensionMismatch,
                format!("buffer holds {len} values, moments have {}", src.len()),
            ));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), values, len);
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ks_moments_free(m: *mut KsMoments) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Runs a loop program `replications` times for `iterations` steps and
/// returns the sample moments of every output up to `degree`.
///
/// # Safety
/// `program` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ks_simulate_moments(
    program: *const c_char,
    iterations: u64,
    replications: u64,
    seed: u64,
    degree: usize,
    out: *mut *mut KsMoments,
) -> KsStatus {
    guard(|| {
        let p = lift(parse(text(program)?).map_err(Error::from))?;
        let dims = p.output_names().len();
        let spec = SimulationSpec::new(p, iterations, replications, seed).with_degrees(&vec![degree; dims]);
        store(out, KsMoments(lift(simulate_moments(&spec))?))
    })
}

/// Reference distribution from its JSON descriptor, e.g.
/// `{"family":"uniform","support":[0,1]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ks_reference_from_json(json: *const c_char, out: *mut *mut KsReference) -> KsStatus {
    guard(|| store(out, KsReference(lift(ReferenceDistribution::from_json_str(text(json)?))?)))
}

/// # Safety
/// `r` must be NULL or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ks_reference_free(r: *mut KsReference) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// K-series fit with one reference per moment dimension.
///
/// # Safety
/// `references` must hold `nrefs` live handles.
#[no_mangle]
pub unsafe extern "C" fn ks_fit(
    moments: *const KsMoments,
    references: *const *const KsReference,
    nrefs: usize,
    out: *mut *mut KsEstimate,
) -> KsStatus {
    guard(|| {
        let m = handle(moments, "moments")?;
        let refs = slice(references, nrefs, "references")?
            .iter()
            .map(|r| handle(*r, "reference").map(|r| r.0.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        store(out, KsEstimate(lift(fit_multivariate(&m.0, &refs))?))
    })
}

/// Gram-Charlier fit of univariate moments.
///
/// # Safety
/// `moments` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_fit_gram_charlier(moments: *const KsMoments, out: *mut *mut KsEstimate) -> KsStatus {
    guard(|| {
        let m = handle(moments, "moments")?;
        if m.0.dims() != 1 {
            return Err(fail(KsStatus::DimensionMismatch, "Gram-Charlier needs univariate moments"));
        }
        let v = lift(m.0.marginal(0))?;
        store(out, KsEstimate(lift(fit_gram_charlier(&v))?))
    })
}

/// # Safety
/// `json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ks_estimate_from_json(json: *const c_char, out: *mut *mut KsEstimate) -> KsStatus {
    guard(|| {
        let v = lift(serde_json::from_str(text(json)?).map_err(Error::from))?;
        store(out, KsEstimate(lift(DensityEstimate::from_json(&v))?))
    })
}

/// # Safety
/// `est` must be a live handle; `out_json` receives a string for
/// [`ks_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ks_estimate_to_json(est: *const KsEstimate, out_json: *mut *mut c_char) -> KsStatus {
    guard(|| {
        let e = handle(est, "estimate")?;
        give_string(out_json, lift(e.0.to_json())?.to_string())
    })
}

/// Number of variables; `0` for NULL.
///
/// # Safety
/// `est` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_estimate_dims(est: *const KsEstimate) -> usize {
    est.as_ref().map_or(0, |e| e.0.dims())
}

/// Density at `npoints` points stored row-major in `points`
/// (`npoints * dims` values). Points outside the support give 0.
///
/// # Safety
/// `points` must hold `npoints * dims` values and `out` `npoints` slots.
#[no_mangle]
pub unsafe extern "C" fn ks_estimate_eval(
    est: *const KsEstimate,
    points: *const f64,
    npoints: usize,
    out: *mut f64,
) -> KsStatus {
    guard(|| {
        let e = handle(est, "estimate")?;
        let k = e.0.dims();
        let flat = slice(points, npoints * k, "points")?;
        if out.is_null() && npoints > 0 {
            return Err(fail(KsStatus::NullPointer, "out is null"));
        }
        for (i, p) in flat.chunks_exact(k).enumerate() {
            *out.add(i) = lift(e.0.eval(p))?;
        }
        Ok(())
    })
}

/// Integral of the estimate over its support.
///
/// # Safety
/// `est` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ks_estimate_normalization(est: *const KsEstimate, out: *mut f64) -> KsStatus {
    guard(|| {
        let e = handle(est, "estimate")?;
        let v = lift(e.0.normalization())?;
        if out.is_null() {
            return Err(fail(KsStatus::NullPointer, "out is null"));
        }
        *out = v;
        Ok(())
    })
}

/// # Safety
/// `est` must be NULL or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ks_estimate_free(est: *mut KsEstimate) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}
