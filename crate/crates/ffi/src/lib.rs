//! C interface to saved surrogates, the reference models and the cost ledger.
//!
//! Every function returns an [`RmfnnStatus`]; on failure the message is kept
//! per thread and read back with [`rmfnn_last_error_message`]. Panics are
//! caught at the boundary and reported as [`RmfnnStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rmfnn::problems::ProblemId;
use rmfnn::surrogate::{load_bundle, Bundle, Surrogate};
use rmfnn::uq::{cost_totals, mc_estimate, CostInputs};
use rmfnn::{Error, ErrorCategory};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmfnnStatus {
    Ok = 0,
    /// Bad argument, configuration or unsupported request.
    InvalidArgument = 1,
    /// Non-finite values during training or evaluation.
    Numerical = 2,
    /// File missing or unreadable, or malformed content.
    Io = 3,
    NullPointer = 4,
    Panic = 5,
}

/// A surrogate loaded from a bundle directory.
pub struct RmfnnBundle {
    inner: Bundle,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RmfnnCostInputs {
    pub w_hf: f64,
    pub w_lf: f64,
    pub w_dnn: f64,
    pub w_resnn: f64,
    pub w_t1: f64,
    pub w_t2: f64,
    pub n_i: u64,
    pub n: u64,
    pub n_theta: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RmfnnCostTotals {
    pub w_rmfnn: f64,
    pub w_hfm: f64,
    pub w_hfnn: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> RmfnnStatus {
    match e.category() {
        ErrorCategory::Usage => RmfnnStatus::InvalidArgument,
        ErrorCategory::Numerical => RmfnnStatus::Numerical,
        ErrorCategory::Io => RmfnnStatus::Io,
    }
}

struct Fail(RmfnnStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(RmfnnStatus::NullPointer, format!("{what} is null"))
}

/// Run `f`, translating errors and panics into a status and the last-error message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RmfnnStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RmfnnStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RmfnnStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(RmfnnStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn bundle_arg<'a>(p: *const RmfnnBundle) -> Result<&'a RmfnnBundle, Fail> {
    p.as_ref().ok_or_else(|| null("bundle"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rmfnn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the calling thread's last error message into `buf` (NUL terminated,
/// truncated to `len - 1` bytes). Returns the full message length without the
/// terminator, or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rmfnn_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Load the bundle saved in directory `path`. Free it with [`rmfnn_bundle_free`].
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rmfnn_bundle_load(path: *const c_char, out: *mut *mut RmfnnBundle) -> RmfnnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = std::ptr::null_mut();
        let path = str_arg(path, "path")?;
        let inner = load_bundle(Path::new(path))?;
        *out = Box::into_raw(Box::new(RmfnnBundle { inner }));
        Ok(())
    })
}

/// # Safety
/// `bundle` must be null or a handle from [`rmfnn_bundle_load`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn rmfnn_bundle_free(bundle: *mut RmfnnBundle) {
    if !bundle.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(bundle))));
    }
}

/// Number of parameters the bundle's surrogate expects.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmfnn_bundle_input_dim(bundle: *const RmfnnBundle, out: *mut usize) -> RmfnnStatus {
    guard(|| {
        let b = bundle_arg(bundle)?;
        *out_arg(out, "out")? = b.inner.manifest.domain.dim();
        Ok(())
    })
}

/// Evaluate the surrogate at one point of `dim` parameters.
///
/// # Safety
/// `theta` must point to `dim` values; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmfnn_bundle_predict(
    bundle: *const RmfnnBundle,
    theta: *const f64,
    dim: usize,
    out: *mut f64,
) -> RmfnnStatus {
    guard(|| {
        let b = bundle_arg(bundle)?;
        let theta = slice_arg(theta, dim, "theta")?;
        *out_arg(out, "out")? = b.inner.predict(theta)?;
        Ok(())
    })
}

/// Evaluate `n` row-major points of `dim` parameters into `out[0..n]`.
///
/// # Safety
/// `thetas` must point to `n * dim` values and `out` to `n` writable values.
#[no_mangle]
pub unsafe extern "C" fn rmfnn_bundle_predict_batch(
    bundle: *const RmfnnBundle,
    thetas: *const f64,
    n: usize,
    dim: usize,
    out: *mut f64,
) -> RmfnnStatus {
    guard(|| {
        let b = bundle_arg(bundle)?;
        let len = n
            .checked_mul(dim)
            .ok_or_else(|| Fail(RmfnnStatus::InvalidArgument, "n * dim overflows".into()))?;
        let thetas = slice_arg(thetas, len, "thetas")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let out = std::slice::from_raw_parts_mut(out, n);
        if dim == 0 {
            return Err(Fail(RmfnnStatus::InvalidArgument, "dim must be positive".into()));
        }
        for (o, t) in out.iter_mut().zip(thetas.chunks_exact(dim)) {
            *o = b.inner.predict(t)?;
        }
        Ok(())
    })
}

/// Monte-Carlo estimate of the surrogate's mean over its parameter domain.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmfnn_bundle_mc(
    bundle: *const RmfnnBundle,
    n_theta: u64,
    seed: u64,
    value: *mut f64,
    stderr: *mut f64,
) -> RmfnnStatus {
    guard(|| {
        let b = bundle_arg(bundle)?;
        let est = mc_estimate(&b.inner, &b.inner.manifest.domain, n_theta, seed)?;
        *out_arg(value, "value")? = est.value;
        if !stderr.is_null() {
            *stderr = est.stderr;
        }
        Ok(())
    })
}

/// Reference quantity of interest of a named problem (`damped`, `pulsed`,
/// `ivp` or `wave`) at one parameter point.
///
/// # Safety
/// `problem` must be a NUL-terminated string, `theta` must point to `dim` values.
#[no_mangle]
pub unsafe extern "C" fn rmfnn_problem_reference(
    problem: *const c_char,
    theta: *const f64,
    dim: usize,
    out: *mut f64,
) -> RmfnnStatus {
    guard(|| {
        let p = ProblemId::parse(str_arg(problem, "problem")?)?;
        let theta = slice_arg(theta, dim, "theta")?;
        if dim != p.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                actual: dim,
            }
            .into());
        }
        *out_arg(out, "out")? = p.reference(theta)?;
        Ok(())
    })
}

/// Estimator costs without and with network training.
///
/// # Safety
/// `inputs` must be valid; either output may be null.
#[no_mangle]
pub unsafe extern "C" fn rmfnn_cost_totals(
    inputs: *const RmfnnCostInputs,
    without_training: *mut RmfnnCostTotals,
    with_training: *mut RmfnnCostTotals,
) -> RmfnnStatus {
    guard(|| {
        let c = inputs.as_ref().ok_or_else(|| null("inputs"))?;
        let ledger = cost_totals(&CostInputs {
            w_hf: c.w_hf,
            w_lf: c.w_lf,
            w_dnn: c.w_dnn,
            w_resnn: c.w_resnn,
            w_t1: c.w_t1,
            w_t2: c.w_t2,
            n_i: c.n_i,
            n: c.n,
            n_theta: c.n_theta,
        })?;
        let conv = |t: rmfnn::uq::CostTotals| RmfnnCostTotals {
            w_rmfnn: t.w_rmfnn,
            w_hfm: t.w_hfm,
            w_hfnn: t.w_hfnn,
        };
        if let Some(o) = without_training.as_mut() {
            *o = conv(ledger.without_training);
        }
        if let Some(o) = with_training.as_mut() {
            *o = conv(ledger.with_training);
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        let mut buf = vec![0 as c_char; 256];
        let n = unsafe { rmfnn_last_error_message(buf.as_mut_ptr(), buf.len()) };
        let s = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned();
        assert_eq!(n.min(255), s.len());
        s
    }

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, RmfnnStatus::Panic);
        assert!(last_error().contains("boom"));
    }

    #[test]
    fn success_clears_error() {
        set_error("old");
        assert_eq!(guard(|| Ok(())), RmfnnStatus::Ok);
        assert_eq!(last_error(), "");
    }

    #[test]
    fn truncates_to_buffer() {
        set_error("abcdef");
        let mut buf = [0 as c_char; 4];
        let n = unsafe { rmfnn_last_error_message(buf.as_mut_ptr(), 4) };
        assert_eq!(n, 6);
        assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap(), "abc");
    }
}
