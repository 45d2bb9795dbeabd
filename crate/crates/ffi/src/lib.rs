//! C ABI for convlab.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_parse`
//! functions and released by the matching `*_free`. Every fallible call
//! returns a [`ConvlabStatus`]; on failure the message is available from
//! [`convlab_last_error`] on the same thread until the next failing call.
//! Strings handed out by the library are freed with [`convlab_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_double, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use convlab::scenario::{builtin_repro, parse_norm, run_scenario, Report, ScenarioConfig};
use convlab::{dual_norm_eval, norm_eval, Error, NormSpec, Rat, Scalar, Vector, Window};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvlabStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON, bad expression, unknown built-in name.
    Config = 3,
    /// Index outside the window, mismatched windows, empty window.
    Window = 4,
    /// The operation is not available for this norm or set.
    Unsupported = 5,
    /// Any other failure inside a computation.
    Computation = 6,
    /// A bug: the library panicked. The handle arguments are left untouched.
    Panic = 7,
}

/// A norm on a fixed coordinate window.
pub struct ConvlabNorm {
    norm: NormSpec,
    window: Window,
}

/// A finitely supported rational vector; also read as a functional.
pub struct ConvlabVector(Vector);

/// The outcome of a scenario or built-in reproduction.
pub struct ConvlabReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ConvlabStatus {
    match e {
        Error::Config { .. } => ConvlabStatus::Config,
        Error::WindowMismatch | Error::IndexOutsideWindow(_) | Error::MissingIndex(_) | Error::EmptyWindow => {
            ConvlabStatus::Window
        }
        Error::NotPolyhedral(_) | Error::Unsupported(_) => ConvlabStatus::Unsupported,
        _ => ConvlabStatus::Computation,
    }
}

struct Fail(ConvlabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ConvlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ConvlabStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            ConvlabStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(ConvlabStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(ConvlabStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(ConvlabStatus::NullArgument, format!("{name} is null")))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(ConvlabStatus::NullArgument, format!("{name} is null")))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Writes the float value and, when `exact` is non-null, the exact form
/// (`p/q`, `sqrt(p/q)`, or `~1.5e0` for approximations).
unsafe fn put_scalar(s: &Scalar, value: *mut c_double, exact: *mut *mut c_char) -> Result<(), Fail> {
    *out(value, "value")? = s.to_f64();
    if let Some(e) = exact.as_mut() {
        *e = c_string(s.to_string());
    }
    Ok(())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn convlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn convlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn convlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a norm in the scenario syntax, e.g. `{"kind":"ell1"}`, on the
/// coordinate window `lo..=hi`.
///
/// # Safety
/// `json` must be a valid C string and `out_norm` writable.
#[no_mangle]
pub unsafe extern "C" fn convlab_norm_parse(
    json: *const c_char,
    lo: usize,
    hi: usize,
    out_norm: *mut *mut ConvlabNorm,
) -> ConvlabStatus {
    guard(|| {
        let slot = out(out_norm, "out_norm")?;
        let json = text(json, "json")?;
        if lo > hi {
            return Err(Error::EmptyWindow.into());
        }
        let window = Window::range(lo, hi);
        let norm = parse_norm(json, &window)?;
        *slot = Box::into_raw(Box::new(ConvlabNorm { norm, window }));
        Ok(())
    })
}

/// # Safety
/// `norm` must be null or a handle from [`convlab_norm_parse`].
#[no_mangle]
pub unsafe extern "C" fn convlab_norm_free(norm: *mut ConvlabNorm) {
    if !norm.is_null() {
        drop(Box::from_raw(norm));
    }
}

/// A zero vector on the window `lo..=hi`.
///
/// # Safety
/// `out_vec` must be writable.
#[no_mangle]
pub unsafe extern "C" fn convlab_vector_new(lo: usize, hi: usize, out_vec: *mut *mut ConvlabVector) -> ConvlabStatus {
    guard(|| {
        let slot = out(out_vec, "out_vec")?;
        if lo > hi {
            return Err(Error::EmptyWindow.into());
        }
        *slot = Box::into_raw(Box::new(ConvlabVector(Vector::zero(&Window::range(lo, hi)))));
        Ok(())
    })
}

/// Sets coordinate `index` to a rational written as `p/q`, an integer or a
/// decimal.
///
/// # Safety
/// `vec` must be a live vector handle and `value` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn convlab_vector_set(vec: *mut ConvlabVector, index: usize, value: *const c_char) -> ConvlabStatus {
    guard(|| {
        let v = out(vec, "vec")?;
        let raw = text(value, "value")?;
        let q: Rat = raw
            .parse()
            .map_err(|_| Fail(ConvlabStatus::Config, format!("`{raw}` is not a rational number")))?;
        v.0.try_set(index, q)?;
        Ok(())
    })
}

/// # Safety
/// `vec` must be null or a handle from [`convlab_vector_new`].
#[no_mangle]
pub unsafe extern "C" fn convlab_vector_free(vec: *mut ConvlabVector) {
    if !vec.is_null() {
        drop(Box::from_raw(vec));
    }
}

fn in_norm_window(norm: &ConvlabNorm, v: &Vector) -> Result<Vector, Fail> {
    Ok(v.in_window(&norm.window)?)
}

/// `||x||` in the given norm. `exact` may be null; otherwise it receives a
/// string to free with [`convlab_string_free`].
///
/// # Safety
/// Handles must be live; `value` writable; `exact` null or writable.
#[no_mangle]
pub unsafe extern "C" fn convlab_norm_eval(
    norm: *const ConvlabNorm,
    x: *const ConvlabVector,
    value: *mut c_double,
    exact: *mut *mut c_char,
) -> ConvlabStatus {
    guard(|| {
        let n = handle(norm, "norm")?;
        let x = in_norm_window(n, &handle(x, "x")?.0)?;
        put_scalar(&norm_eval(&n.norm, &x)?, value, exact)
    })
}

/// Dual norm of the functional with the coefficients of `f`.
///
/// # Safety
/// As for [`convlab_norm_eval`].
#[no_mangle]
pub unsafe extern "C" fn convlab_dual_norm_eval(
    norm: *const ConvlabNorm,
    f: *const ConvlabVector,
    value: *mut c_double,
    exact: *mut *mut c_char,
) -> ConvlabStatus {
    guard(|| {
        let n = handle(norm, "norm")?;
        let f = in_norm_window(n, &handle(f, "f")?.0)?.to_functional();
        put_scalar(&dual_norm_eval(&n.norm, &f)?, value, exact)
    })
}

/// Runs a scenario given as JSON text.
///
/// # Safety
/// `json` must be a valid C string and `out_report` writable.
#[no_mangle]
pub unsafe extern "C" fn convlab_run_scenario_json(
    json: *const c_char,
    out_report: *mut *mut ConvlabReport,
) -> ConvlabStatus {
    guard(|| {
        let slot = out(out_report, "out_report")?;
        let cfg = ScenarioConfig::from_json(text(json, "json")?)?;
        *slot = Box::into_raw(Box::new(ConvlabReport(run_scenario(&cfg)?)));
        Ok(())
    })
}

/// Runs a built-in reproduction by name.
///
/// # Safety
/// `name` must be a valid C string and `out_report` writable.
#[no_mangle]
pub unsafe extern "C" fn convlab_repro(name: *const c_char, out_report: *mut *mut ConvlabReport) -> ConvlabStatus {
    guard(|| {
        let slot = out(out_report, "out_report")?;
        *slot = Box::into_raw(Box::new(ConvlabReport(builtin_repro(text(name, "name")?)?)));
        Ok(())
    })
}

/// The report as pretty JSON; free with [`convlab_string_free`].
///
/// # Safety
/// `report` must be live and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn convlab_report_json(report: *const ConvlabReport, out_json: *mut *mut c_char) -> ConvlabStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        *slot = c_string(handle(report, "report")?.0.to_json());
        Ok(())
    })
}

/// 1 if every check matched its expectation, 0 if not, -1 for a null handle.
///
/// # Safety
/// `report` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn convlab_report_all_matched(report: *const ConvlabReport) -> i32 {
    match report.as_ref() {
        Some(r) => r.0.matched as i32,
        None => -1,
    }
}

/// # Safety
/// `report` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn convlab_report_free(report: *mut ConvlabReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
