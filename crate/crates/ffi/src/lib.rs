//! C ABI for the exactode toolkit.
//!
//! The surface follows the usual opaque-handle pattern: parse an equation
//! into an `ExactodeOde*`, run pipeline operations against it, and receive
//! results as JSON documents (the same documents the CLI emits with
//! `--json`). Strings returned through out-parameters are owned by the
//! library and must be released with `exactode_string_free`. Every function
//! returns an `ExactodeStatus`; on any failure the thread-local message from
//! `exactode_last_error_message` explains what happened.

use exactode::cli::{
    blank_doc, check_document, find_mu_document, reduce_document, verify_document,
};
use exactode::ode::file::{parse_ode_file, OdeFile};
use exactode::report::input_echo;
use exactode::ProbeConfig;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result codes of every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactodeStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The equation text did not parse or validate.
    ParseError = 3,
    /// The operation ran but did not certify (not exact / no factor /
    /// verification failed); the JSON document carries the details.
    NotCertified = 4,
    /// Internal failure; see the last error message.
    Internal = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message.into());
}

/// Opaque equation handle.
pub struct ExactodeOde {
    file: OdeFile,
    source_label: String,
}

fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, ExactodeStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(ExactodeStatus::NullArgument);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        ExactodeStatus::InvalidUtf8
    })
}

fn give_string(out: *mut *mut c_char, text: String) -> ExactodeStatus {
    if out.is_null() {
        set_error("null output pointer");
        return ExactodeStatus::NullArgument;
    }
    match CString::new(text) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            ExactodeStatus::Ok
        }
        Err(_) => {
            set_error("document contained an interior NUL byte");
            ExactodeStatus::Internal
        }
    }
}

fn config(seed: u64) -> ProbeConfig {
    ProbeConfig::default().with_seed(seed)
}

fn doc_status(exit_code: i32) -> ExactodeStatus {
    match exit_code {
        0 => ExactodeStatus::Ok,
        3..=5 => ExactodeStatus::NotCertified,
        _ => ExactodeStatus::ParseError,
    }
}

fn guarded(body: impl FnOnce() -> ExactodeStatus) -> ExactodeStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            ExactodeStatus::Internal
        }
    }
}

/// Parse an equation in the ODE file format (an `order:` line plus either an
/// `equation:` line or `F0:`..`Fn:` lines, optional `base:` line). On success
/// writes a fresh handle to `out`.
///
/// # Safety
/// `text` must point to a NUL-terminated string and `out` to a writable
/// pointer slot. The returned handle must be released with `exactode_free`.
#[no_mangle]
pub unsafe extern "C" fn exactode_parse(
    text: *const c_char,
    seed: u64,
    out: *mut *mut ExactodeOde,
) -> ExactodeStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return ExactodeStatus::NullArgument;
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_ode_file(text, &config(seed)) {
            Ok(file) => {
                let handle = Box::new(ExactodeOde {
                    file,
                    source_label: "<memory>".into(),
                });
                unsafe { *out = Box::into_raw(handle) };
                ExactodeStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                ExactodeStatus::ParseError
            }
        }
    })
}

/// Release a handle returned by `exactode_parse`.
///
/// # Safety
/// `handle` must be a pointer from `exactode_parse` not yet freed; null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn exactode_free(handle: *mut ExactodeOde) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Order of the equation, or -1 for a null handle.
///
/// # Safety
/// `handle` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn exactode_order(handle: *const ExactodeOde) -> i32 {
    if handle.is_null() {
        return -1;
    }
    unsafe { &*handle }.file.ode.order() as i32
}

unsafe fn with_handle<'a>(
    handle: *const ExactodeOde,
) -> Result<&'a ExactodeOde, ExactodeStatus> {
    if handle.is_null() {
        set_error("null handle");
        return Err(ExactodeStatus::NullArgument);
    }
    Ok(unsafe { &*handle })
}

fn run_doc(
    h: &ExactodeOde,
    seed: u64,
    command: &str,
    build: impl FnOnce(
        exactode::report::RunDocument,
        &OdeFile,
        &ProbeConfig,
    ) -> exactode::report::RunDocument,
    out_json: *mut *mut c_char,
) -> ExactodeStatus {
    let cfg = config(seed);
    let echo = input_echo(&h.source_label, &h.file.ode, h.file.base.as_ref());
    let doc = build(blank_doc(command, seed, echo), &h.file, &cfg);
    let status = doc_status(doc.exit_code);
    if status != ExactodeStatus::Ok {
        if let Some(e) = &doc.error {
            set_error(format!("{}: {}", e.code, e.message));
        } else {
            set_error(format!("exit code {}", doc.exit_code));
        }
    }
    let give = give_string(out_json, doc.to_json());
    if give != ExactodeStatus::Ok {
        give
    } else {
        status
    }
}

/// Exactness check. Writes the run document as JSON. Returns `Ok` when the
/// equation is exact, `NotCertified` when conditions are violated.
///
/// # Safety
/// `handle` must be live; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn exactode_check_json(
    handle: *const ExactodeOde,
    seed: u64,
    out_json: *mut *mut c_char,
) -> ExactodeStatus {
    guarded(|| {
        let h = match unsafe { with_handle(handle) } {
            Ok(h) => h,
            Err(s) => return s,
        };
        run_doc(h, seed, "check", check_document, out_json)
    })
}

/// Integrating-factor search. `xi` selects the shape: "auto", "t", "y",
/// "y1", ..., or `expr:<text>`; null means "auto".
///
/// # Safety
/// `handle` must be live; `xi` may be null; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn exactode_find_mu_json(
    handle: *const ExactodeOde,
    xi: *const c_char,
    seed: u64,
    out_json: *mut *mut c_char,
) -> ExactodeStatus {
    guarded(|| {
        let h = match unsafe { with_handle(handle) } {
            Ok(h) => h,
            Err(s) => return s,
        };
        let xi_flag = if xi.is_null() {
            "auto".to_string()
        } else {
            match read_str(xi) {
                Ok(t) => t.to_string(),
                Err(s) => return s,
            }
        };
        run_doc(
            h,
            seed,
            "find-mu",
            |d, f, c| find_mu_document(d, f, &xi_flag, 12, c),
            out_json,
        )
    })
}

/// Full pipeline: exactness, factor search when needed, first integral, and
/// (when `verify` is nonzero) the five-trajectory drift protocol.
///
/// # Safety
/// `handle` must be live; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn exactode_reduce_json(
    handle: *const ExactodeOde,
    verify: i32,
    seed: u64,
    out_json: *mut *mut c_char,
) -> ExactodeStatus {
    guarded(|| {
        let h = match unsafe { with_handle(handle) } {
            Ok(h) => h,
            Err(s) => return s,
        };
        run_doc(
            h,
            seed,
            "reduce",
            |d, f, c| reduce_document(d, f, None, verify != 0, None, c),
            out_json,
        )
    })
}

/// Drift-check a candidate first integral along one trajectory started at
/// the file's base point.
///
/// # Safety
/// `handle` and `psi` must be live; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn exactode_verify_json(
    handle: *const ExactodeOde,
    psi: *const c_char,
    span: f64,
    step: f64,
    drift_tol: f64,
    seed: u64,
    out_json: *mut *mut c_char,
) -> ExactodeStatus {
    guarded(|| {
        let h = match unsafe { with_handle(handle) } {
            Ok(h) => h,
            Err(s) => return s,
        };
        let psi = match read_str(psi) {
            Ok(t) => t.to_string(),
            Err(s) => return s,
        };
        run_doc(
            h,
            seed,
            "verify",
            |d, f, c| verify_document(d, f, &psi, None, span, step, drift_tol, None, c),
            out_json,
        )
    })
}

/// Copy the last error message for this thread into `buf` (truncated to
/// `len - 1` bytes, always NUL-terminated) and return the full message
/// length in bytes.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null (query mode).
#[no_mangle]
pub unsafe extern "C" fn exactode_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Release a string returned through an out-parameter.
///
/// # Safety
/// `s` must be a string produced by this library and not yet freed; null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn exactode_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
