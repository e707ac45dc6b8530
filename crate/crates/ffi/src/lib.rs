//! C ABI for the satforge toolkit.
//!
//! Problems live behind an opaque handle; every fallible call returns a
//! status code and leaves a human-readable message retrievable through
//! [`satforge_last_error`]. Strings returned through out-parameters are
//! owned by the caller and must be released with [`satforge_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use satforge::dimacs::{parse_model, write_dimacs};
use satforge::pipeline::{parse_plan_text, write_plan_text};

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let sanitized = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(sanitized));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatforgeStatus {
    Ok = 0,
    /// A pointer argument was NULL or a string was not valid UTF-8.
    InvalidArgument = 1,
    /// The problem text failed to parse.
    ParseError = 2,
    /// The problem failed a structural gate (malformed, inconsistent
    /// preconditions, or conditional effects).
    RejectedProblem = 3,
    /// The supplied assignment is not a model of the encoding.
    ModelError = 4,
}

/// An opaque, immutable planning problem.
pub struct SatforgeProblem {
    inner: satforge::AstProblem,
}

/// Parses Fast-Downward translator format into a new problem handle.
///
/// On success writes the handle to `out` and returns `Ok`; the handle must
/// be released with [`satforge_problem_free`].
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn satforge_problem_parse(
    text: *const c_char,
    out: *mut *mut SatforgeProblem,
) -> SatforgeStatus {
    clear_error();
    if text.is_null() || out.is_null() {
        set_error("NULL argument".into());
        return SatforgeStatus::InvalidArgument;
    }
    let text = match CStr::from_ptr(text).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("problem text is not valid UTF-8".into());
            return SatforgeStatus::InvalidArgument;
        }
    };
    match satforge::parse_sas(text) {
        Ok(problem) => {
            *out = Box::into_raw(Box::new(SatforgeProblem { inner: problem }));
            SatforgeStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            SatforgeStatus::ParseError
        }
    }
}

/// Releases a problem handle. NULL is a no-op.
///
/// # Safety
/// `problem` must be NULL or a handle from [`satforge_problem_parse`] that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn satforge_problem_free(problem: *mut SatforgeProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

fn string_out(out: *mut *mut c_char, text: String) -> SatforgeStatus {
    match CString::new(text) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            SatforgeStatus::Ok
        }
        Err(_) => {
            set_error("output contained NUL".into());
            SatforgeStatus::InvalidArgument
        }
    }
}

/// Encodes the problem at the given horizon and writes the DIMACS-CNF text
/// to `out`.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn satforge_encode(
    problem: *const SatforgeProblem,
    horizon: usize,
    out: *mut *mut c_char,
) -> SatforgeStatus {
    clear_error();
    if problem.is_null() || out.is_null() {
        set_error("NULL argument".into());
        return SatforgeStatus::InvalidArgument;
    }
    match satforge::encode(horizon, &(*problem).inner) {
        Ok(cnf) => {
            let mut bytes = Vec::new();
            write_dimacs(&cnf, &mut bytes).expect("writing to a Vec cannot fail");
            string_out(out, String::from_utf8(bytes).expect("DIMACS output is ASCII"))
        }
        Err(e) => {
            set_error(e.to_string());
            SatforgeStatus::RejectedProblem
        }
    }
}

/// Decodes a solver model (DIMACS-style literal list) into a serial plan,
/// written to `out` as one parenthesised operator name per line.
///
/// # Safety
/// `problem` must be a live handle; `model_text` a valid NUL-terminated
/// string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn satforge_decode(
    problem: *const SatforgeProblem,
    horizon: usize,
    model_text: *const c_char,
    out: *mut *mut c_char,
) -> SatforgeStatus {
    clear_error();
    if problem.is_null() || model_text.is_null() || out.is_null() {
        set_error("NULL argument".into());
        return SatforgeStatus::InvalidArgument;
    }
    let model_text = match CStr::from_ptr(model_text).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("model text is not valid UTF-8".into());
            return SatforgeStatus::InvalidArgument;
        }
    };
    let model = match parse_model(model_text) {
        Ok(m) => m,
        Err(e) => {
            set_error(e.to_string());
            return SatforgeStatus::ModelError;
        }
    };
    match satforge::decode(&model, horizon, &(*problem).inner) {
        Ok(plan) => string_out(out, write_plan_text(&plan)),
        Err(e) => {
            let status = match e {
                satforge::PipelineError::ModelDoesNotSolve => SatforgeStatus::ModelError,
                _ => SatforgeStatus::RejectedProblem,
            };
            set_error(e.to_string());
            status
        }
    }
}

/// Checks a plan (as written by [`satforge_decode`]) against the execution
/// semantics; writes 1 to `out_valid` if it reaches the goal, else 0.
///
/// # Safety
/// `problem` must be a live handle; `plan_text` a valid NUL-terminated
/// string; `out_valid` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn satforge_validate(
    problem: *const SatforgeProblem,
    plan_text: *const c_char,
    out_valid: *mut i32,
) -> SatforgeStatus {
    clear_error();
    if problem.is_null() || plan_text.is_null() || out_valid.is_null() {
        set_error("NULL argument".into());
        return SatforgeStatus::InvalidArgument;
    }
    let plan_text = match CStr::from_ptr(plan_text).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("plan text is not valid UTF-8".into());
            return SatforgeStatus::InvalidArgument;
        }
    };
    let plan = parse_plan_text(plan_text);
    *out_valid = i32::from(satforge::validate(&(*problem).inner, &plan));
    SatforgeStatus::Ok
}

/// Releases a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must be NULL or a string obtained from this library that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn satforge_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Returns the message for the most recent failure on this thread, or NULL
/// if the last call succeeded. The pointer is valid until the next call
/// into this library on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn satforge_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |s| s.as_ptr())
    })
}
