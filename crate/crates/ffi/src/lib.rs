//! C interface to minset.
//!
//! Handles are opaque and owned by the caller once returned; free each with
//! its `_free` function. Strings returned as `char *` are heap allocated and
//! released with `minset_string_free`. Every call returns a `MinsetStatus`;
//! on failure `minset_last_error` describes the problem for this thread.

// Pointer contracts for every entry point are stated above.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use minset::engine::{
    minimal_set_automatic, minimal_set_bounded, verify_completeness, EngineConfig,
    MinimalSetReport, Mode,
};
use minset::oracles::{is_member, FactorPolicy, OracleContext, OracleSpec};
use minset::{Antichain, Error, Numeral};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinsetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Domain = 4,
    NotAMember = 5,
    Undecided = 6,
    MissingData = 7,
    IterationCap = 8,
    Io = 9,
    Panic = 10,
}

/// How a report's element list was established.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinsetMode {
    ExactAutomatic = 0,
    Bounded = 1,
    VerifiedComplete = 2,
    Undecided = 3,
}

/// Factoring policy and data tables.
pub struct MinsetContext(OracleContext);

/// A parsed set expression.
pub struct MinsetSpec(OracleSpec);

/// A minimal-set report.
pub struct MinsetReport(MinimalSetReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> MinsetStatus {
    match err {
        Error::Parse { .. } => MinsetStatus::Parse,
        Error::Domain(_) | Error::BaseMismatch { .. } => MinsetStatus::Domain,
        Error::NotAMember(_) => MinsetStatus::NotAMember,
        Error::Undecided { .. } | Error::UnfactoredInput { .. } => MinsetStatus::Undecided,
        Error::InsufficientData { .. } | Error::Table { .. } => MinsetStatus::MissingData,
        Error::IterationCap(_) => MinsetStatus::IterationCap,
        Error::Io(_) | Error::Json(_) => MinsetStatus::Io,
    }
}

/// Runs `f`, recording errors and turning panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), MinsetStatus>) -> MinsetStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            MinsetStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            MinsetStatus::Panic
        }
    }
}

fn fail(err: Error) -> MinsetStatus {
    set_error(err.to_string());
    status_of(&err)
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, MinsetStatus> {
    if p.is_null() {
        set_error("null string argument".into());
        return Err(MinsetStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not UTF-8".into());
        MinsetStatus::InvalidUtf8
    })
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, MinsetStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null handle".into());
        MinsetStatus::NullPointer
    })
}

fn out_ptr<T>(out: *mut *mut T) -> Result<(), MinsetStatus> {
    if out.is_null() {
        set_error("null output pointer".into());
        return Err(MinsetStatus::NullPointer);
    }
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .unwrap_or_default()
        .into_raw()
}

fn context_or_default(ctx: *const MinsetContext) -> OracleContext {
    // SAFETY: caller passes null or a live handle
    unsafe { ctx.as_ref() }
        .map(|c| c.0.clone())
        .unwrap_or_default()
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn minset_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn minset_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub unsafe extern "C" fn minset_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `data_dir` may be null for no tables.
#[no_mangle]
pub unsafe extern "C" fn minset_context_new(
    data_dir: *const c_char,
    out: *mut *mut MinsetContext,
) -> MinsetStatus {
    guard(|| {
        out_ptr(out)?;
        let ctx = if data_dir.is_null() {
            OracleContext::default()
        } else {
            OracleContext::with_data_dir(FactorPolicy::default(), Path::new(text(data_dir)?))
                .map_err(fail)?
        };
        *out = Box::into_raw(Box::new(MinsetContext(ctx)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn minset_context_free(ctx: *mut MinsetContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

#[no_mangle]
pub unsafe extern "C" fn minset_spec_parse(
    expr: *const c_char,
    out: *mut *mut MinsetSpec,
) -> MinsetStatus {
    guard(|| {
        out_ptr(out)?;
        let spec = OracleSpec::parse(text(expr)?).map_err(fail)?;
        *out = Box::into_raw(Box::new(MinsetSpec(spec)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn minset_spec_free(spec: *mut MinsetSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Membership of the decimal value `n`. `*out` is 1 (member), 0 (not) or
/// -1 (conditional). `ctx` may be null.
#[no_mangle]
pub unsafe extern "C" fn minset_is_member(
    ctx: *const MinsetContext,
    spec: *const MinsetSpec,
    n: *const c_char,
    out: *mut c_int,
) -> MinsetStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return Err(MinsetStatus::NullPointer);
        }
        let spec = handle(spec)?;
        let s = text(n)?;
        let value = s.trim().parse().map_err(|_| {
            fail(Error::Parse {
                position: 0,
                message: format!("'{s}' is not a decimal integer"),
            })
        })?;
        let m = is_member(&context_or_default(ctx), &spec.0, &value).map_err(fail)?;
        *out = match m.decided() {
            Some(true) => 1,
            Some(false) => 0,
            None => -1,
        };
        Ok(())
    })
}

unsafe fn emit(
    out: *mut *mut MinsetReport,
    r: minset::Result<MinimalSetReport>,
) -> Result<(), MinsetStatus> {
    *out = Box::into_raw(Box::new(MinsetReport(r.map_err(fail)?)));
    Ok(())
}

/// Minimal elements up to `bound`.
#[no_mangle]
pub unsafe extern "C" fn minset_compute_bounded(
    ctx: *const MinsetContext,
    spec: *const MinsetSpec,
    base: u32,
    bound: u64,
    out: *mut *mut MinsetReport,
) -> MinsetStatus {
    guard(|| {
        out_ptr(out)?;
        let spec = handle(spec)?;
        emit(
            out,
            minimal_set_bounded(
                &context_or_default(ctx),
                &spec.0,
                base,
                bound,
                &EngineConfig::default(),
            ),
        )
    })
}

/// Exact minimal set of a residue-automatic set.
#[no_mangle]
pub unsafe extern "C" fn minset_compute_exact(
    ctx: *const MinsetContext,
    spec: *const MinsetSpec,
    base: u32,
    out: *mut *mut MinsetReport,
) -> MinsetStatus {
    guard(|| {
        out_ptr(out)?;
        let spec = handle(spec)?;
        emit(
            out,
            minimal_set_automatic(
                &context_or_default(ctx),
                &spec.0,
                base,
                &EngineConfig::default(),
            ),
        )
    })
}

/// Completeness check of a comma separated candidate written in `base`.
/// An Undecided outcome still yields a report; inspect its mode.
#[no_mangle]
pub unsafe extern "C" fn minset_verify(
    ctx: *const MinsetContext,
    spec: *const MinsetSpec,
    base: u32,
    candidate: *const c_char,
    out: *mut *mut MinsetReport,
) -> MinsetStatus {
    guard(|| {
        out_ptr(out)?;
        let spec = handle(spec)?;
        let nums = text(candidate)?
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| Numeral::parse(t, base))
            .collect::<minset::Result<Vec<_>>>()
            .map_err(fail)?;
        let cand = Antichain::try_from_numerals(base, nums).map_err(fail)?;
        emit(
            out,
            verify_completeness(
                &context_or_default(ctx),
                &spec.0,
                &cand,
                &EngineConfig::default(),
            ),
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn minset_report_free(report: *mut MinsetReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

#[no_mangle]
pub unsafe extern "C" fn minset_report_mode(
    report: *const MinsetReport,
    out: *mut MinsetMode,
) -> MinsetStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return Err(MinsetStatus::NullPointer);
        }
        *out = match handle(report)?.0.mode {
            Mode::ExactAutomatic => MinsetMode::ExactAutomatic,
            Mode::Bounded { .. } => MinsetMode::Bounded,
            Mode::VerifiedComplete { .. } => MinsetMode::VerifiedComplete,
            Mode::Undecided { .. } => MinsetMode::Undecided,
        };
        Ok(())
    })
}

/// Number of minimal elements; 0 for a null report.
#[no_mangle]
pub unsafe extern "C" fn minset_report_len(report: *const MinsetReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.elements.len())
}

/// Element `index` as a decimal string; null when out of range.
#[no_mangle]
pub unsafe extern "C" fn minset_report_element(
    report: *const MinsetReport,
    index: usize,
) -> *mut c_char {
    match report
        .as_ref()
        .and_then(|r| r.0.elements.elements().get(index))
    {
        Some(n) => owned_string(n.value().to_string()),
        None => ptr::null_mut(),
    }
}

/// Full report as JSON; null on a null report.
#[no_mangle]
pub unsafe extern "C" fn minset_report_json(report: *const MinsetReport) -> *mut c_char {
    match report.as_ref().map(|r| r.0.to_json()) {
        Some(Ok(s)) => owned_string(s),
        Some(Err(e)) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
        None => ptr::null_mut(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_codes() {
        assert_eq!(
            status_of(&Error::IterationCap(3)),
            MinsetStatus::IterationCap
        );
        assert_eq!(
            status_of(&Error::Parse {
                position: 1,
                message: String::new()
            }),
            MinsetStatus::Parse
        );
        assert_eq!(guard(|| panic!("boom")), MinsetStatus::Panic);
        let msg = unsafe { CStr::from_ptr(minset_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
    }
}
