//! C ABI for the refjava checker.
//!
//! A caller creates an [`RjSession`], adds sources, runs a check to get an
//! [`RjReport`], reads diagnostics out of the report and frees both. Every
//! function returns an [`RjStatus`] or a nullable pointer; none unwinds
//! into the caller. Strings returned by a report stay valid until the
//! report is freed.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use refjava::checker::{check_sources, CheckOptions};
use refjava::diagnostics::{render_all, render_text, to_json, Diagnostic, DiagnosticKind};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RjStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A diagnostic index was past the end of the report.
    OutOfRange = 3,
    /// The same path was added twice to one session.
    DuplicatePath = 4,
    /// The checker panicked; the session is still usable.
    Internal = 5,
}

/// Diagnostic kinds, mirroring the checker's.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RjKind {
    Syntax = 0,
    BaseType = 1,
    RefinementType = 2,
    Protocol = 3,
    Annotation = 4,
    Internal = 5,
}

impl From<DiagnosticKind> for RjKind {
    fn from(k: DiagnosticKind) -> Self {
        match k {
            DiagnosticKind::Syntax => RjKind::Syntax,
            DiagnosticKind::BaseType => RjKind::BaseType,
            DiagnosticKind::RefinementType => RjKind::RefinementType,
            DiagnosticKind::Protocol => RjKind::Protocol,
            DiagnosticKind::Annotation => RjKind::Annotation,
            DiagnosticKind::Internal => RjKind::Internal,
        }
    }
}

/// Skip protocol checking.
pub const RJ_FLAG_NO_PROTOCOL: u32 = 1;
/// Skip refinement checking.
pub const RJ_FLAG_NO_REFINEMENTS: u32 = 2;

/// Sources and options for one check. Opaque to C.
pub struct RjSession {
    files: Vec<(String, String)>,
    flags: u32,
}

/// The outcome of a check. Opaque to C.
pub struct RjReport {
    diagnostics: Vec<Diagnostic>,
    text: CString,
    json: CString,
    messages: Vec<CString>,
}

/// A diagnostic's location, 1-based line and column.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RjPosition {
    pub line: u32,
    pub column: u32,
}

fn guard(f: impl FnOnce() -> RjStatus) -> RjStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(RjStatus::Internal)
}

unsafe fn string_arg(p: *const c_char) -> Result<String, RjStatus> {
    if p.is_null() {
        return Err(RjStatus::NullArgument);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| RjStatus::InvalidUtf8)
}

/// A C string without interior NULs; any NUL in checker output is replaced.
fn c_string(s: String) -> CString {
    CString::new(s.replace('\0', "\u{fffd}")).expect("no interior NUL")
}

/// Creates an empty session with every check enabled.
#[no_mangle]
pub extern "C" fn rj_session_new() -> *mut RjSession {
    Box::into_raw(Box::new(RjSession {
        files: Vec::new(),
        flags: 0,
    }))
}

/// Frees a session. Null is ignored.
///
/// # Safety
/// `session` must come from [`rj_session_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rj_session_free(session: *mut RjSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Sets `RJ_FLAG_*` bits for later checks.
///
/// # Safety
/// `session` must be a live session or null.
#[no_mangle]
pub unsafe extern "C" fn rj_session_set_flags(session: *mut RjSession, flags: u32) -> RjStatus {
    match session.as_mut() {
        Some(s) => {
            s.flags = flags;
            RjStatus::Ok
        }
        None => RjStatus::NullArgument,
    }
}

/// Adds one source file. `path` names it in diagnostics.
///
/// # Safety
/// `session` must be a live session; `path` and `text` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn rj_session_add_source(
    session: *mut RjSession,
    path: *const c_char,
    text: *const c_char,
) -> RjStatus {
    guard(|| {
        let Some(s) = session.as_mut() else {
            return RjStatus::NullArgument;
        };
        let (path, text) = match (string_arg(path), string_arg(text)) {
            (Ok(p), Ok(t)) => (p, t),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        if s.files.iter().any(|(p, _)| *p == path) {
            return RjStatus::DuplicatePath;
        }
        s.files.push((path, text.replace("\r\n", "\n")));
        RjStatus::Ok
    })
}

/// Checks every source in the session together and stores a new report
/// in `*out`. The session is unchanged and may be checked again.
///
/// # Safety
/// `session` must be a live session and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rj_session_check(session: *const RjSession, out: *mut *mut RjReport) -> RjStatus {
    if out.is_null() {
        return RjStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let Some(s) = session.as_ref() else {
        return RjStatus::NullArgument;
    };
    guard(|| {
        let opts = CheckOptions {
            refinements: s.flags & RJ_FLAG_NO_REFINEMENTS == 0,
            protocol: s.flags & RJ_FLAG_NO_PROTOCOL == 0,
            jobs: None,
        };
        let diagnostics = check_sources(&s.files, &opts).diagnostics;
        let report = RjReport {
            text: c_string(render_all(&diagnostics)),
            json: c_string(to_json(&diagnostics)),
            messages: diagnostics.iter().map(|d| c_string(render_text(d))).collect(),
            diagnostics,
        };
        *out = Box::into_raw(Box::new(report));
        RjStatus::Ok
    })
}

/// Frees a report and every string it handed out. Null is ignored.
///
/// # Safety
/// `report` must come from [`rj_session_check`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rj_report_free(report: *mut RjReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of diagnostics; 0 for null.
///
/// # Safety
/// `report` must be a live report or null.
#[no_mangle]
pub unsafe extern "C" fn rj_report_len(report: *const RjReport) -> usize {
    report.as_ref().map_or(0, |r| r.diagnostics.len())
}

/// All diagnostics in the CLI's text format.
///
/// # Safety
/// `report` must be a live report or null.
#[no_mangle]
pub unsafe extern "C" fn rj_report_text(report: *const RjReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.text.as_ptr())
}

/// All diagnostics as the CLI's JSON array.
///
/// # Safety
/// `report` must be a live report or null.
#[no_mangle]
pub unsafe extern "C" fn rj_report_json(report: *const RjReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// Text of diagnostic `index`, or null when out of range.
///
/// # Safety
/// `report` must be a live report or null.
#[no_mangle]
pub unsafe extern "C" fn rj_report_message(report: *const RjReport, index: usize) -> *const c_char {
    report
        .as_ref()
        .and_then(|r| r.messages.get(index))
        .map_or(ptr::null(), |m| m.as_ptr())
}

/// Kind and start position of diagnostic `index`. Either out pointer may be null.
///
/// # Safety
/// `report` must be a live report; `kind` and `position` valid or null.
#[no_mangle]
pub unsafe extern "C" fn rj_report_get(
    report: *const RjReport,
    index: usize,
    kind: *mut RjKind,
    position: *mut RjPosition,
) -> RjStatus {
    let Some(r) = report.as_ref() else {
        return RjStatus::NullArgument;
    };
    let Some(d) = r.diagnostics.get(index) else {
        return RjStatus::OutOfRange;
    };
    if let Some(k) = kind.as_mut() {
        *k = d.kind.into();
    }
    if let Some(p) = position.as_mut() {
        *p = RjPosition {
            line: d.start.line,
            column: d.start.column,
        };
    }
    RjStatus::Ok
}

/// A static description of a status code.
#[no_mangle]
pub extern "C" fn rj_status_message(status: RjStatus) -> *const c_char {
    let s: &'static str = match status {
        RjStatus::Ok => "ok\0",
        RjStatus::NullArgument => "null argument\0",
        RjStatus::InvalidUtf8 => "string is not valid UTF-8\0",
        RjStatus::OutOfRange => "index out of range\0",
        RjStatus::DuplicatePath => "path already added to this session\0",
        RjStatus::Internal => "internal checker failure\0",
    };
    s.as_ptr().cast()
}

/// The library version, e.g. "0.1.0".
#[no_mangle]
pub extern "C" fn rj_version() -> *const c_char {
    const V: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    V.as_ptr().cast()
}
