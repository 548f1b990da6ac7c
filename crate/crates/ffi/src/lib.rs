//! C interface to `charrule`.
//!
//! Objects are opaque handles created by `cr_*_from_json` (or derived from
//! other handles) and released by the matching `cr_*_free`. Every fallible
//! call returns a [`CrStatus`]; on failure, `cr_last_error` describes the
//! problem until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use charrule::characters::{CharKind, Image};
use charrule::guard::Guard;
use charrule::io::{self, IoError};
use charrule::oracle::theorems::{check_theorem, Theorem, TheoremError, Verdict};
use charrule::oracle::{Oracle, OracleError, Property};
use charrule::prefs::Domain;
use charrule::rules::{enumerate_rules, CanonicalRule, RuleError, ScfTable};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrStatus {
    Ok = 0,
    /// A checked property or theorem does not hold.
    Failed = 1,
    /// Malformed input.
    Schema = 2,
    /// Input inconsistent with the domain.
    Validation = 3,
    /// An enumeration budget was exceeded.
    Guard = 4,
    NullPointer = 5,
    InvalidUtf8 = 6,
    Panic = 7,
}

/// A set of feasible profiles with a designated pair.
pub struct CrDomain {
    inner: Arc<Domain>,
}

/// A canonical rule: a character kind plus the minimal elements of its
/// `a`-region.
pub struct CrRule {
    inner: CanonicalRule,
}

/// An explicit choice for every profile of a domain.
pub struct CrTable {
    inner: ScfTable,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(CrStatus, String);

impl From<IoError> for Fail {
    fn from(e: IoError) -> Self {
        let s = match &e {
            IoError::Read { .. } | IoError::Schema(_) => CrStatus::Schema,
            IoError::Validation(_) => CrStatus::Validation,
            IoError::Guard(_) => CrStatus::Guard,
        };
        Fail(s, e.to_string())
    }
}

impl From<RuleError> for Fail {
    fn from(e: RuleError) -> Self {
        IoError::from(e).into()
    }
}

impl From<OracleError> for Fail {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Guard(g) => Fail(CrStatus::Guard, g.to_string()),
            OracleError::UnknownProperty(_) => Fail(CrStatus::Schema, e.to_string()),
            _ => Fail(CrStatus::Validation, e.to_string()),
        }
    }
}

impl From<TheoremError> for Fail {
    fn from(e: TheoremError) -> Self {
        match e {
            TheoremError::Oracle(o) => o.into(),
            TheoremError::Rule(r) => r.into(),
            TheoremError::Unknown(_) => Fail(CrStatus::Schema, e.to_string()),
        }
    }
}

fn guarded<F>(f: F) -> CrStatus
where
    F: FnOnce() -> Result<CrStatus, Fail>,
{
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            CrStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(CrStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(CrStatus::InvalidUtf8, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(CrStatus::NullPointer, "null handle".into()))
}

fn out_arg<T>(p: *mut T) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(CrStatus::NullPointer, "null output pointer".into()))
    } else {
        Ok(())
    }
}

/// Description of the last failure on this thread, or NULL. The pointer is
/// valid until the next `cr_*` call on the same thread.
#[no_mangle]
pub extern "C" fn cr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a domain file's JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_domain_from_json(json: *const c_char, out: *mut *mut CrDomain) -> CrStatus {
    guarded(|| {
        out_arg(out)?;
        let d = io::parse_domain(str_arg(json)?, None)?;
        *out = Box::into_raw(Box::new(CrDomain { inner: Arc::new(d) }));
        Ok(CrStatus::Ok)
    })
}

/// # Safety
/// `d` must come from `cr_domain_from_json` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cr_domain_free(d: *mut CrDomain) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of profiles in the domain.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_domain_len(d: *const CrDomain, out: *mut u64) -> CrStatus {
    guarded(|| {
        out_arg(out)?;
        *out = handle(d)?.inner.len();
        Ok(CrStatus::Ok)
    })
}

/// Parses a rule file's JSON text against a domain.
///
/// # Safety
/// `d` must be a live handle, `json` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cr_rule_from_json(
    d: *const CrDomain,
    json: *const c_char,
    out: *mut *mut CrRule,
) -> CrStatus {
    guarded(|| {
        out_arg(out)?;
        let d = handle(d)?;
        let r = io::parse_rule(str_arg(json)?, Arc::clone(&d.inner), &Guard::from_env())?;
        *out = Box::into_raw(Box::new(CrRule { inner: r }));
        Ok(CrStatus::Ok)
    })
}

/// # Safety
/// `r` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cr_rule_free(r: *mut CrRule) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Evaluates a rule at a profile given as JSON. Writes 1 to `chooses_a`
/// when the rule picks the first alternative of the pair, 0 otherwise.
///
/// # Safety
/// `r` must be a live handle, `profile_json` NUL-terminated, `chooses_a`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cr_rule_eval_json(
    r: *const CrRule,
    profile_json: *const c_char,
    chooses_a: *mut i32,
) -> CrStatus {
    guarded(|| {
        out_arg(chooses_a)?;
        let r = &handle(r)?.inner;
        let v: serde_json::Value = serde_json::from_str(str_arg(profile_json)?)
            .map_err(|e| Fail(CrStatus::Schema, e.to_string()))?;
        let p = io::parse_profile(r.domain(), &v)?;
        *chooses_a = i32::from(r.eval(&p)? == r.pair().a);
        Ok(CrStatus::Ok)
    })
}

/// Evaluates a rule at the profile with canonical index `index`.
///
/// # Safety
/// `r` must be a live handle; `chooses_a` writable.
#[no_mangle]
pub unsafe extern "C" fn cr_rule_eval_index(r: *const CrRule, index: u64, chooses_a: *mut i32) -> CrStatus {
    guarded(|| {
        out_arg(chooses_a)?;
        let r = &handle(r)?.inner;
        *chooses_a = i32::from(r.eval_index(index)? == r.pair().a);
        Ok(CrStatus::Ok)
    })
}

/// Serializes a rule to JSON. Free the result with `cr_string_free`.
///
/// # Safety
/// `r` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cr_rule_to_json(r: *const CrRule, out: *mut *mut c_char) -> CrStatus {
    guarded(|| {
        out_arg(out)?;
        let s = io::rule_json(&handle(r)?.inner).to_string();
        *out = CString::new(s).unwrap_or_default().into_raw();
        Ok(CrStatus::Ok)
    })
}

/// Tabulates a rule over its whole domain.
///
/// # Safety
/// `r` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cr_rule_to_table(r: *const CrRule, out: *mut *mut CrTable) -> CrStatus {
    guarded(|| {
        out_arg(out)?;
        let t = handle(r)?.inner.to_table(&Guard::from_env())?;
        *out = Box::into_raw(Box::new(CrTable { inner: t }));
        Ok(CrStatus::Ok)
    })
}

/// Parses a table file's JSON text against a domain.
///
/// # Safety
/// `d` must be a live handle, `json` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cr_table_from_json(
    d: *const CrDomain,
    json: *const c_char,
    out: *mut *mut CrTable,
) -> CrStatus {
    guarded(|| {
        out_arg(out)?;
        let d = handle(d)?;
        let t = io::parse_table(str_arg(json)?, Arc::clone(&d.inner), &Guard::from_env())?;
        *out = Box::into_raw(Box::new(CrTable { inner: t }));
        Ok(CrStatus::Ok)
    })
}

/// # Safety
/// `t` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cr_table_free(t: *mut CrTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Checks one property (`wgsp`, `sgsp`, `apr`, `isp`, `almost-monotone`,
/// `anonymous`). Returns `Ok` when it holds and `Failed` when it does not;
/// in the latter case `cr_last_error` describes a witness.
///
/// # Safety
/// `t` must be a live handle and `property` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cr_table_check(t: *const CrTable, property: *const c_char) -> CrStatus {
    guarded(|| {
        let t = &handle(t)?.inner;
        let p: Property = str_arg(property)?.parse()?;
        let oracle = Oracle::with_pair(Arc::clone(t.domain()), t.pair(), &Guard::from_env())?;
        match oracle.check(p, t)? {
            None => Ok(CrStatus::Ok),
            Some(w) => Err(Fail(CrStatus::Failed, io::describe_witness(t.domain(), &w))),
        }
    })
}

/// Counts the canonical rules of a character kind (`general`, `anon`, `bi`,
/// `strict`, `strong`) on a domain.
///
/// # Safety
/// `d` must be a live handle, `kind` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cr_count_rules(d: *const CrDomain, kind: *const c_char, out: *mut u64) -> CrStatus {
    guarded(|| {
        out_arg(out)?;
        let d = &handle(d)?.inner;
        let kind: CharKind = str_arg(kind)?
            .parse()
            .map_err(|e: charrule::characters::CharError| Fail(CrStatus::Schema, e.to_string()))?;
        let guard = Guard::from_env();
        let image = Arc::new(Image::of_domain(d, kind, &guard).map_err(RuleError::from)?);
        *out = enumerate_rules(&image, d, &guard)?.len() as u64;
        Ok(CrStatus::Ok)
    })
}

/// Runs a theorem check and writes its JSON report to `report` (free with
/// `cr_string_free`). Returns `Failed` when the check fails; a check whose
/// hypotheses do not hold returns `Ok`.
///
/// # Safety
/// `d` must be a live handle, `theorem` NUL-terminated, `report` writable.
#[no_mangle]
pub unsafe extern "C" fn cr_verify_theorem(
    d: *const CrDomain,
    theorem: *const c_char,
    report: *mut *mut c_char,
) -> CrStatus {
    guarded(|| {
        out_arg(report)?;
        let d = handle(d)?;
        let t: Theorem = str_arg(theorem)?.parse()?;
        let r = check_theorem(t, Arc::clone(&d.inner), &Guard::from_env())?;
        let text = serde_json::to_string(&r).map_err(|e| Fail(CrStatus::Panic, e.to_string()))?;
        *report = CString::new(text).unwrap_or_default().into_raw();
        Ok(if r.verdict == Verdict::Fail {
            CrStatus::Failed
        } else {
            CrStatus::Ok
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_arguments_are_reported() {
        let mut out = ptr::null_mut();
        let s = unsafe { cr_domain_from_json(ptr::null(), &mut out) };
        assert_eq!(s, CrStatus::NullPointer);
        assert!(!cr_last_error().is_null());
        let s = unsafe { cr_domain_len(ptr::null(), &mut 0) };
        assert_eq!(s, CrStatus::NullPointer);
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(cr_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
