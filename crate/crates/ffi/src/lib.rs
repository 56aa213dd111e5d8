//! C ABI over `tightcalc`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`TcStatus`]; on failure a message is kept per thread and can be fetched
//! with [`tc_last_error`].

use std::cell::RefCell;
use std::ffi::{CStr, CString, c_char};
use std::ptr;

use tightcalc::derivation::{
    Derivation, System, check_derivation, derivation_from_json, derivation_to_json_string,
};
use tightcalc::eval::{eval_cbv, eval_gs};
use tightcalc::syntax::{Calculus, Configuration, parse_input, size};
use tightcalc::synth::{SynthError, synthesize_tight, verify_soundness};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    FuelExhausted = 4,
    CheckFailed = 5,
    Untypable = 6,
    Blocked = 7,
    Mismatch = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TcCalculus {
    /// Weak open call-by-value, typed by system V.
    Cbv = 0,
    /// Call-by-value with global state, typed by system GS.
    Gs = 1,
}

impl TcCalculus {
    fn calculus(self) -> Calculus {
        match self {
            TcCalculus::Cbv => Calculus::Cbv,
            TcCalculus::Gs => Calculus::Gs,
        }
    }

    fn system(self) -> System {
        match self {
            TcCalculus::Cbv => System::V,
            TcCalculus::Gs => System::Gs,
        }
    }
}

/// A parsed term together with its state (empty for CBV).
pub struct TcConfig {
    inner: Configuration,
    calculus: TcCalculus,
}

/// A type derivation and the system it belongs to.
pub struct TcDerivation {
    inner: Derivation,
    system: System,
}

/// Step counts of an evaluation; `memory_steps` is zero for CBV.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TcEvalResult {
    pub beta_steps: u64,
    pub memory_steps: u64,
    pub normal_size: u64,
    pub blocked: bool,
}

/// Counters of a derivation. In system V `m` is always 0 and `d` is the
/// size counter.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TcCounters {
    pub b: u64,
    pub m: u64,
    pub d: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn fail(status: TcStatus, msg: impl Into<String>) -> TcStatus {
    set_error(msg);
    status
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, TcStatus> {
    if p.is_null() {
        return Err(fail(TcStatus::NullPointer, "null string argument"));
    }
    // SAFETY: the caller guarantees a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|e| fail(TcStatus::InvalidUtf8, e.to_string()))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

fn synth_status(e: &SynthError) -> TcStatus {
    match e {
        SynthError::FuelExhausted(_) => TcStatus::FuelExhausted,
        SynthError::BlockedFinal(_) => TcStatus::Blocked,
        SynthError::Check(_) => TcStatus::CheckFailed,
        SynthError::NotTight | SynthError::WrongSubject(_) => TcStatus::CheckFailed,
        _ => TcStatus::Untypable,
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[unsafe(no_mangle)]
pub extern "C" fn tc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library that has not
/// been freed yet.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tc_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by `CString::into_raw`.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parses a term or a `(term | state)` configuration.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tc_config_parse(
    src: *const c_char,
    calculus: TcCalculus,
    out: *mut *mut TcConfig,
) -> TcStatus {
    clear_error();
    if out.is_null() {
        return fail(TcStatus::NullPointer, "null output pointer");
    }
    let src = match unsafe { read_str(src) } {
        Ok(s) => s,
        Err(st) => return st,
    };
    match parse_input(src, calculus.calculus()) {
        Ok(c) => {
            let handle = Box::new(TcConfig { inner: c, calculus });
            // SAFETY: checked non-null above.
            unsafe { *out = Box::into_raw(handle) };
            TcStatus::Ok
        }
        Err(e) => fail(TcStatus::ParseError, e.to_string()),
    }
}

/// # Safety
/// `c` must be null or a handle from [`tc_config_parse`] not yet freed.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tc_config_free(c: *mut TcConfig) {
    if !c.is_null() {
        // SAFETY: produced by `Box::into_raw`.
        drop(unsafe { Box::from_raw(c) });
    }
}

/// Surface syntax of a configuration; free with [`tc_string_free`].
///
/// # Safety
/// `c` must be a live handle or null.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tc_config_to_string(c: *const TcConfig) -> *mut c_char {
    // SAFETY: the caller passes a live handle or null.
    match unsafe { c.as_ref() } {
        Some(c) => into_c_string(c.inner.to_string()),
        None => ptr::null_mut(),
    }
}

/// Evaluates with at most `fuel` steps.
///
/// # Safety
/// `c` must be a live handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tc_eval(
    c: *const TcConfig,
    fuel: u64,
    out: *mut TcEvalResult,
) -> TcStatus {
    clear_error();
    // SAFETY: the caller passes a live handle or null.
    let Some(c) = (unsafe { c.as_ref() }) else {
        return fail(TcStatus::NullPointer, "null configuration");
    };
    if out.is_null() {
        return fail(TcStatus::NullPointer, "null output pointer");
    }
    let fuel = usize::try_from(fuel).unwrap_or(usize::MAX);
    let result = match c.calculus {
        TcCalculus::Cbv => eval_cbv(&c.inner.term, fuel).ok().map(|o| TcEvalResult {
            beta_steps: o.beta_count as u64,
            memory_steps: 0,
            normal_size: size(&o.normal) as u64,
            blocked: false,
        }),
        TcCalculus::Gs => eval_gs(&c.inner, fuel).ok().map(|o| TcEvalResult {
            beta_steps: o.b as u64,
            memory_steps: o.m as u64,
            normal_size: o.final_config.size() as u64,
            blocked: o.blocked(),
        }),
    };
    match result {
        Some(r) => {
            // SAFETY: checked non-null above.
            unsafe { *out = r };
            TcStatus::Ok
        }
        None => fail(
            TcStatus::FuelExhausted,
            format!("fuel exhausted after {fuel} steps"),
        ),
    }
}

/// Synthesizes a tight derivation for the configuration in the system of its
/// calculus.
///
/// # Safety
/// `c` must be a live handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tc_synthesize(
    c: *const TcConfig,
    fuel: u64,
    out: *mut *mut TcDerivation,
) -> TcStatus {
    clear_error();
    // SAFETY: the caller passes a live handle or null.
    let Some(c) = (unsafe { c.as_ref() }) else {
        return fail(TcStatus::NullPointer, "null configuration");
    };
    if out.is_null() {
        return fail(TcStatus::NullPointer, "null output pointer");
    }
    let system = c.calculus.system();
    let fuel = usize::try_from(fuel).unwrap_or(usize::MAX);
    let result = std::panic::catch_unwind(|| synthesize_tight(&c.inner, system, fuel));
    match result {
        Ok(Ok(d)) => {
            let handle = Box::new(TcDerivation { inner: d, system });
            // SAFETY: checked non-null above.
            unsafe { *out = Box::into_raw(handle) };
            TcStatus::Ok
        }
        Ok(Err(e)) => fail(synth_status(&e), e.to_string()),
        Err(_) => fail(TcStatus::Internal, "internal error during synthesis"),
    }
}

/// Reads a derivation from its JSON form. The system is inferred from the
/// arity of the counters.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tc_derivation_from_json(
    json: *const c_char,
    out: *mut *mut TcDerivation,
) -> TcStatus {
    clear_error();
    if out.is_null() {
        return fail(TcStatus::NullPointer, "null output pointer");
    }
    let src = match unsafe { read_str(json) } {
        Ok(s) => s,
        Err(st) => return st,
    };
    match derivation_from_json(src) {
        Ok((d, system)) => {
            let handle = Box::new(TcDerivation { inner: d, system });
            // SAFETY: checked non-null above.
            unsafe { *out = Box::into_raw(handle) };
            TcStatus::Ok
        }
        Err(e) => fail(TcStatus::ParseError, e.to_string()),
    }
}

/// JSON form of a derivation; free with [`tc_string_free`].
///
/// # Safety
/// `d` must be a live handle or null.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tc_derivation_to_json(d: *const TcDerivation) -> *mut c_char {
    // SAFETY: the caller passes a live handle or null.
    match unsafe { d.as_ref() } {
        Some(d) => into_c_string(derivation_to_json_string(&d.inner, d.system)),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `d` must be null or a derivation handle not yet freed.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tc_derivation_free(d: *mut TcDerivation) {
    if !d.is_null() {
        // SAFETY: produced by `Box::into_raw`.
        drop(unsafe { Box::from_raw(d) });
    }
}

/// Counters at the root of the derivation.
///
/// # Safety
/// `d` must be a live handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tc_derivation_counters(
    d: *const TcDerivation,
    out: *mut TcCounters,
) -> TcStatus {
    clear_error();
    // SAFETY: the caller passes a live handle or null.
    let Some(d) = (unsafe { d.as_ref() }) else {
        return fail(TcStatus::NullPointer, "null derivation");
    };
    if out.is_null() {
        return fail(TcStatus::NullPointer, "null output pointer");
    }
    let c = d.inner.counters();
    // SAFETY: checked non-null above.
    unsafe {
        *out = TcCounters {
            b: c.b,
            m: c.m,
            d: c.d,
        }
    };
    TcStatus::Ok
}

/// Checks every rule instance. On failure the error message names the path
/// of the offending node.
///
/// # Safety
/// `d` must be a live handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tc_derivation_check(d: *const TcDerivation) -> TcStatus {
    clear_error();
    // SAFETY: the caller passes a live handle or null.
    let Some(d) = (unsafe { d.as_ref() }) else {
        return fail(TcStatus::NullPointer, "null derivation");
    };
    match check_derivation(&d.inner, d.system) {
        Ok(()) => TcStatus::Ok,
        Err(v) => fail(TcStatus::CheckFailed, format!("path {:?}: {v}", v.path)),
    }
}

/// Checks the derivation, evaluates its subject and compares the counters.
/// Returns [`TcStatus::Mismatch`] when they differ.
///
/// # Safety
/// `d` must be a live handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tc_derivation_verify(d: *const TcDerivation, fuel: u64) -> TcStatus {
    clear_error();
    // SAFETY: the caller passes a live handle or null.
    let Some(d) = (unsafe { d.as_ref() }) else {
        return fail(TcStatus::NullPointer, "null derivation");
    };
    let fuel = usize::try_from(fuel).unwrap_or(usize::MAX);
    match verify_soundness(&d.inner, d.system, fuel) {
        Ok(cert) if cert.is_match() => TcStatus::Ok,
        Ok(cert) if cert.observed.is_none() => fail(TcStatus::FuelExhausted, cert.diff.join("; ")),
        Ok(cert) => fail(TcStatus::Mismatch, cert.diff.join("; ")),
        Err(SynthError::Check(v)) => fail(TcStatus::CheckFailed, format!("path {:?}: {v}", v.path)),
        Err(e) => fail(synth_status(&e), e.to_string()),
    }
}
