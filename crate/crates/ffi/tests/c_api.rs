use std::ffi::{CStr, CString};
use std::ptr;

use tightcalc_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = tc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(src: &str, calc: TcCalculus) -> *mut TcConfig {
    let mut cfg = ptr::null_mut();
    let st = unsafe { tc_config_parse(c(src).as_ptr(), calc, &mut cfg) };
    assert_eq!(st, TcStatus::Ok);
    cfg
}

#[test]
fn first_example_through_the_c_api() {
    let cfg = parse(r"(\x.(x x) (y y)) (\z.z)", TcCalculus::Cbv);
    let mut r = TcEvalResult::default();
    assert_eq!(unsafe { tc_eval(cfg, 1000, &mut r) }, TcStatus::Ok);
    assert_eq!(
        (r.beta_steps, r.memory_steps, r.normal_size, r.blocked),
        (2, 0, 2, false)
    );

    let mut d = ptr::null_mut();
    assert_eq!(unsafe { tc_synthesize(cfg, 1000, &mut d) }, TcStatus::Ok);
    let mut k = TcCounters::default();
    assert_eq!(unsafe { tc_derivation_counters(d, &mut k) }, TcStatus::Ok);
    assert_eq!((k.b, k.d), (2, 2));
    assert_eq!(unsafe { tc_derivation_check(d) }, TcStatus::Ok);
    assert_eq!(unsafe { tc_derivation_verify(d, 1000) }, TcStatus::Ok);
    unsafe {
        tc_derivation_free(d);
        tc_config_free(cfg);
    }
}

#[test]
fn second_example_and_json_round_trip() {
    let cfg = parse(
        r"((\x.get(l, y. y x)) (set(l, \z.z, z)) | [])",
        TcCalculus::Gs,
    );
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { tc_synthesize(cfg, 1000, &mut d) }, TcStatus::Ok);
    let json = unsafe { tc_derivation_to_json(d) };
    assert!(!json.is_null());
    let mut back = ptr::null_mut();
    assert_eq!(
        unsafe { tc_derivation_from_json(json, &mut back) },
        TcStatus::Ok
    );
    let mut k = TcCounters::default();
    unsafe { tc_derivation_counters(back, &mut k) };
    assert_eq!(k, TcCounters { b: 2, m: 2, d: 0 });
    assert_eq!(unsafe { tc_derivation_verify(back, 1000) }, TcStatus::Ok);
    unsafe {
        tc_string_free(json);
        tc_derivation_free(back);
        tc_derivation_free(d);
        tc_config_free(cfg);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let mut cfg = ptr::null_mut();
    let st = unsafe { tc_config_parse(c(r"(\x. x").as_ptr(), TcCalculus::Cbv, &mut cfg) };
    assert_eq!(st, TcStatus::ParseError);
    assert!(cfg.is_null());
    assert!(last_error().contains("syntax error"));

    assert_eq!(
        unsafe { tc_config_parse(ptr::null(), TcCalculus::Cbv, &mut cfg) },
        TcStatus::NullPointer
    );
    assert_eq!(
        unsafe { tc_derivation_check(ptr::null()) },
        TcStatus::NullPointer
    );

    let bad = [0xffu8, 0];
    let st = unsafe { tc_config_parse(bad.as_ptr().cast(), TcCalculus::Cbv, &mut cfg) };
    assert_eq!(st, TcStatus::InvalidUtf8);
}

#[test]
fn blocked_and_diverging_inputs() {
    let cfg = parse("(get(l, x. x) | [])", TcCalculus::Gs);
    let mut d = ptr::null_mut();
    assert_eq!(
        unsafe { tc_synthesize(cfg, 100, &mut d) },
        TcStatus::Blocked
    );
    assert!(d.is_null());
    let mut r = TcEvalResult::default();
    assert_eq!(unsafe { tc_eval(cfg, 100, &mut r) }, TcStatus::Ok);
    assert!(r.blocked);
    unsafe { tc_config_free(cfg) };

    let omega = parse(r"(\x.x x) (\x.x x)", TcCalculus::Cbv);
    assert_eq!(
        unsafe { tc_eval(omega, 50, &mut r) },
        TcStatus::FuelExhausted
    );
    assert_eq!(
        unsafe { tc_synthesize(omega, 50, &mut d) },
        TcStatus::FuelExhausted
    );
    unsafe { tc_config_free(omega) };
}

#[test]
fn corrupted_derivation_fails_the_check_with_a_path() {
    let cfg = parse(r"(\x.x) y", TcCalculus::Cbv);
    let mut d = ptr::null_mut();
    unsafe { tc_synthesize(cfg, 100, &mut d) };
    let json = unsafe { tc_derivation_to_json(d) };
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    let corrupted = text.replacen("      1,\n", "      2,\n", 1);
    assert_ne!(text, corrupted);
    let mut bad = ptr::null_mut();
    assert_eq!(
        unsafe { tc_derivation_from_json(c(&corrupted).as_ptr(), &mut bad) },
        TcStatus::Ok
    );
    assert_eq!(unsafe { tc_derivation_check(bad) }, TcStatus::CheckFailed);
    assert!(last_error().starts_with("path []"));
    assert_eq!(
        unsafe { tc_derivation_verify(bad, 100) },
        TcStatus::CheckFailed
    );
    unsafe {
        tc_string_free(json);
        tc_derivation_free(bad);
        tc_derivation_free(d);
        tc_config_free(cfg);
    }
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        tc_string_free(ptr::null_mut());
        tc_config_free(ptr::null_mut());
        tc_derivation_free(ptr::null_mut());
    }
    assert!(unsafe { tc_config_to_string(ptr::null()) }.is_null());
}

#[test]
fn header_declares_the_exported_functions() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/tightcalc.h"))
            .unwrap();
    for f in [
        "tc_last_error",
        "tc_string_free",
        "tc_config_parse",
        "tc_config_free",
        "tc_config_to_string",
        "tc_eval",
        "tc_synthesize",
        "tc_derivation_from_json",
        "tc_derivation_to_json",
        "tc_derivation_free",
        "tc_derivation_counters",
        "tc_derivation_check",
        "tc_derivation_verify",
    ] {
        assert!(
            header.contains(&format!("{f}(")),
            "{f} missing from the header"
        );
    }
    assert!(header.contains("typedef struct TcConfig TcConfig;"));
}
