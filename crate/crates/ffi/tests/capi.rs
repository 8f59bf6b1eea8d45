use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use hypocert_ffi::*;

fn last_error() -> String {
    let p = hc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn zoo(name: &str, params: Option<&str>) -> *mut HcSystem {
    let name = CString::new(name).unwrap();
    let params = params.map(|p| CString::new(p).unwrap());
    let mut sys = ptr::null_mut();
    let st = unsafe { hc_system_from_zoo(name.as_ptr(), params.as_ref().map_or(ptr::null(), |p| p.as_ptr()), &mut sys) };
    assert_eq!(st, HcStatus::Ok, "{}", if st == HcStatus::Ok { String::new() } else { last_error() });
    sys
}

#[test]
fn kalman_accessors_on_sugimoto() {
    let sys = zoo("sugimoto", None);
    unsafe {
        assert_eq!(hc_system_dimension(sys), 3);
        let mut k = ptr::null_mut();
        assert_eq!(hc_kalman_check(sys, 0, &mut k), HcStatus::Ok);
        assert!(hc_kalman_holds(k));
        assert_eq!((hc_kalman_order(k), hc_kalman_alpha(k), hc_kalman_beta(k)), (2, 1, 1));
        hc_kalman_free(k);
        hc_system_free(sys);
    }
}

#[test]
fn analyze_reports_cancellation_through_parameters() {
    for (params, alpha) in [("a=2", 1), ("a=1", 0)] {
        let sys = zoo("timoshenko", Some(params));
        unsafe {
            let mut r = ptr::null_mut();
            assert_eq!(hc_analyze(sys, false, 0, &mut r), HcStatus::Ok);
            assert_eq!(hc_report_alpha(r), alpha, "{params}");
            assert_eq!(hc_report_beta(r), 3);
            assert_eq!(hc_report_verdict(r), HcVerdict::CertifiedWithFallback);
            let mut json = ptr::null_mut();
            assert_eq!(hc_report_to_json(r, &mut json), HcStatus::Ok);
            let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
            hc_string_free(json);
            let v: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert_eq!(v["system"], "timoshenko");
            assert_eq!(v["verdict"], "CERTIFIED-WITH-FALLBACK");
            hc_report_free(r);
            hc_system_free(sys);
        }
    }
}

#[test]
fn verify_through_the_c_abi() {
    let sys = zoo("damped-wave", None);
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(hc_analyze(sys, true, 3, &mut r), HcStatus::Ok);
        assert_eq!(hc_report_verdict(r), HcVerdict::Certified);
        assert_eq!((hc_report_alpha(r), hc_report_beta(r)), (0, 1));
        hc_report_free(r);
        let mut rate = 0.0;
        assert_eq!(hc_spectral_rate(sys, 4.0, &mut rate), HcStatus::Ok);
        assert!((rate - 0.5).abs() < 1e-8, "{rate}");
        assert_eq!(hc_spectral_rate(sys, 0.0, &mut rate), HcStatus::InvalidSystem);
        hc_system_free(sys);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut sys = ptr::null_mut();
        assert_eq!(hc_system_from_json(ptr::null(), &mut sys), HcStatus::NullPointer);
        let bad = CString::new("{\"name\": 1}").unwrap();
        assert_eq!(hc_system_from_json(bad.as_ptr(), &mut sys), HcStatus::Parse);
        assert!(sys.is_null());
        let asym = CString::new(
            r#"{"name": "x", "n": 2, "A": [["0","1"],["2","0"]], "Ba": [["0","0"],["0","0"]], "Bs": [["1","0"],["0","0"]]}"#,
        )
        .unwrap();
        assert_eq!(hc_system_from_json(asym.as_ptr(), &mut sys), HcStatus::InvalidSystem);
        assert!(last_error().contains("A[0][1]"), "{}", last_error());
        let unknown = CString::new("nope").unwrap();
        assert_eq!(hc_system_from_zoo(unknown.as_ptr(), ptr::null(), &mut sys), HcStatus::Parse);
        let invalid = [0xffu8, 0];
        assert_eq!(hc_system_from_zoo(invalid.as_ptr().cast(), ptr::null(), &mut sys), HcStatus::InvalidUtf8);
        let uncontrolled = CString::new(
            r#"{"name": "u", "n": 2, "A": [["1","0"],["0","1"]], "Ba": [["0","0"],["0","0"]], "Bs": [["1","0"],["0","0"]]}"#,
        )
        .unwrap();
        assert_eq!(hc_system_from_json(uncontrolled.as_ptr(), &mut sys), HcStatus::Ok);
        let mut r = ptr::null_mut();
        assert_eq!(hc_analyze(sys, false, 0, &mut r), HcStatus::KalmanViolated);
        assert!(r.is_null());
        assert_eq!(hc_analyze(ptr::null(), false, 0, &mut r), HcStatus::NullPointer);
        hc_system_free(sys);
        hc_system_free(ptr::null_mut());
        hc_report_free(ptr::null_mut());
        hc_string_free(ptr::null_mut());
        assert_eq!(hc_system_dimension(ptr::null()), 0);
        assert_eq!(hc_report_verdict(ptr::null()), HcVerdict::Failed);
    }
}

fn header_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("hypocert.h")
}

#[test]
fn header_declares_every_entry_point() {
    let h = std::fs::read_to_string(header_path()).unwrap();
    for f in [
        "hc_system_from_json",
        "hc_system_from_zoo",
        "hc_system_free",
        "hc_system_dimension",
        "hc_kalman_check",
        "hc_kalman_holds",
        "hc_kalman_order",
        "hc_kalman_alpha",
        "hc_kalman_beta",
        "hc_kalman_free",
        "hc_analyze",
        "hc_report_verdict",
        "hc_report_to_json",
        "hc_report_free",
        "hc_string_free",
        "hc_spectral_rate",
        "hc_last_error_message",
        "HC_STATUS_KALMAN_VIOLATED",
        "typedef struct HcSystem HcSystem",
    ] {
        assert!(h.contains(f), "{f} missing from header");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "hypocert.h"

int main(void) {
    HcSystem *sys = NULL;
    if (hc_system_from_zoo("toy3x3", "b=-1", &sys) != HC_STATUS_OK) return 10;
    HcKalman *k = NULL;
    if (hc_kalman_check(sys, 0, &k) != HC_STATUS_OK) return 11;
    if (!hc_kalman_holds(k) || hc_kalman_order(k) != 2 || hc_kalman_beta(k) != 2) return 12;
    hc_kalman_free(k);
    HcReport *r = NULL;
    if (hc_analyze(sys, false, 0, &r) != HC_STATUS_OK) return 13;
    if (hc_report_alpha(r) != 0) return 14;
    char *json = NULL;
    if (hc_report_to_json(r, &json) != HC_STATUS_OK) return 15;
    hc_string_free(json);
    hc_report_free(r);
    hc_system_free(sys);
    if (hc_system_from_zoo("nope", NULL, &sys) != HC_STATUS_PARSE) return 16;
    printf("%s\n", hc_last_error_message());
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libhypocert_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let src = dir.join("capi_smoke.c");
    let bin = dir.join("capi_smoke");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header_path().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).contains("nope"));
}
