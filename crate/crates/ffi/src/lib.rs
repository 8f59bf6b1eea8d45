//! C ABI for the certification engine.
//!
//! Objects are opaque handles created by `hc_*` constructors and released
//! with the matching `*_free`. Every fallible call returns an [`HcStatus`];
//! the message of the last failure on the calling thread is available from
//! [`hc_last_error_message`]. Strings returned to the caller are released
//! with [`hc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hypocert::kalman::{KalmanCertificate, SystemSpec};
use hypocert::report::{render_json, run_analysis, run_kalman, run_verification, AnalysisConfig, Report, Verdict};
use hypocert::sysfile::{parse_override, SystemFile};
use hypocert::verify::spectral_rate;
use hypocert::{zoo, Error};

/// Outcome of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidSystem = 4,
    KalmanViolated = 5,
    Numerical = 6,
    Panic = 7,
}

/// Overall verdict of a report.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HcVerdict {
    Certified = 0,
    CertifiedWithFallback = 1,
    Failed = 2,
}

/// A loaded system.
pub struct HcSystem {
    file: SystemFile,
    spec: SystemSpec,
}

/// Result of the Kalman analysis.
pub struct HcKalman {
    cert: KalmanCertificate,
}

/// Analysis report, with or without numerical verification.
pub struct HcReport {
    report: Report,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(e: &Error) -> HcStatus {
    match e {
        Error::Parse(_) | Error::UnknownModel(_) | Error::Io(_) => HcStatus::Parse,
        Error::InvalidSystem(_) | Error::Precondition(_) | Error::DimensionMismatch { .. } => HcStatus::InvalidSystem,
        Error::KalmanViolated { .. } => HcStatus::KalmanViolated,
        _ => HcStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), HcStatus>) -> HcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HcStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            HcStatus::Panic
        }
    }
}

fn fail(e: Error) -> HcStatus {
    set_error(e.to_string());
    status_of(&e)
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, HcStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(HcStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|e| {
        set_error(format!("invalid UTF-8: {e}"));
        HcStatus::InvalidUtf8
    })
}

unsafe fn read_ref<'a, T>(p: *const T) -> Result<&'a T, HcStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null handle");
        HcStatus::NullPointer
    })
}

unsafe fn check_out<T>(out: *mut *mut T) -> Result<(), HcStatus> {
    if out.is_null() {
        set_error("null output pointer");
        return Err(HcStatus::NullPointer);
    }
    *out = ptr::null_mut();
    Ok(())
}

fn system_handle(file: SystemFile) -> Result<Box<HcSystem>, HcStatus> {
    let spec = file.to_system().map_err(fail)?;
    Ok(Box::new(HcSystem { file, spec }))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a JSON system file.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_system_from_json(json: *const c_char, out: *mut *mut HcSystem) -> HcStatus {
    guard(|| {
        check_out(out)?;
        let text = read_str(json)?;
        let file = SystemFile::from_json(text).map_err(fail)?;
        *out = Box::into_raw(system_handle(file)?);
        Ok(())
    })
}

/// Loads a built-in model. `params` is null or a comma-separated list of
/// `name=value` overrides.
///
/// # Safety
/// `name` and non-null `params` must be NUL-terminated strings; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_system_from_zoo(name: *const c_char, params: *const c_char, out: *mut *mut HcSystem) -> HcStatus {
    guard(|| {
        check_out(out)?;
        let name = read_str(name)?;
        let mut file = zoo::model(name).map_err(fail)?;
        if !params.is_null() {
            for item in read_str(params)?.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (k, v) = parse_override(item).map_err(fail)?;
                file.set_parameter(&k, &v).map_err(fail)?;
            }
        }
        *out = Box::into_raw(system_handle(file)?);
        Ok(())
    })
}

/// Releases a system. Null is ignored.
///
/// # Safety
/// `sys` must come from an `hc_system_from_*` call and not be used again.
#[no_mangle]
pub unsafe extern "C" fn hc_system_free(sys: *mut HcSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Dimension `n` of a system, 0 for null.
///
/// # Safety
/// `sys` must be null or a live system handle.
#[no_mangle]
pub unsafe extern "C" fn hc_system_dimension(sys: *const HcSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.spec.n)
}

/// Decides the Kalman condition up to order `kmax` (0 selects `n − 1`) and
/// estimates α and β.
///
/// # Safety
/// `sys` must be a live system handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_kalman_check(sys: *const HcSystem, kmax: usize, out: *mut *mut HcKalman) -> HcStatus {
    guard(|| {
        check_out(out)?;
        let s = read_ref(sys)?;
        let cfg = AnalysisConfig { kmax: (kmax > 0).then_some(kmax), ..AnalysisConfig::default() };
        let cert = run_kalman(&s.file, &cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(HcKalman { cert }));
        Ok(())
    })
}

/// Whether the Kalman condition holds.
///
/// # Safety
/// `k` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hc_kalman_holds(k: *const HcKalman) -> bool {
    k.as_ref().is_some_and(|k| k.cert.holds)
}

/// Smallest order `K`, or −1 when the condition fails.
///
/// # Safety
/// `k` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hc_kalman_order(k: *const HcKalman) -> i32 {
    k.as_ref().and_then(|k| k.cert.order).map_or(-1, |o| o as i32)
}

/// Kalman exponent α, or −1 when unavailable.
///
/// # Safety
/// `k` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hc_kalman_alpha(k: *const HcKalman) -> i32 {
    k.as_ref().and_then(|k| k.cert.alpha).map_or(-1, |a| a as i32)
}

/// Kalman exponent β, or −1 when unavailable.
///
/// # Safety
/// `k` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hc_kalman_beta(k: *const HcKalman) -> i32 {
    k.as_ref().and_then(|k| k.cert.beta).map_or(-1, |b| b as i32)
}

/// Releases a Kalman result. Null is ignored.
///
/// # Safety
/// `k` must come from [`hc_kalman_check`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn hc_kalman_free(k: *mut HcKalman) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Runs the tree analysis in both regimes; with `verify` the numerical
/// checks follow, seeded by `seed`.
///
/// # Safety
/// `sys` must be a live system handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_analyze(sys: *const HcSystem, verify: bool, seed: u64, out: *mut *mut HcReport) -> HcStatus {
    guard(|| {
        check_out(out)?;
        let s = read_ref(sys)?;
        let cfg = AnalysisConfig { seed, ..AnalysisConfig::default() }.with_file_options(&s.file.options);
        let report = if verify { run_verification(&s.file, &cfg) } else { run_analysis(&s.file, &cfg) }.map_err(fail)?;
        *out = Box::into_raw(Box::new(HcReport { report }));
        Ok(())
    })
}

/// Verdict of a report; `HC_VERDICT_FAILED` for null.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hc_report_verdict(r: *const HcReport) -> HcVerdict {
    match r.as_ref().map(|r| r.report.verdict) {
        Some(Verdict::Certified) => HcVerdict::Certified,
        Some(Verdict::CertifiedWithFallback) => HcVerdict::CertifiedWithFallback,
        _ => HcVerdict::Failed,
    }
}

/// Certified high-frequency exponent α̃, or −1 for null.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hc_report_alpha(r: *const HcReport) -> i32 {
    r.as_ref().map_or(-1, |r| r.report.high.certificate.exponent as i32)
}

/// Certified low-frequency exponent β̃, or −1 for null.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hc_report_beta(r: *const HcReport) -> i32 {
    r.as_ref().map_or(-1, |r| r.report.low.certificate.exponent as i32)
}

/// Serializes a report as JSON into a new string.
///
/// # Safety
/// `r` must be a live handle; `out` must be writable. The string is
/// released with [`hc_string_free`].
#[no_mangle]
pub unsafe extern "C" fn hc_report_to_json(r: *const HcReport, out: *mut *mut c_char) -> HcStatus {
    guard(|| {
        check_out(out)?;
        let r = read_ref(r)?;
        let s = CString::new(render_json(&r.report)).map_err(|e| fail(Error::Internal(e.to_string())))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `r` must come from [`hc_analyze`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn hc_report_free(r: *mut HcReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn hc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Smallest real part of the spectrum of `iξA + Bᵃ + Bˢ`.
///
/// # Safety
/// `sys` must be a live system handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_spectral_rate(sys: *const HcSystem, xi: f64, out: *mut f64) -> HcStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return Err(HcStatus::NullPointer);
        }
        let s = read_ref(sys)?;
        if !xi.is_finite() || xi == 0.0 {
            return Err(fail(Error::Precondition(format!("frequency must be finite and nonzero, got {xi}"))));
        }
        *out = spectral_rate(&s.spec, xi).rate;
        Ok(())
    })
}
