#![allow(clippy::missing_safety_doc)]
//! C ABI for the combadc simulator.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`run_*`
//! functions and released by the matching `*_free`. Every fallible call
//! returns a [`CombadcStatus`]; the message of the most recent failure on
//! the calling thread is available from [`combadc_last_error`].
//!
//! Strings are copied into caller buffers: pass a buffer and its capacity,
//! receive the full length (without the terminating NUL) in `needed`. A
//! too-small buffer yields `COMBADC_BUFFER_TOO_SMALL` and is left holding a
//! truncated, NUL-terminated prefix.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use combadc::harness::{run_scm, run_sweep, ScmOptions, ScmResult, SweepResult};
use combadc::metrics::{waveform_metrics, SineTestOptions};
use combadc::scenario::{load_config, ScenarioConfig};
use combadc::{Error, SampledWaveform};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombadcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ValidationError = 4,
    InvalidArgument = 5,
    RuntimeError = 6,
    OutOfRange = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Opaque scenario configuration.
pub struct CombadcScenario(ScenarioConfig);

/// Opaque sine-sweep result.
pub struct CombadcSweep(SweepResult);

/// Opaque SCM run result.
pub struct CombadcScm(ScmResult);

/// One sweep row. `ok == 0` means the point failed and the metrics are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CombadcSweepPoint {
    pub freq_hz: f64,
    pub subband: u32,
    pub ok: u8,
    pub sfdr_db: f64,
    pub sinad_db: f64,
    pub enob_bits: f64,
}

/// One demodulated channel. `ok == 0` means demodulation failed.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CombadcChannel {
    pub channel: u32,
    pub ok: u8,
    pub snr_db: f64,
    pub unequalized_snr_db: f64,
}

/// Sine-test metrics of a caller-supplied capture.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CombadcMetrics {
    pub sfdr_db: f64,
    pub sinad_db: f64,
    pub enob_bits: f64,
    pub fundamental_hz: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> CombadcStatus {
    match e {
        Error::Parse { .. } => CombadcStatus::ParseError,
        Error::Validation { .. } => CombadcStatus::ValidationError,
        Error::InvalidParameter { .. } => CombadcStatus::InvalidArgument,
        Error::SubbandOutOfRange { .. } => CombadcStatus::OutOfRange,
        _ => CombadcStatus::RuntimeError,
    }
}

fn fail(e: Error) -> CombadcStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

/// Run `f`, turning panics into `Panic`.
fn guard(f: impl FnOnce() -> CombadcStatus) -> CombadcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == CombadcStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => {
            set_error("internal panic");
            CombadcStatus::Panic
        }
    }
}

unsafe fn copy_out(text: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> CombadcStatus {
    if !needed.is_null() {
        *needed = text.len();
    }
    if buf.is_null() || cap == 0 {
        return if text.is_empty() && cap > 0 {
            CombadcStatus::Ok
        } else {
            set_error("buffer too small");
            CombadcStatus::BufferTooSmall
        };
    }
    let n = text.len().min(cap - 1);
    ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, n);
    *buf.add(n) = 0;
    if n < text.len() {
        set_error("buffer too small");
        return CombadcStatus::BufferTooSmall;
    }
    CombadcStatus::Ok
}

fn into_handle<T>(value: T, out: *mut *mut T) -> CombadcStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    CombadcStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn combadc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copy the calling thread's last error message.
#[no_mangle]
pub unsafe extern "C" fn combadc_last_error(buf: *mut c_char, cap: usize, needed: *mut usize) -> CombadcStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    copy_out(&msg, buf, cap, needed)
}

/// Scenario with every parameter at its default.
#[no_mangle]
pub unsafe extern "C" fn combadc_scenario_default(out: *mut *mut CombadcScenario) -> CombadcStatus {
    guard(|| {
        if out.is_null() {
            return CombadcStatus::NullPointer;
        }
        into_handle(CombadcScenario(ScenarioConfig::default()), out)
    })
}

/// Parse and validate config text (`section.key = value` lines).
#[no_mangle]
pub unsafe extern "C" fn combadc_scenario_from_text(text: *const c_char, out: *mut *mut CombadcScenario) -> CombadcStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return CombadcStatus::NullPointer;
        }
        let Ok(s) = CStr::from_ptr(text).to_str() else {
            set_error("config text is not UTF-8");
            return CombadcStatus::InvalidUtf8;
        };
        match load_config(s) {
            Ok(c) => into_handle(CombadcScenario(c), out),
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn combadc_scenario_free(h: *mut CombadcScenario) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

#[no_mangle]
pub unsafe extern "C" fn combadc_scenario_set_seed(h: *mut CombadcScenario, seed: u64) -> CombadcStatus {
    match h.as_mut() {
        Some(s) => {
            s.0.master_seed = seed;
            CombadcStatus::Ok
        }
        None => CombadcStatus::NullPointer,
    }
}

/// Canonical config text; loading it reproduces the scenario.
#[no_mangle]
pub unsafe extern "C" fn combadc_scenario_to_text(
    h: *const CombadcScenario,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> CombadcStatus {
    guard(|| match h.as_ref() {
        Some(s) => copy_out(&s.0.to_config_text(), buf, cap, needed),
        None => CombadcStatus::NullPointer,
    })
}

/// Run the configured sine sweep on `jobs` threads (0 = all cores).
#[no_mangle]
pub unsafe extern "C" fn combadc_run_sweep(h: *const CombadcScenario, jobs: u32, out: *mut *mut CombadcSweep) -> CombadcStatus {
    guard(|| {
        let (Some(s), false) = (h.as_ref(), out.is_null()) else {
            return CombadcStatus::NullPointer;
        };
        match run_sweep(&s.0, jobs as usize) {
            Ok(r) => into_handle(CombadcSweep(r), out),
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn combadc_sweep_len(h: *const CombadcSweep) -> usize {
    h.as_ref().map_or(0, |s| s.0.points.len())
}

#[no_mangle]
pub unsafe extern "C" fn combadc_sweep_point(h: *const CombadcSweep, index: usize, out: *mut CombadcSweepPoint) -> CombadcStatus {
    let (Some(s), Some(o)) = (h.as_ref(), out.as_mut()) else {
        return CombadcStatus::NullPointer;
    };
    let Some(p) = s.0.points.get(index) else {
        set_error(format!("point {index} out of range"));
        return CombadcStatus::OutOfRange;
    };
    let (ok, sfdr, sinad, enob) = match &p.result {
        Ok(r) => (1, r.sfdr_db, r.sinad_db, r.enob_bits),
        Err(_) => (0, f64::NAN, f64::NAN, f64::NAN),
    };
    *o = CombadcSweepPoint {
        freq_hz: p.freq_hz,
        subband: p.subband as u32,
        ok,
        sfdr_db: sfdr,
        sinad_db: sinad,
        enob_bits: enob,
    };
    CombadcStatus::Ok
}

/// `freq_ghz,sfdr_db,sinad_db,enob_bits` CSV.
#[no_mangle]
pub unsafe extern "C" fn combadc_sweep_csv(h: *const CombadcSweep, buf: *mut c_char, cap: usize, needed: *mut usize) -> CombadcStatus {
    guard(|| match h.as_ref() {
        Some(s) => copy_out(&s.0.to_csv(), buf, cap, needed),
        None => CombadcStatus::NullPointer,
    })
}

#[no_mangle]
pub unsafe extern "C" fn combadc_sweep_free(h: *mut CombadcSweep) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Run the SCM link. `channel == 0` demodulates every active channel;
/// otherwise only that one, and `mute_others != 0` transmits it alone.
#[no_mangle]
pub unsafe extern "C" fn combadc_run_scm(
    h: *const CombadcScenario,
    channel: u32,
    mute_others: u8,
    jobs: u32,
    out: *mut *mut CombadcScm,
) -> CombadcStatus {
    guard(|| {
        let (Some(s), false) = (h.as_ref(), out.is_null()) else {
            return CombadcStatus::NullPointer;
        };
        let opts = ScmOptions {
            channels: (channel > 0).then(|| vec![channel as usize]),
            mute_others: mute_others != 0,
        };
        match run_scm(&s.0, &opts, jobs as usize) {
            Ok(r) => into_handle(CombadcScm(r), out),
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn combadc_scm_len(h: *const CombadcScm) -> usize {
    h.as_ref().map_or(0, |s| s.0.channels.len())
}

#[no_mangle]
pub unsafe extern "C" fn combadc_scm_channel(h: *const CombadcScm, index: usize, out: *mut CombadcChannel) -> CombadcStatus {
    let (Some(s), Some(o)) = (h.as_ref(), out.as_mut()) else {
        return CombadcStatus::NullPointer;
    };
    let Some(c) = s.0.channels.get(index) else {
        set_error(format!("channel index {index} out of range"));
        return CombadcStatus::OutOfRange;
    };
    let (ok, snr, uneq) = match &c.report {
        Ok(r) => (1, r.snr_db, r.unequalized_snr_db),
        Err(_) => (0, f64::NAN, f64::NAN),
    };
    *o = CombadcChannel { channel: c.channel as u32, ok, snr_db: snr, unequalized_snr_db: uneq };
    CombadcStatus::Ok
}

/// `channel,snr_db` CSV.
#[no_mangle]
pub unsafe extern "C" fn combadc_scm_csv(h: *const CombadcScm, buf: *mut c_char, cap: usize, needed: *mut usize) -> CombadcStatus {
    guard(|| match h.as_ref() {
        Some(s) => copy_out(&s.0.to_csv(), buf, cap, needed),
        None => CombadcStatus::NullPointer,
    })
}

#[no_mangle]
pub unsafe extern "C" fn combadc_scm_free(h: *mut CombadcScm) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Sine test (default analysis: 1 GSa/s, 4 x 16384-point periodogram,
/// 10-500 MHz) of `len` samples at `rate` Hz.
#[no_mangle]
pub unsafe extern "C" fn combadc_sine_metrics(
    samples: *const f64,
    len: usize,
    rate: f64,
    expected_hz: f64,
    out: *mut CombadcMetrics,
) -> CombadcStatus {
    guard(|| {
        if samples.is_null() || out.is_null() {
            return CombadcStatus::NullPointer;
        }
        let x = std::slice::from_raw_parts(samples, len).to_vec();
        let r = SampledWaveform::new(x, rate).and_then(|w| waveform_metrics(&w, expected_hz, &SineTestOptions::default()));
        match r {
            Ok(r) => {
                *out = CombadcMetrics {
                    sfdr_db: r.sfdr_db,
                    sinad_db: r.sinad_db,
                    enob_bits: r.enob_bits,
                    fundamental_hz: r.fundamental_hz,
                };
                CombadcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
