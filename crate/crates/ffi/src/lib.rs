//! C interface to the `freqbeam` core: opaque handles, integer status codes
//! and a per-thread last-error message.
//!
//! Every function returning `FbStatus` writes results through out-pointers
//! and leaves them untouched on failure. Handles are released with the
//! matching `*_free` function; passing NULL to a `*_free` is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use freqbeam::config::KeyValues;
use freqbeam::correlation::g2_cross_analytic;
use freqbeam::estimation::{fit_beating, normalize_histogram, FitOptions, FitResult, SignalShape};
use freqbeam::montecarlo::{
    simulate_histogram, synthetic_histogram, with_threads, CorrelationHistogram, CorrelationMode,
    ExperimentConfig,
};
use freqbeam::phasematch::pump_separation_from_fsr;
use freqbeam::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbStatus {
    Ok = 0,
    /// A required pointer was NULL or a buffer was too small.
    NullOrBuffer = 1,
    /// Rejected parameter or malformed configuration.
    Config = 2,
    /// Numerical failure: normalization, convergence, resolution.
    Numerical = 3,
    Io = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// Correlation measurement geometry.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbMode {
    /// Red versus blue port.
    Cross = 0,
    /// Two detectors on the blue port.
    Auto = 1,
}

/// Histogram partition selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbPartition {
    InSync = 0,
    Normalization = 1,
}

/// Opaque experiment configuration.
pub struct FbConfig(ExperimentConfig);
/// Opaque coincidence histogram.
pub struct FbHistogram(CorrelationHistogram);
/// Opaque fit result.
pub struct FbFit(FitResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).expect("NUL bytes removed"));
}

fn status_of(e: &Error) -> FbStatus {
    if e.is_config() {
        FbStatus::Config
    } else if matches!(e, Error::Io(_)) {
        FbStatus::Io
    } else {
        FbStatus::Numerical
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (FbStatus, String)>) -> FbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FbStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside freqbeam");
            FbStatus::Panic
        }
    }
}

fn core(e: Error) -> (FbStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (FbStatus, String) {
    (FbStatus::NullOrBuffer, format!("`{what}` is NULL"))
}

unsafe fn reference<'a, T>(p: *const T, what: &str) -> Result<&'a T, (FbStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(p: *mut T, what: &str, value: T) -> Result<(), (FbStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

fn mode_of(m: FbMode) -> CorrelationMode {
    match m {
        FbMode::Cross => CorrelationMode::Cross,
        FbMode::Auto => CorrelationMode::Auto,
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn fb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default configuration (calibrated pair rate, balanced splitter, 1 h).
#[no_mangle]
pub extern "C" fn fb_config_new_default() -> *mut FbConfig {
    Box::into_raw(Box::new(FbConfig(ExperimentConfig::default())))
}

/// Parses `key = value` configuration text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fb_config_parse(text: *const c_char, out: *mut *mut FbConfig) -> FbStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| (FbStatus::Config, "configuration is not UTF-8".to_owned()))?;
        let kv = KeyValues::parse(text).map_err(core)?;
        let cfg = ExperimentConfig::from_key_values(&kv).map_err(core)?;
        write_out(out, "out", Box::into_raw(Box::new(FbConfig(cfg))))
    })
}

/// Sets ΔΩ (rad/s) by moving the splitter pump separation.
///
/// # Safety
/// `cfg` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fb_config_set_detuning(cfg: *mut FbConfig, detuning_rad_s: f64) -> FbStatus {
    guard(|| {
        let c = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let mut next = c.0.clone();
        next.set_detuning(detuning_rad_s);
        next.validate().map_err(core)?;
        c.0 = next;
        Ok(())
    })
}

/// Sets the splitter ideality α, the integration time (s) and the seed.
///
/// # Safety
/// `cfg` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fb_config_set_run(
    cfg: *mut FbConfig,
    visibility: f64,
    duration_s: f64,
    seed: u64,
) -> FbStatus {
    guard(|| {
        let c = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let mut next = c.0.clone();
        next.visibility = visibility;
        next.duration = duration_s;
        next.seed = seed;
        next.validate().map_err(core)?;
        c.0 = next;
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fb_config_free(cfg: *mut FbConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Event-level Monte Carlo acquisition. `threads` = 0 uses the global pool;
/// the result does not depend on it.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fb_simulate(
    cfg: *const FbConfig,
    mode: FbMode,
    threads: usize,
    out: *mut *mut FbHistogram,
) -> FbStatus {
    guard(|| {
        let c = reference(cfg, "cfg")?;
        let run = || simulate_histogram(&c.0, mode_of(mode));
        let hist = if threads == 0 {
            run()
        } else {
            with_threads(threads, run).and_then(|r| r)
        }
        .map_err(core)?;
        write_out(out, "out", Box::into_raw(Box::new(FbHistogram(hist))))
    })
}

/// Poisson draw of the expected histogram.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fb_synthetic_histogram(
    cfg: *const FbConfig,
    mode: FbMode,
    seed: u64,
    out: *mut *mut FbHistogram,
) -> FbStatus {
    guard(|| {
        let c = reference(cfg, "cfg")?;
        let hist = synthetic_histogram(&c.0, mode_of(mode), seed).map_err(core)?;
        write_out(out, "out", Box::into_raw(Box::new(FbHistogram(hist))))
    })
}

/// Number of delay bins; 0 for a NULL handle.
///
/// # Safety
/// `hist` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fb_histogram_n_bins(hist: *const FbHistogram) -> usize {
    hist.as_ref().map_or(0, |h| h.0.n_bins())
}

/// Copies one partition's counts and the bin centers (s) into caller
/// buffers of length `len`, which must be at least the bin count.
/// `centers` may be NULL.
///
/// # Safety
/// Buffers must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn fb_histogram_copy(
    hist: *const FbHistogram,
    partition: FbPartition,
    counts: *mut u64,
    centers: *mut f64,
    len: usize,
) -> FbStatus {
    guard(|| {
        let h = &reference(hist, "hist")?.0;
        if counts.is_null() {
            return Err(null("counts"));
        }
        if len < h.n_bins() {
            return Err((
                FbStatus::NullOrBuffer,
                format!("buffer holds {len} values, histogram has {}", h.n_bins()),
            ));
        }
        let src = match partition {
            FbPartition::InSync => &h.in_sync,
            FbPartition::Normalization => &h.normalization,
        };
        std::slice::from_raw_parts_mut(counts, src.len()).copy_from_slice(src);
        if !centers.is_null() {
            let dst = std::slice::from_raw_parts_mut(centers, src.len());
            for (i, c) in dst.iter_mut().enumerate() {
                *c = h.bin_center(i);
            }
        }
        Ok(())
    })
}

/// # Safety
/// `hist` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fb_histogram_free(hist: *mut FbHistogram) {
    if !hist.is_null() {
        drop(Box::from_raw(hist));
    }
}

/// Normalizes and fits a histogram. The splitter efficiency and jitter come
/// from `cfg`.
///
/// # Safety
/// Handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fb_fit(
    hist: *const FbHistogram,
    cfg: *const FbConfig,
    out: *mut *mut FbFit,
) -> FbStatus {
    guard(|| {
        let h = &reference(hist, "hist")?.0;
        let c = &reference(cfg, "cfg")?.0;
        let data = normalize_histogram(h).map_err(core)?;
        let efficiency = c.splitter().map_err(core)?.efficiency();
        let opts = FitOptions {
            shape: Some(SignalShape::for_mode(data.mode, efficiency)),
            jitter_sigma: c.jitter_sigma,
            ..FitOptions::default()
        };
        let fit = fit_beating(&data, &opts).map_err(core)?;
        write_out(out, "out", Box::into_raw(Box::new(FbFit(fit))))
    })
}

/// Estimate and 1σ error of parameter `index`: 0 amplitude, 1 linewidth
/// (rad/s), 2 detuning (rad/s), 3 visibility, 4 offset (s), 5 background.
///
/// # Safety
/// `fit` must be a live handle; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fb_fit_estimate(
    fit: *const FbFit,
    index: usize,
    value: *mut f64,
    sigma: *mut f64,
) -> FbStatus {
    guard(|| {
        let f = &reference(fit, "fit")?.0;
        let e = f.estimates.get(index).ok_or_else(|| {
            (FbStatus::Config, format!("parameter index {index} is out of range"))
        })?;
        write_out(value, "value", e.value)?;
        write_out(sigma, "sigma", e.sigma)
    })
}

/// Raw visibility from the bins adjacent to τ = 0; NaN when undefined.
///
/// # Safety
/// `fit` must be a live handle; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fb_fit_raw_visibility(
    fit: *const FbFit,
    value: *mut f64,
    sigma: *mut f64,
) -> FbStatus {
    guard(|| {
        let f = &reference(fit, "fit")?.0;
        let (v, s) = f.raw.map_or((f64::NAN, f64::NAN), |r| (r.alpha, r.sigma));
        write_out(value, "value", v)?;
        write_out(sigma, "sigma", s)
    })
}

/// χ²/dof of the fit; NaN for a NULL handle.
///
/// # Safety
/// `fit` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fb_fit_reduced_chi2(fit: *const FbFit) -> f64 {
    fit.as_ref().map_or(f64::NAN, |f| f.0.reduced_chi2)
}

/// # Safety
/// `fit` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fb_fit_free(fit: *mut FbFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Closed-form cross-port G² with visibility α at `n` delays (s).
///
/// # Safety
/// `tau` and `out` must hold `n` elements.
#[no_mangle]
pub unsafe extern "C" fn fb_g2_cross_analytic(
    linewidth_rad_s: f64,
    detuning_rad_s: f64,
    visibility: f64,
    tau: *const f64,
    n: usize,
    out: *mut f64,
) -> FbStatus {
    guard(|| {
        if n == 0 {
            return Ok(());
        }
        if tau.is_null() {
            return Err(null("tau"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let tau = std::slice::from_raw_parts(tau, n);
        let curve = g2_cross_analytic(linewidth_rad_s, detuning_rad_s, visibility, tau).map_err(core)?;
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(&curve.values);
        Ok(())
    })
}

/// Splitter pump separation Ω = 2π·2m·FSR (rad/s) matching resonances ±m.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fb_pump_separation_from_fsr(fsr_hz: f64, m: i32, out: *mut f64) -> FbStatus {
    guard(|| {
        let v = pump_separation_from_fsr(fsr_hz, m).map_err(core)?;
        write_out(out, "out", v)
    })
}
