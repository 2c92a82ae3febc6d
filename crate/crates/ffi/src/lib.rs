//! C ABI over the `adaptive-pilot` crate.
//!
//! Every fallible function returns an [`ApStatus`] and writes results through
//! out-pointers. On failure, [`ap_last_error_message`] describes the error for
//! the calling thread. Controllers are opaque handles created with
//! [`ap_controller_new`] and released with [`ap_controller_free`].
//!
//! Pointer arguments must be null or valid for the stated length; output
//! pointers documented as optional may be null.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use adaptive_pilot::controller::{self, select_pattern, BoundarySet, Controller, ControllerParams, DataDecision};
use adaptive_pilot::phy::constellation::Modulation;
use adaptive_pilot::{run_link, ChannelProfile, Error, LinkConfig, LinkMode};
use num_complex::Complex64;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    LengthMismatch = 3,
    SingularEstimate = 4,
    ZeroEnergy = 5,
    IndexOutOfRange = 6,
    Internal = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApComplex {
    pub re: f64,
    pub im: f64,
}

/// Link parameters. `modulation_order` is bits per symbol (2 or 4).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApLinkConfig {
    pub num_subcarriers: usize,
    pub cp_length: usize,
    pub subcarrier_bandwidth: f64,
    pub symbol_time: f64,
    pub modulation_order: u32,
    pub base_pilot_period: usize,
    pub pilots_per_sounding: usize,
    pub pilot_subcarrier_spacing: usize,
    pub snr_db: f64,
    pub ber_threshold: f64,
    pub ber_window: usize,
    pub feedback_delay: usize,
    pub rng_seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ApRunMetrics {
    pub total_bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub data_rate_fraction: f64,
    pub resets: u64,
    pub pattern_occupancy: [f64; 4],
    pub seed: u64,
}

/// Opaque controller handle.
pub struct ApController {
    inner: Controller,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> ApStatus {
    match err {
        Error::LengthMismatch { .. } | Error::InsufficientBits { .. } => ApStatus::LengthMismatch,
        Error::SingularEstimate => ApStatus::SingularEstimate,
        Error::ZeroEnergy => ApStatus::ZeroEnergy,
        Error::IndexOutOfRange(_) => ApStatus::IndexOutOfRange,
        Error::Io { .. } | Error::Parse { .. } => ApStatus::Internal,
        _ => ApStatus::InvalidArgument,
    }
}

struct Failure(ApStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ApStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ApStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            ApStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside adaptive-pilot");
            ApStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or_else(|| null(what))
}

unsafe fn complex_slice(ptr: *const ApComplex, len: usize, what: &str) -> Result<Vec<Complex64>, Failure> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    let s: &[ApComplex] = std::slice::from_raw_parts(ptr, len);
    Ok(s.iter().map(|c| Complex64::new(c.re, c.im)).collect())
}

fn boundaries(set: u32) -> Result<BoundarySet, Failure> {
    if set == 0 {
        Ok(BoundarySet::from_polynomials())
    } else {
        Ok(BoundarySet::table(set as usize)?)
    }
}

/// Message describing the last failed call on this thread; empty after a
/// successful call. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ap_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ap_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn ap_link_config_default() -> ApLinkConfig {
    LinkConfig::default().into()
}

impl From<LinkConfig> for ApLinkConfig {
    fn from(c: LinkConfig) -> Self {
        ApLinkConfig {
            num_subcarriers: c.num_subcarriers,
            cp_length: c.cp_length,
            subcarrier_bandwidth: c.subcarrier_bandwidth,
            symbol_time: c.symbol_time,
            modulation_order: c.modulation.bits_per_symbol() as u32,
            base_pilot_period: c.base_pilot_period,
            pilots_per_sounding: c.pilots_per_sounding,
            pilot_subcarrier_spacing: c.pilot_subcarrier_spacing,
            snr_db: c.snr_db,
            ber_threshold: c.ber_threshold,
            ber_window: c.ber_window,
            feedback_delay: c.feedback_delay,
            rng_seed: c.rng_seed,
        }
    }
}

impl TryFrom<&ApLinkConfig> for LinkConfig {
    type Error = Error;

    fn try_from(c: &ApLinkConfig) -> Result<Self, Error> {
        let config = LinkConfig {
            num_subcarriers: c.num_subcarriers,
            cp_length: c.cp_length,
            subcarrier_bandwidth: c.subcarrier_bandwidth,
            symbol_time: c.symbol_time,
            modulation: Modulation::try_from(c.modulation_order).map_err(Error::InvalidConfig)?,
            base_pilot_period: c.base_pilot_period,
            pilots_per_sounding: c.pilots_per_sounding,
            pilot_subcarrier_spacing: c.pilot_subcarrier_spacing,
            snr_db: c.snr_db,
            ber_threshold: c.ber_threshold,
            ber_window: c.ber_window,
            feedback_delay: c.feedback_delay,
            rng_seed: c.rng_seed,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Lower correlation boundary of zero-based pattern `i`.
#[no_mangle]
pub unsafe extern "C" fn ap_lower_boundary(i: usize, out_value: *mut f64) -> ApStatus {
    guard(|| {
        *out(out_value, "out_value")? = controller::lower_boundary(i)?;
        Ok(())
    })
}

/// Upper correlation boundary of zero-based pattern `i`.
#[no_mangle]
pub unsafe extern "C" fn ap_higher_boundary(i: usize, out_value: *mut f64) -> ApStatus {
    guard(|| {
        *out(out_value, "out_value")? = controller::higher_boundary(i)?;
        Ok(())
    })
}

/// Normalized cross-correlation of two pilot observations of length `len`.
#[no_mangle]
pub unsafe extern "C" fn ap_cross_correlation(
    p1: *const ApComplex,
    p2: *const ApComplex,
    len: usize,
    out_r: *mut f64,
) -> ApStatus {
    guard(|| {
        let a = complex_slice(p1, len, "p1")?;
        let b = complex_slice(p2, len, "p2")?;
        *out(out_r, "out_r")? = controller::cross_correlation(&a, &b)?;
        Ok(())
    })
}

/// Pattern for correlation `r`. `boundary_set` is 1..=5, or 0 for the
/// polynomial boundaries. Writes the one-based pattern number and its period.
#[no_mangle]
pub unsafe extern "C" fn ap_select_pattern(
    r: f64,
    boundary_set: u32,
    base_period: usize,
    out_pattern: *mut u32,
    out_period: *mut usize,
) -> ApStatus {
    guard(|| {
        if base_period == 0 {
            return Err(Failure(ApStatus::InvalidArgument, "base_period must be >= 1".into()));
        }
        let b = boundaries(boundary_set)?;
        let p = select_pattern(r, &b, base_period, 1);
        *out(out_pattern, "out_pattern")? = p.number() as u32;
        *out(out_period, "out_period")? = p.period;
        Ok(())
    })
}

/// Creates a controller. `boundary_set` is 1..=5, or 0 for the polynomial
/// boundaries.
#[no_mangle]
pub unsafe extern "C" fn ap_controller_new(
    config: *const ApLinkConfig,
    boundary_set: u32,
    out_handle: *mut *mut ApController,
) -> ApStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        *slot = std::ptr::null_mut();
        let cfg = config.as_ref().ok_or_else(|| null("config"))?;
        let link = LinkConfig::try_from(cfg)?;
        let ctl = Controller::new(ControllerParams::from_config(&link, boundaries(boundary_set)?))?;
        *slot = Box::into_raw(Box::new(ApController { inner: ctl }));
        Ok(())
    })
}

/// Releases a controller; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ap_controller_free(handle: *mut ApController) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Feeds one sounding's received pilots. `out_r` receives the correlation
/// with the previous sounding, or NaN for the first one after a reset.
#[no_mangle]
pub unsafe extern "C" fn ap_controller_on_sounding(
    handle: *mut ApController,
    pilots: *const ApComplex,
    len: usize,
    out_r: *mut f64,
    out_pattern: *mut u32,
) -> ApStatus {
    guard(|| {
        let ctl = out(handle, "handle")?;
        let obs = complex_slice(pilots, len, "pilots")?;
        let outcome = ctl.inner.on_sounding(&obs)?;
        if let Some(r) = out_r.as_mut() {
            *r = outcome.correlation.unwrap_or(f64::NAN);
        }
        if let Some(p) = out_pattern.as_mut() {
            *p = outcome.pattern.number() as u32;
        }
        Ok(())
    })
}

/// Feeds the bit errors of one data symbol; `out_reset` is set when the
/// controller fell back to pattern 1.
#[no_mangle]
pub unsafe extern "C" fn ap_controller_on_data_symbol(
    handle: *mut ApController,
    bit_errors: u64,
    bits: u64,
    out_reset: *mut bool,
) -> ApStatus {
    guard(|| {
        let ctl = out(handle, "handle")?;
        if bits == 0 || bit_errors > bits {
            return Err(Failure(ApStatus::InvalidArgument, "need 0 <= bit_errors <= bits, bits > 0".into()));
        }
        let outcome = ctl.inner.on_data_symbol(bit_errors, bits);
        if let Some(r) = out_reset.as_mut() {
            *r = outcome.decision == DataDecision::ResetToPattern1;
        }
        Ok(())
    })
}

/// Current one-based pattern, its period, and whether the next symbol should
/// be a sounding.
#[no_mangle]
pub unsafe extern "C" fn ap_controller_state(
    handle: *const ApController,
    out_pattern: *mut u32,
    out_period: *mut usize,
    out_sounding_due: *mut bool,
) -> ApStatus {
    guard(|| {
        let ctl = handle.as_ref().ok_or_else(|| null("handle"))?;
        let p = ctl.inner.pattern();
        if let Some(o) = out_pattern.as_mut() {
            *o = p.number() as u32;
        }
        if let Some(o) = out_period.as_mut() {
            *o = p.period;
        }
        if let Some(o) = out_sounding_due.as_mut() {
            *o = ctl.inner.sounding_due();
        }
        Ok(())
    })
}

/// Simulates one link on the default tap profile with correlation `rho`.
/// `fixed_pattern` 1..=4 pins the pattern; 0 selects adaptive mode with
/// `boundary_set` (1..=5, or 0 for the polynomial boundaries).
#[no_mangle]
pub unsafe extern "C" fn ap_run_link(
    config: *const ApLinkConfig,
    rho: f64,
    fixed_pattern: u32,
    boundary_set: u32,
    num_symbols: usize,
    seed: u64,
    out_metrics: *mut ApRunMetrics,
) -> ApStatus {
    guard(|| {
        let cfg = config.as_ref().ok_or_else(|| null("config"))?;
        let slot = out(out_metrics, "out_metrics")?;
        let link = LinkConfig::try_from(cfg)?;
        let profile = ChannelProfile::default().with_rho(rho);
        let mode = match fixed_pattern {
            0 => LinkMode::Adaptive(boundaries(boundary_set)?),
            p => LinkMode::FixedPattern(p as usize),
        };
        let m = run_link(&link, &profile, mode, num_symbols, seed)?;
        *slot = ApRunMetrics {
            total_bits: m.total_bits,
            bit_errors: m.bit_errors,
            ber: m.ber,
            data_rate_fraction: m.data_rate_fraction,
            resets: m.resets,
            pattern_occupancy: m.pattern_occupancy(),
            seed: m.seed,
        };
        Ok(())
    })
}
