//! Pilot-based least-squares channel estimation.
//!
//! Gains at pilot subcarriers are `Y/X`; the remaining subcarriers are filled by
//! piecewise-linear interpolation (real and imaginary parts separately) with
//! nearest-pilot extension at the band edges. Between soundings the receiver
//! holds the last estimate and only its age advances.

use num_complex::Complex64;

use crate::channel::ChannelProfile;
use crate::error::{Error, Result};
use crate::grid::{LinkConfig, PilotLayout};

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    /// Estimated gain per subcarrier.
    pub gains: Vec<Complex64>,
    /// Symbol index of the sounding this estimate came from.
    pub sounded_at: Option<usize>,
    /// Symbols elapsed since that sounding.
    pub age: usize,
    /// Received pilot-subcarrier values of that sounding.
    pub source_pilot_obs: Vec<Complex64>,
}

impl ChannelEstimate {
    /// A constant estimate not tied to any sounding.
    pub fn flat(num_subcarriers: usize, gain: Complex64) -> Self {
        ChannelEstimate {
            gains: vec![gain; num_subcarriers],
            sounded_at: None,
            age: 0,
            source_pilot_obs: Vec::new(),
        }
    }

    /// Advances the hold by one symbol without new pilots.
    pub fn tick(&mut self) {
        self.age += 1;
    }
}

/// LS estimate from the pilots of the symbol at `symbol_index`.
pub fn ls_estimate(
    received_pilots: &[Complex64],
    known_pilots: &[Complex64],
    pilot_indices: &[usize],
    num_subcarriers: usize,
    symbol_index: usize,
) -> Result<ChannelEstimate> {
    if pilot_indices.is_empty() || received_pilots.is_empty() {
        return Err(Error::EmptyPilots);
    }
    for len in [received_pilots.len(), known_pilots.len()] {
        if len != pilot_indices.len() {
            return Err(Error::LengthMismatch {
                expected: pilot_indices.len(),
                actual: len,
            });
        }
    }
    if let Some(&k) = pilot_indices.iter().find(|&&k| k >= num_subcarriers) {
        return Err(Error::config(format!(
            "pilot index {k} outside {num_subcarriers} subcarriers"
        )));
    }
    let mut at_pilots = Vec::with_capacity(pilot_indices.len());
    for ((&y, &x), &k) in received_pilots.iter().zip(known_pilots).zip(pilot_indices) {
        if x.norm_sqr() == 0.0 {
            return Err(Error::ZeroPilotSymbol(k));
        }
        at_pilots.push(y / x);
    }
    let gains = if pilot_indices.len() == num_subcarriers {
        let mut g = vec![Complex64::new(0.0, 0.0); num_subcarriers];
        for (&k, &h) in pilot_indices.iter().zip(&at_pilots) {
            g[k] = h;
        }
        g
    } else {
        interpolate(&at_pilots, pilot_indices, num_subcarriers)
    };
    Ok(ChannelEstimate {
        gains,
        sounded_at: Some(symbol_index),
        age: 0,
        source_pilot_obs: received_pilots.to_vec(),
    })
}

/// Piecewise-linear interpolation of `pilot_gains` (at ascending
/// `pilot_indices`) onto `0..num_subcarriers`.
pub fn interpolate(
    pilot_gains: &[Complex64],
    pilot_indices: &[usize],
    num_subcarriers: usize,
) -> Vec<Complex64> {
    assert_eq!(pilot_gains.len(), pilot_indices.len());
    assert!(!pilot_indices.is_empty(), "interpolation needs at least one pilot");
    debug_assert!(pilot_indices.windows(2).all(|w| w[0] < w[1]));

    let first = pilot_indices[0];
    let last = *pilot_indices.last().unwrap();
    let mut out = Vec::with_capacity(num_subcarriers);
    let mut seg = 0;
    for k in 0..num_subcarriers {
        if k <= first {
            out.push(pilot_gains[0]);
        } else if k >= last {
            out.push(*pilot_gains.last().unwrap());
        } else {
            while pilot_indices[seg + 1] < k {
                seg += 1;
            }
            let (k0, k1) = (pilot_indices[seg], pilot_indices[seg + 1]);
            let w = (k - k0) as f64 / (k1 - k0) as f64;
            out.push(pilot_gains[seg] * (1.0 - w) + pilot_gains[seg + 1] * w);
        }
    }
    out
}

/// Largest admissible pilot spacing, in subcarriers, for a delay spread
/// `tau_max` sampled at period `symbol_time`: `N / (2 tau / T_s)`.
///
/// Returns infinity for a zero delay spread.
pub fn max_pilot_spacing(num_subcarriers: usize, tau_max: f64, symbol_time: f64) -> Result<f64> {
    if !(symbol_time > 0.0) {
        return Err(Error::NonPositiveSymbolTime(symbol_time));
    }
    if !(tau_max >= 0.0) {
        return Err(Error::config(format!("delay spread must be >= 0, got {tau_max}")));
    }
    if tau_max == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(num_subcarriers as f64 / (2.0 * tau_max / symbol_time))
}

/// Result of checking a layout's frequency spacing against the channel.
#[derive(Debug, Clone, PartialEq)]
pub enum Admissibility {
    Ok { bound: f64 },
    Violation(SpacingViolation),
}

impl Admissibility {
    pub fn is_ok(&self) -> bool {
        matches!(self, Admissibility::Ok { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingViolation {
    pub freq_spacing: usize,
    pub bound: f64,
    pub max_delay_samples: usize,
    pub message: String,
}

/// Compares the layout's pilot spacing with [`max_pilot_spacing`] for the
/// profile's largest tap delay. A violation is a warning, not an error.
pub fn check_layout_admissible(
    layout: &PilotLayout,
    profile: &ChannelProfile,
    config: &LinkConfig,
) -> Result<Admissibility> {
    let d = profile.max_delay();
    let tau = d as f64 * config.symbol_time;
    let bound = max_pilot_spacing(config.num_subcarriers, tau, config.symbol_time)?;
    if (layout.freq_spacing as f64) <= bound {
        return Ok(Admissibility::Ok { bound });
    }
    Ok(Admissibility::Violation(SpacingViolation {
        freq_spacing: layout.freq_spacing,
        bound,
        max_delay_samples: d,
        message: format!(
            "pilot spacing {} exceeds the sampling bound {bound:.3} subcarrier slots \
             (N = {}, max tap delay {d} samples; spacing read as a count of subcarrier slots)",
            layout.freq_spacing, config.num_subcarriers
        ),
    }))
}
