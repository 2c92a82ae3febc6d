//! Frequency-selective, time-varying Rayleigh channel.
//!
//! A tapped delay line whose complex gains follow a first-order Gauss-Markov
//! process across OFDM symbols, `h' = sqrt(rho) h + sqrt(1 - rho) w`, with `w`
//! drawn from the tap's own stationary distribution. The gains are held
//! constant within a symbol. Additive white Gaussian noise is set from the
//! SNR per subcarrier assuming unit average received energy.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phy::TimeDomainSignal;

/// Stationarity (tap-gain correlation per OFDM symbol) of the five channel models.
pub const MODEL_RHO: [f64; 5] = [1.0, 0.8, 0.6, 0.4, 0.2];

/// Delays of the default power-delay profile, in samples.
pub const DEFAULT_TAP_DELAYS: [usize; 4] = [0, 1, 3, 5];

/// Decay constant (samples) of the default exponential power-delay profile.
pub const DEFAULT_DECAY_SAMPLES: f64 = 2.0;

/// How per-symbol channel variation is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StationarityMode {
    #[default]
    GaussMarkov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelProfile {
    pub tap_delays: Vec<usize>,
    /// Linear mean powers, summing to one.
    pub tap_powers: Vec<f64>,
    /// Tap-gain correlation between consecutive OFDM symbols.
    pub rho: f64,
}

impl Default for ChannelProfile {
    fn default() -> Self {
        Self::exponential(&DEFAULT_TAP_DELAYS, DEFAULT_DECAY_SAMPLES, 1.0)
    }
}

impl ChannelProfile {
    /// Exponentially decaying profile `p_m ∝ exp(-d_m / decay)`, normalized.
    pub fn exponential(delays: &[usize], decay: f64, rho: f64) -> Self {
        let raw: Vec<f64> = delays.iter().map(|&d| (-(d as f64) / decay).exp()).collect();
        let total: f64 = raw.iter().sum();
        ChannelProfile {
            tap_delays: delays.to_vec(),
            tap_powers: raw.iter().map(|p| p / total).collect(),
            rho,
        }
    }

    pub fn single_tap(rho: f64) -> Self {
        ChannelProfile {
            tap_delays: vec![0],
            tap_powers: vec![1.0],
            rho,
        }
    }

    /// Default profile with the stationarity of channel model `model` (1..=5).
    pub fn model(model: usize) -> Result<Self> {
        let rho = *model
            .checked_sub(1)
            .and_then(|i| MODEL_RHO.get(i))
            .ok_or_else(|| Error::config(format!("channel model must be 1..=5, got {model}")))?;
        Ok(ChannelProfile {
            rho,
            ..Self::default()
        })
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn num_taps(&self) -> usize {
        self.tap_delays.len()
    }

    pub fn max_delay(&self) -> usize {
        self.tap_delays.iter().copied().max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tap_delays.is_empty() {
            return Err(Error::config("channel profile has no taps"));
        }
        if self.tap_delays.len() != self.tap_powers.len() {
            return Err(Error::config(format!(
                "{} tap delays but {} tap powers",
                self.tap_delays.len(),
                self.tap_powers.len()
            )));
        }
        if self.tap_delays[0] != 0 {
            return Err(Error::config("first tap delay must be 0"));
        }
        if self.tap_powers.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::config("tap powers must be finite and non-negative"));
        }
        let total: f64 = self.tap_powers.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!("tap powers sum to {total}, expected 1")));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::config(format!("rho must lie in [0, 1], got {}", self.rho)));
        }
        Ok(())
    }

    /// Rejects profiles whose delay spread is not covered by the cyclic prefix.
    pub fn check_cyclic_prefix(&self, cp_length: usize) -> Result<()> {
        if self.max_delay() >= cp_length {
            return Err(Error::config(format!(
                "maximum tap delay {} must be below the cyclic prefix length {cp_length}",
                self.max_delay()
            )));
        }
        Ok(())
    }
}

/// Tap gains of the channel during one OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub tap_gains: Vec<Complex64>,
    pub symbol_index: usize,
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// Draws each tap from CN(0, power).
pub fn init_channel_with<R: Rng + ?Sized>(profile: &ChannelProfile, rng: &mut R) -> ChannelState {
    ChannelState {
        tap_gains: profile
            .tap_powers
            .iter()
            .map(|&p| complex_gaussian(rng, p))
            .collect(),
        symbol_index: 0,
    }
}

pub fn init_channel(profile: &ChannelProfile, seed: u64) -> ChannelState {
    init_channel_with(profile, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Advances the channel by one OFDM symbol.
pub fn step_channel<R: Rng + ?Sized>(
    state: &ChannelState,
    profile: &ChannelProfile,
    rng: &mut R,
) -> ChannelState {
    let keep = profile.rho.sqrt();
    let fresh = (1.0 - profile.rho).max(0.0).sqrt();
    let tap_gains = state
        .tap_gains
        .iter()
        .zip(&profile.tap_powers)
        .map(|(&h, &p)| {
            if fresh == 0.0 {
                h
            } else {
                h * keep + complex_gaussian(rng, p) * fresh
            }
        })
        .collect();
    ChannelState {
        tap_gains,
        symbol_index: state.symbol_index + 1,
    }
}

/// `H(k) = sum_m h_m exp(-j 2 pi k d_m / N)`.
pub fn true_frequency_response(
    state: &ChannelState,
    profile: &ChannelProfile,
    num_subcarriers: usize,
) -> Vec<Complex64> {
    let n = num_subcarriers as f64;
    (0..num_subcarriers)
        .map(|k| {
            state
                .tap_gains
                .iter()
                .zip(&profile.tap_delays)
                .map(|(&h, &d)| {
                    // reduce k*d mod N first so the phase argument stays small
                    let phase = ((k * d) % num_subcarriers) as f64 / n;
                    h * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * phase)
                })
                .sum()
        })
        .collect()
}

/// Per-sample noise variance for `snr_db` (zero for an infinite SNR).
pub fn noise_variance(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 10.0)
    }
}

pub fn add_awgn<R: Rng + ?Sized>(samples: &mut [Complex64], snr_db: f64, rng: &mut R) {
    let var = noise_variance(snr_db);
    if var == 0.0 {
        return;
    }
    for x in samples {
        *x += complex_gaussian(rng, var);
    }
}

/// Passes `signal` through the tapped delay line, one channel state per OFDM
/// symbol, then adds AWGN.
///
/// Output sample `i` of symbol `t` is `sum_m h_m(t) x[i - d_m]`; samples before
/// the start of the signal are zero.
pub fn apply_channel<R: Rng + ?Sized>(
    signal: &TimeDomainSignal,
    states: &[ChannelState],
    profile: &ChannelProfile,
    snr_db: f64,
    rng: &mut R,
) -> Result<TimeDomainSignal> {
    if states.len() != signal.num_symbols() {
        return Err(Error::LengthMismatch {
            expected: signal.num_symbols(),
            actual: states.len(),
        });
    }
    let sps = signal.samples_per_symbol();
    let x = signal.samples();
    let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
    for (i, out) in y.iter_mut().enumerate() {
        let state = &states[i / sps];
        for (&h, &d) in state.tap_gains.iter().zip(&profile.tap_delays) {
            if d <= i {
                *out += h * x[i - d];
            }
        }
    }
    add_awgn(&mut y, snr_db, rng);
    TimeDomainSignal::new(y, sps)
}
