//! Transmit and receive signal chain.
//!
//! Transmit: constellation mapping (in [`crate::grid::build_grid`]), unitary
//! inverse DFT per symbol and cyclic prefix. Receive: CP removal, unitary
//! forward DFT, zero-forcing equalization and hard-decision demapping.

pub mod constellation;

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::estimation::ChannelEstimate;
use crate::grid::{CellRole, LinkConfig, OfdmGrid};

/// Serial baseband samples, `num_subcarriers + cp_length` per OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDomainSignal {
    samples: Vec<Complex64>,
    samples_per_symbol: usize,
}

impl TimeDomainSignal {
    pub fn new(samples: Vec<Complex64>, samples_per_symbol: usize) -> Result<Self> {
        if samples_per_symbol == 0 || samples.len() % samples_per_symbol != 0 {
            return Err(Error::LengthMismatch {
                expected: samples_per_symbol.max(1) * (samples.len() / samples_per_symbol.max(1)),
                actual: samples.len(),
            });
        }
        Ok(TimeDomainSignal {
            samples,
            samples_per_symbol,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.samples_per_symbol
    }

    pub fn num_symbols(&self) -> usize {
        self.samples.len() / self.samples_per_symbol
    }

    pub fn symbol(&self, t: usize) -> &[Complex64] {
        let s = self.samples_per_symbol;
        &self.samples[t * s..(t + 1) * s]
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x.norm_sqr()).sum()
    }
}

/// Received subcarrier values, time-major, same shape as the transmitted grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcarrierMatrix {
    pub num_symbols: usize,
    pub num_subcarriers: usize,
    pub values: Vec<Complex64>,
}

impl SubcarrierMatrix {
    pub fn row(&self, t: usize) -> &[Complex64] {
        let n = self.num_subcarriers;
        &self.values[t * n..(t + 1) * n]
    }

    pub fn get(&self, t: usize, k: usize) -> Complex64 {
        self.values[t * self.num_subcarriers + k]
    }
}

/// Output of the receiver for the Data cells of a grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EqualizedSymbols {
    /// Post-equalization values of the Data cells in (t, k) order.
    pub values: Vec<Complex64>,
    /// Hard-decision bits in the same order.
    pub bits: Vec<u8>,
    /// Cells whose estimate fell below the singularity floor.
    pub erasures: usize,
}

/// Planned unitary DFT pair for one FFT size.
#[derive(Clone)]
pub struct OfdmModem {
    num_subcarriers: usize,
    cp_length: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for OfdmModem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OfdmModem")
            .field("num_subcarriers", &self.num_subcarriers)
            .field("cp_length", &self.cp_length)
            .finish()
    }
}

impl OfdmModem {
    pub fn new(num_subcarriers: usize, cp_length: usize) -> Self {
        let mut planner = FftPlanner::new();
        OfdmModem {
            num_subcarriers,
            cp_length,
            forward: planner.plan_fft_forward(num_subcarriers),
            inverse: planner.plan_fft_inverse(num_subcarriers),
            scale: 1.0 / (num_subcarriers as f64).sqrt(),
        }
    }

    pub fn from_config(config: &LinkConfig) -> Self {
        Self::new(config.num_subcarriers, config.cp_length)
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.num_subcarriers + self.cp_length
    }

    /// One OFDM symbol: IDFT of `subcarriers` with the cyclic prefix prepended.
    pub fn modulate_symbol(&self, subcarriers: &[Complex64], out: &mut Vec<Complex64>) {
        let n = self.num_subcarriers;
        assert_eq!(subcarriers.len(), n);
        let mut body: Vec<Complex64> = subcarriers.iter().map(|x| x * self.scale).collect();
        self.inverse.process(&mut body);
        out.extend_from_slice(&body[n - self.cp_length..]);
        out.extend_from_slice(&body);
    }

    /// Strips the CP from one symbol's samples and returns its subcarrier values.
    pub fn demodulate_symbol(&self, samples: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(samples.len(), self.samples_per_symbol());
        let mut body: Vec<Complex64> =
            samples[self.cp_length..].iter().map(|x| x * self.scale).collect();
        self.forward.process(&mut body);
        body
    }

    pub fn modulate(&self, grid: &OfdmGrid) -> TimeDomainSignal {
        let mut samples = Vec::with_capacity(grid.num_symbols() * self.samples_per_symbol());
        for t in 0..grid.num_symbols() {
            self.modulate_symbol(grid.row(t), &mut samples);
        }
        TimeDomainSignal {
            samples,
            samples_per_symbol: self.samples_per_symbol(),
        }
    }

    pub fn demodulate(&self, signal: &TimeDomainSignal) -> Result<SubcarrierMatrix> {
        let sps = self.samples_per_symbol();
        if signal.samples_per_symbol != sps || signal.samples.len() % sps != 0 {
            return Err(Error::LengthMismatch {
                expected: sps,
                actual: signal.samples_per_symbol,
            });
        }
        let num_symbols = signal.num_symbols();
        let mut values = Vec::with_capacity(num_symbols * self.num_subcarriers);
        for t in 0..num_symbols {
            values.extend(self.demodulate_symbol(signal.symbol(t)));
        }
        Ok(SubcarrierMatrix {
            num_symbols,
            num_subcarriers: self.num_subcarriers,
            values,
        })
    }
}

pub fn modulate(grid: &OfdmGrid, config: &LinkConfig) -> TimeDomainSignal {
    OfdmModem::from_config(config).modulate(grid)
}

pub fn demodulate(signal: &TimeDomainSignal, config: &LinkConfig) -> Result<SubcarrierMatrix> {
    OfdmModem::from_config(config).demodulate(signal)
}

/// Relative floor under which an estimated gain is treated as a deep fade.
pub const SINGULAR_FLOOR: f64 = 1e-6;

/// Zero-forcing equalization and hard demapping of every Data cell.
///
/// Cells whose estimated gain is below `SINGULAR_FLOOR * max|H|` get random
/// bits from `rng` and are counted as erasures.
pub fn equalize_and_demap<R: Rng + ?Sized>(
    received: &SubcarrierMatrix,
    estimate: &ChannelEstimate,
    roles: &[CellRole],
    config: &LinkConfig,
    rng: &mut R,
) -> Result<EqualizedSymbols> {
    let n = received.num_subcarriers;
    if estimate.gains.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: estimate.gains.len(),
        });
    }
    if roles.len() != received.values.len() {
        return Err(Error::LengthMismatch {
            expected: received.values.len(),
            actual: roles.len(),
        });
    }
    let peak = estimate.gains.iter().map(|h| h.norm()).fold(0.0, f64::max);
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::SingularEstimate);
    }
    let floor = SINGULAR_FLOOR * peak;
    let modulation = config.modulation;
    let bps = modulation.bits_per_symbol();

    let mut out = EqualizedSymbols::default();
    for (idx, (&y, &role)) in received.values.iter().zip(roles).enumerate() {
        if role != CellRole::Data {
            continue;
        }
        let h = estimate.gains[idx % n];
        if h.norm() < floor {
            out.erasures += 1;
            out.values.push(Complex64::new(0.0, 0.0));
            out.bits.extend((0..bps).map(|_| rng.random_range(0..2u8)));
            continue;
        }
        let x = y / h;
        out.values.push(x);
        modulation.demap_into(x, &mut out.bits);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::ChannelEstimate;
    use crate::grid::{build_grid, PilotLayout};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> LinkConfig {
        LinkConfig {
            num_subcarriers: 16,
            cp_length: 4,
            pilots_per_sounding: 16,
            ..LinkConfig::default()
        }
    }

    fn random_grid(rng: &mut ChaCha8Rng, symbols: usize, n: usize) -> OfdmGrid {
        let mut g = OfdmGrid::zeros(symbols, n);
        for t in 0..symbols {
            for k in 0..n {
                g.set(t, k, Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            }
        }
        g
    }

    #[test]
    fn dc_only_symbol_is_constant() {
        let c = cfg();
        let mut g = OfdmGrid::zeros(2, 16);
        g.set(0, 0, Complex64::new(1.0, 0.0));
        g.set(1, 0, Complex64::new(1.0, 0.0));
        let s = modulate(&g, &c);
        assert_eq!(s.samples().len(), 2 * 20);
        for x in s.samples() {
            assert!((x - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let c = cfg();
        let s = modulate(&OfdmGrid::zeros(3, 16), &c);
        assert!(s.samples().iter().all(|x| x.norm() == 0.0));
        let r = demodulate(&s, &c).unwrap();
        assert!(r.values.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn round_trip_and_parseval() {
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_grid(&mut rng, 5, 16);
        let s = modulate(&g, &c);
        let r = demodulate(&s, &c).unwrap();
        for (a, b) in g.symbols().iter().zip(&r.values) {
            assert!((a - b).norm() < 1e-12);
        }
        for t in 0..5 {
            let body: f64 = s.symbol(t)[4..].iter().map(|x| x.norm_sqr()).sum();
            let freq: f64 = g.row(t).iter().map(|x| x.norm_sqr()).sum();
            assert!((body - freq).abs() <= 1e-9 * freq);
        }
    }

    #[test]
    fn delay_inside_cp_is_a_phase_ramp() {
        let c = cfg();
        let n = 16;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random_grid(&mut rng, 1, n);
        let s = modulate(&g, &c);
        for d in 0..=4usize {
            // delay by d samples: the useful window now starts d samples into the CP
            let mut delayed = vec![Complex64::new(0.0, 0.0); d];
            delayed.extend_from_slice(&s.samples()[..20 - d]);
            let sig = TimeDomainSignal::new(delayed, 20).unwrap();
            let r = demodulate(&sig, &c).unwrap();
            for k in 0..n {
                let ramp = Complex64::from_polar(
                    1.0,
                    -2.0 * std::f64::consts::PI * (k * d) as f64 / n as f64,
                );
                assert!((r.get(0, k) - g.get(0, k) * ramp).norm() < 1e-12, "d={d} k={k}");
            }
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let c = cfg();
        let sig = TimeDomainSignal::new(vec![Complex64::new(0.0, 0.0); 24], 24).unwrap();
        assert!(matches!(demodulate(&sig, &c), Err(Error::LengthMismatch { .. })));
        assert!(TimeDomainSignal::new(vec![Complex64::new(0.0, 0.0); 21], 20).is_err());
    }

    fn data_grid(c: &LinkConfig, symbols: usize) -> (OfdmGrid, Vec<u8>) {
        let bits: Vec<u8> = (0..symbols * c.num_subcarriers * c.bits_per_symbol())
            .map(|i| ((i * 2654435761usize) >> 7 & 1) as u8)
            .collect();
        let layout = PilotLayout::block(symbols + 1);
        // symbol 0 is the pilot; add one so all requested symbols carry data
        let (g, _) = build_grid(c, &layout, symbols + 1, &bits).unwrap();
        let used = symbols * c.num_subcarriers * c.bits_per_symbol();
        (g, bits[..used].to_vec())
    }

    #[test]
    fn identity_estimate_recovers_bits() {
        for modulation in [constellation::Modulation::Qpsk, constellation::Modulation::Qam16] {
            let c = LinkConfig { modulation, ..cfg() };
            let (g, bits) = data_grid(&c, 3);
            let r = demodulate(&modulate(&g, &c), &c).unwrap();
            let est = ChannelEstimate::flat(16, Complex64::new(1.0, 0.0));
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let eq = equalize_and_demap(&r, &est, g.roles(), &c, &mut rng).unwrap();
            assert_eq!(eq.bits, bits);
            assert_eq!(eq.values.len(), g.count(CellRole::Data));
            assert_eq!(eq.erasures, 0);
        }
    }

    #[test]
    fn scaling_cancels() {
        let c = cfg();
        let (g, bits) = data_grid(&c, 2);
        let mut r = demodulate(&modulate(&g, &c), &c).unwrap();
        r.values.iter_mut().for_each(|v| *v *= 2.0);
        let est = ChannelEstimate::flat(16, Complex64::new(2.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let eq = equalize_and_demap(&r, &est, g.roles(), &c, &mut rng).unwrap();
        assert_eq!(eq.bits, bits);
    }

    #[test]
    fn deep_fade_cells_are_erasures() {
        let c = cfg();
        let (g, _) = data_grid(&c, 1);
        let r = demodulate(&modulate(&g, &c), &c).unwrap();
        let mut est = ChannelEstimate::flat(16, Complex64::new(1.0, 0.0));
        est.gains[3] = Complex64::new(1e-9, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let eq = equalize_and_demap(&r, &est, g.roles(), &c, &mut rng).unwrap();
        assert_eq!(eq.erasures, 1);
        assert!(eq.values.iter().all(|v| v.is_finite()));

        let zero = ChannelEstimate::flat(16, Complex64::new(0.0, 0.0));
        assert!(matches!(
            equalize_and_demap(&r, &zero, g.roles(), &c, &mut rng),
            Err(Error::SingularEstimate)
        ));
    }
}
