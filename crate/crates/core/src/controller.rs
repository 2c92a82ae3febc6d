//! Adaptive pilot-pattern controller.
//!
//! Pattern `i` (0..=3) sends a sounding every `2^i * n` OFDM symbols. At each
//! sounding the normalized cross-correlation `R` between the received pilot
//! vectors of the current and previous soundings picks the pattern whose
//! interval `[LB_i, HB_i)` contains `R`. During data symbols a sliding window
//! tracks the bit error ratio `P_e`; once `e = P_e - P_e,th` turns positive
//! the controller falls back to pattern 0 and restarts the sounding sequence.
//!
//! The receiver side ([`Controller::measure_sounding`],
//! [`Controller::measure_data`]) reduces its observations to a single scalar
//! [`Feedback`]; the transmitter side ([`Controller::apply`]) acts on it. The
//! combined [`Controller::on_sounding`] / [`Controller::on_data_symbol`] calls
//! model a feedback channel without latency.

use std::collections::VecDeque;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const NUM_PATTERNS: usize = 4;

/// `|sum p1 conj(p2)| / sqrt(E1 E2)`, clamped to `[0, 1]`.
pub fn cross_correlation(p1: &[Complex64], p2: &[Complex64]) -> Result<f64> {
    if p1.len() != p2.len() {
        return Err(Error::LengthMismatch {
            expected: p1.len(),
            actual: p2.len(),
        });
    }
    if p1.is_empty() {
        return Err(Error::ZeroEnergy);
    }
    let e1: f64 = p1.iter().map(|x| x.norm_sqr()).sum();
    let e2: f64 = p2.iter().map(|x| x.norm_sqr()).sum();
    if !(e1 > 0.0 && e2 > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    let inner: Complex64 = p1.iter().zip(p2).map(|(a, b)| a * b.conj()).sum();
    Ok((inner.norm() / (e1 * e2).sqrt()).clamp(0.0, 1.0))
}

fn check_index(i: usize) -> Result<f64> {
    if i >= NUM_PATTERNS {
        return Err(Error::IndexOutOfRange(i));
    }
    Ok(i as f64)
}

/// Lower correlation boundary of pattern `i`: `0.1 i^3 - 0.6 i^2 + 1.2 i`.
pub fn lower_boundary(i: usize) -> Result<f64> {
    let x = check_index(i)?;
    Ok(snap(0.1 * x.powi(3) - 0.6 * x.powi(2) + 1.2 * x))
}

/// Upper correlation boundary of pattern `i`: `0.1 i + 0.7`.
pub fn higher_boundary(i: usize) -> Result<f64> {
    let x = check_index(i)?;
    Ok(snap(0.1 * x + 0.7))
}

// Rounds away binary representation noise so that e.g. 0.9 lands on the boundary.
fn snap(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

/// Correlation intervals `[lower_i, upper_i)` for the four patterns; the last
/// interval is closed at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySet {
    pub lower: [f64; NUM_PATTERNS],
    pub upper: [f64; NUM_PATTERNS],
}

impl Default for BoundarySet {
    fn default() -> Self {
        Self::from_polynomials()
    }
}

impl BoundarySet {
    pub fn new(lower: [f64; NUM_PATTERNS], upper: [f64; NUM_PATTERNS]) -> Result<Self> {
        let set = BoundarySet { lower, upper };
        set.validate()?;
        Ok(set)
    }

    /// Boundaries generated by [`lower_boundary`] and [`higher_boundary`].
    pub fn from_polynomials() -> Self {
        let mut lower = [0.0; NUM_PATTERNS];
        let mut upper = [0.0; NUM_PATTERNS];
        for i in 0..NUM_PATTERNS {
            lower[i] = lower_boundary(i).expect("index in range");
            upper[i] = higher_boundary(i).expect("index in range");
        }
        BoundarySet { lower, upper }
    }

    /// The five tabulated boundary sets of the parametric study, `id` in 1..=5.
    ///
    /// Set 4 equals [`BoundarySet::from_polynomials`].
    pub fn table(id: usize) -> Result<Self> {
        let cuts: [f64; 3] = match id {
            1 => [0.25, 0.5, 0.75],
            2 => [0.5, 0.7, 0.9],
            3 => [0.6, 0.7, 0.9],
            4 => return Ok(Self::from_polynomials()),
            // tabulated as [0.95, 0.97[ then [0.975, 1]; pattern 3 is widened
            // to 0.975 so the intervals stay contiguous
            5 => [0.9, 0.95, 0.975],
            other => {
                return Err(Error::config(format!("boundary set must be 1..=5, got {other}")))
            }
        };
        Self::new(
            [0.0, cuts[0], cuts[1], cuts[2]],
            [cuts[0], cuts[1], cuts[2], 1.0],
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower[0] != 0.0 || self.upper[NUM_PATTERNS - 1] != 1.0 {
            return Err(Error::config("boundaries must start at 0 and end at 1"));
        }
        for i in 0..NUM_PATTERNS {
            if !(self.lower[i] < self.upper[i]) {
                return Err(Error::config(format!("empty interval for pattern {}", i + 1)));
            }
            if i + 1 < NUM_PATTERNS && (self.upper[i] - self.lower[i + 1]).abs() > 1e-12 {
                return Err(Error::config(format!(
                    "intervals of patterns {} and {} are not contiguous",
                    i + 1,
                    i + 2
                )));
            }
        }
        Ok(())
    }

    /// Index of the interval containing `r`; values at or above the last
    /// lower bound (including 1) map to pattern 3.
    pub fn pattern_index(&self, r: f64) -> usize {
        (1..NUM_PATTERNS).rev().find(|&i| r >= self.lower[i]).unwrap_or(0)
    }
}

/// Pilot schedule of one pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PatternSpec {
    /// 0..=3 (patterns 1 to 4).
    pub index: usize,
    /// OFDM symbols between soundings, `2^index * n`.
    pub period: usize,
    pub pilots_per_sounding: usize,
}

impl PatternSpec {
    pub fn new(index: usize, base_period: usize, pilots_per_sounding: usize) -> Result<Self> {
        check_index(index)?;
        Ok(PatternSpec {
            index,
            period: (1usize << index) * base_period,
            pilots_per_sounding,
        })
    }

    /// One-based pattern number.
    pub fn number(&self) -> usize {
        self.index + 1
    }
}

pub fn select_pattern(
    r: f64,
    boundaries: &BoundarySet,
    base_period: usize,
    pilots_per_sounding: usize,
) -> PatternSpec {
    let i = boundaries.pattern_index(r.clamp(0.0, 1.0));
    PatternSpec {
        index: i,
        period: (1usize << i) * base_period,
        pilots_per_sounding,
    }
}

/// `e = P_e - P_e,th`.
pub fn ber_error(measured: f64, threshold: f64) -> f64 {
    measured - threshold
}

/// Scalar message on the feedback channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Feedback {
    Correlation(f64),
    BerError(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataDecision {
    Continue,
    ResetToPattern1,
}

/// What a sounding did to the controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoundingOutcome {
    /// Absent for the first sounding after start or reset.
    pub correlation: Option<f64>,
    pub pattern: PatternSpec,
}

/// What a data symbol did to the controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataOutcome {
    pub decision: DataDecision,
    /// `(P_e, e)` when the window was full and evaluated.
    pub evaluated: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerParams {
    pub base_period: usize,
    pub pilots_per_sounding: usize,
    pub ber_threshold: f64,
    pub ber_window: usize,
    pub boundaries: BoundarySet,
}

impl ControllerParams {
    pub fn from_config(config: &crate::grid::LinkConfig, boundaries: BoundarySet) -> Self {
        ControllerParams {
            base_period: config.base_pilot_period,
            pilots_per_sounding: config.pilots_per_sounding,
            ber_threshold: config.ber_threshold,
            ber_window: config.ber_window,
            boundaries,
        }
    }
}

/// Sliding bit-error window over the most recent data symbols.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BerWindow {
    entries: VecDeque<(u64, u64)>,
    errors: u64,
    bits: u64,
    capacity: u64,
}

impl BerWindow {
    pub fn new(capacity_bits: usize) -> Self {
        BerWindow {
            capacity: capacity_bits as u64,
            ..Default::default()
        }
    }

    /// Adds one symbol's counts and drops the oldest symbols that are no
    /// longer needed to cover `capacity` bits.
    pub fn push(&mut self, errors: u64, bits: u64) {
        self.entries.push_back((errors, bits));
        self.errors += errors;
        self.bits += bits;
        while let Some(&(e, b)) = self.entries.front() {
            if self.bits - b >= self.capacity {
                self.entries.pop_front();
                self.errors -= e;
                self.bits -= b;
            } else {
                break;
            }
        }
    }

    pub fn is_full(&self) -> bool {
        self.bits >= self.capacity
    }

    pub fn ber(&self) -> Option<f64> {
        (self.bits > 0).then(|| self.errors as f64 / self.bits as f64)
    }

    pub fn errors(&self) -> u64 {
        self.errors
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn clear(&mut self) {
        self.entries.clear();
        self.errors = 0;
        self.bits = 0;
    }
}

/// Single-link controller state machine.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    params: ControllerParams,
    current: PatternSpec,
    prev_pilot_obs: Option<Vec<Complex64>>,
    window: BerWindow,
    until_next_sounding: usize,
}

impl Controller {
    pub fn new(params: ControllerParams) -> Result<Self> {
        params.boundaries.validate()?;
        if params.base_period == 0 {
            return Err(Error::config("base period must be >= 1"));
        }
        if !(params.ber_threshold > 0.0 && params.ber_threshold < 0.5) {
            return Err(Error::config("ber threshold must lie in (0, 0.5)"));
        }
        Ok(Controller {
            current: PatternSpec::new(0, params.base_period, params.pilots_per_sounding)?,
            params,
            prev_pilot_obs: None,
            window: BerWindow::new(params.ber_window),
            until_next_sounding: 0,
        })
    }

    pub fn params(&self) -> &ControllerParams {
        &self.params
    }

    pub fn pattern(&self) -> PatternSpec {
        self.current
    }

    pub fn symbols_until_next_sounding(&self) -> usize {
        self.until_next_sounding
    }

    pub fn has_previous_observation(&self) -> bool {
        self.prev_pilot_obs.is_some()
    }

    pub fn window(&self) -> &BerWindow {
        &self.window
    }

    /// Whether the next transmitted symbol is a sounding.
    pub fn sounding_due(&self) -> bool {
        self.until_next_sounding == 0
    }

    /// Consumes one symbol slot of the schedule. Call once per transmitted
    /// symbol, after the slot's feedback has been applied.
    pub fn advance(&mut self, was_sounding: bool) {
        if was_sounding {
            self.until_next_sounding = self.current.period - 1;
        } else {
            self.until_next_sounding = self.until_next_sounding.saturating_sub(1);
        }
    }

    /// Receiver side of a sounding: stores the observation and returns the
    /// correlation with the previous one, if any.
    pub fn measure_sounding(&mut self, obs: &[Complex64]) -> Result<Option<Feedback>> {
        let fb = match &self.prev_pilot_obs {
            Some(prev) => Some(Feedback::Correlation(cross_correlation(prev, obs)?)),
            None => None,
        };
        self.prev_pilot_obs = Some(obs.to_vec());
        Ok(fb)
    }

    /// Receiver side of a data symbol: updates the window and, once it holds
    /// enough bits, reports `e`. A positive `e` also clears the receiver's
    /// window and stored observation so the next sounding starts afresh.
    pub fn measure_data(&mut self, bit_errors: u64, bits: u64) -> Option<(Feedback, f64)> {
        debug_assert!(bits > 0 && bit_errors <= bits);
        self.window.push(bit_errors, bits);
        if !self.window.is_full() {
            return None;
        }
        let pe = self.window.ber().unwrap_or(0.0);
        let e = ber_error(pe, self.params.ber_threshold);
        if e > 0.0 {
            self.window.clear();
            self.prev_pilot_obs = None;
        }
        Some((Feedback::BerError(e), pe))
    }

    /// Transmitter side: acts on a feedback message.
    pub fn apply(&mut self, feedback: Feedback) -> DataDecision {
        match feedback {
            Feedback::Correlation(r) => {
                let p = &self.params;
                self.current = select_pattern(r, &p.boundaries, p.base_period, p.pilots_per_sounding);
                self.until_next_sounding = self.until_next_sounding.min(self.current.period - 1);
                DataDecision::Continue
            }
            Feedback::BerError(e) if e > 0.0 => {
                let p = &self.params;
                self.current = PatternSpec {
                    index: 0,
                    period: p.base_period,
                    pilots_per_sounding: p.pilots_per_sounding,
                };
                // soundings stay at least one base period apart
                self.until_next_sounding = self.until_next_sounding.min(p.base_period - 1);
                DataDecision::ResetToPattern1
            }
            Feedback::BerError(_) => DataDecision::Continue,
        }
    }

    /// Sounding with immediate feedback. The schedule restarts with the
    /// selected pattern's period.
    pub fn on_sounding(&mut self, obs: &[Complex64]) -> Result<SoundingOutcome> {
        let fb = self.measure_sounding(obs)?;
        let correlation = match fb {
            Some(f @ Feedback::Correlation(r)) => {
                self.apply(f);
                Some(r)
            }
            _ => None,
        };
        self.until_next_sounding = self.current.period - 1;
        Ok(SoundingOutcome {
            correlation,
            pattern: self.current,
        })
    }

    /// Data symbol with immediate feedback; consumes one slot of the schedule.
    pub fn on_data_symbol(&mut self, bit_errors: u64, bits: u64) -> DataOutcome {
        self.advance(false);
        match self.measure_data(bit_errors, bits) {
            Some((fb, pe)) => {
                let e = match fb {
                    Feedback::BerError(e) => e,
                    Feedback::Correlation(_) => unreachable!(),
                };
                DataOutcome {
                    decision: self.apply(fb),
                    evaluated: Some((pe, e)),
                }
            }
            None => DataOutcome {
                decision: DataDecision::Continue,
                evaluated: None,
            },
        }
    }
}
