//! Symbol-by-symbol link simulation.

use std::collections::VecDeque;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{apply_channel, init_channel_with, step_channel, ChannelProfile, ChannelState};
use crate::controller::{
    BerWindow, BoundarySet, Controller, ControllerParams, DataDecision, Feedback, PatternSpec,
    NUM_PATTERNS,
};
use crate::error::{Error, Result};
use crate::estimation::{check_layout_admissible, ls_estimate, Admissibility, ChannelEstimate};
use crate::grid::{CellRole, LinkConfig, OfdmGrid, PilotArrangement, PilotLayout};
use crate::phy::{equalize_and_demap, OfdmModem, TimeDomainSignal};

/// How the transmitter schedules pilots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkMode {
    /// Always pattern `1..=4`.
    FixedPattern(usize),
    Adaptive(BoundarySet),
}

impl LinkMode {
    pub fn label(&self) -> String {
        match self {
            LinkMode::FixedPattern(p) => format!("fixed-p{p}"),
            LinkMode::Adaptive(_) => "adaptive".to_string(),
        }
    }
}

/// Aggregate outcome of one simulated link.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub snr_db: f64,
    pub total_bits: u64,
    pub bit_errors: u64,
    /// `bit_errors / total_bits`, zero when no data was sent.
    pub ber: f64,
    pub data_rate_fraction: f64,
    pub data_symbols: u64,
    pub pilot_symbols: u64,
    /// Sounding counts per pattern (the pattern in force right after each sounding).
    pub pattern_soundings: [u64; NUM_PATTERNS],
    pub resets: u64,
    pub erasures: u64,
    /// Largest sliding-window BER seen once the window first filled.
    pub max_windowed_ber: Option<f64>,
    pub seed: u64,
}

impl RunMetrics {
    pub fn soundings(&self) -> u64 {
        self.pattern_soundings.iter().sum()
    }

    /// Fraction of soundings per pattern; all zero if nothing was sounded.
    pub fn pattern_occupancy(&self) -> [f64; NUM_PATTERNS] {
        let total = self.soundings();
        let mut occ = [0.0; NUM_PATTERNS];
        if total > 0 {
            for (o, &c) in occ.iter_mut().zip(&self.pattern_soundings) {
                *o = c as f64 / total as f64;
            }
        }
        occ
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Sound,
    Data,
    Reset,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Sound => "SOUND",
            TraceKind::Data => "DATA",
            TraceKind::Reset => "RESET",
        }
    }
}

/// One row of the controller decision trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub t: usize,
    pub kind: TraceKind,
    pub correlation: Option<f64>,
    /// One-based pattern number in force after the event.
    pub pattern: usize,
    pub period: usize,
    pub windowed_ber: Option<f64>,
    pub ber_error: Option<f64>,
}

/// Writes the trace as `t,event,R,pattern,period,windowed_BER,e`.
pub fn write_trace_csv<W: Write>(events: &[TraceEvent], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::io("<trace>", std::io::Error::other(e));
    w.write_record(["t", "event", "R", "pattern", "period", "windowed_BER", "e"])
        .map_err(err)?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for ev in events {
        w.write_record([
            ev.t.to_string(),
            ev.kind.as_str().to_string(),
            opt(ev.correlation),
            ev.pattern.to_string(),
            ev.period.to_string(),
            opt(ev.windowed_ber),
            opt(ev.ber_error),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io("<trace>", e))
}

/// Independent random streams of one link realization.
///
/// Channel and noise draws do not depend on the pilot schedule, so runs that
/// share a seed see the same channel and noise sequence whatever the mode.
struct Streams {
    channel: ChaCha8Rng,
    noise: ChaCha8Rng,
    data: ChaCha8Rng,
    erasure: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        Streams {
            channel: stream(1),
            noise: stream(2),
            data: stream(3),
            erasure: stream(4),
        }
    }
}

/// Derives the seed of job `index` from a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index.wrapping_add(0x10_0000));
    rng.next_u64()
}

enum Scheduler {
    Fixed { pattern: PatternSpec, until: usize },
    Adaptive(Controller),
}

/// Per-symbol summary returned by [`LinkSimulator::step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolReport {
    pub t: usize,
    pub sounding: bool,
    pub bit_errors: u64,
    pub bits: u64,
    pub reset: bool,
    pub pattern: PatternSpec,
}

/// A single link, advanced one OFDM symbol at a time.
pub struct LinkSimulator {
    config: LinkConfig,
    profile: ChannelProfile,
    arrangement: PilotArrangement,
    modem: OfdmModem,
    pilots: Vec<Complex64>,
    streams: Streams,
    channel: ChannelState,
    scheduler: Scheduler,
    estimate: Option<ChannelEstimate>,
    pending: VecDeque<(usize, Feedback)>,
    metric_window: BerWindow,
    t: usize,
    metrics: RunMetrics,
    trace: Option<Vec<TraceEvent>>,
    bits_buf: Vec<u8>,
}

impl std::fmt::Debug for LinkSimulator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinkSimulator")
            .field("t", &self.t)
            .field("rho", &self.profile.rho)
            .field("pattern", &self.pattern())
            .finish_non_exhaustive()
    }
}

impl LinkSimulator {
    pub fn new(config: &LinkConfig, profile: &ChannelProfile, mode: LinkMode, seed: u64) -> Result<Self> {
        config.validate()?;
        profile.validate()?;
        profile.check_cyclic_prefix(config.cp_length)?;
        let n = config.num_subcarriers;

        let arrangement = if config.pilot_subcarrier_spacing == 1 {
            if config.pilots_per_sounding != n {
                return Err(Error::config(format!(
                    "block-type soundings carry one full symbol: pilots_per_sounding must be {n}, got {}",
                    config.pilots_per_sounding
                )));
            }
            PilotArrangement::BlockType
        } else {
            let comb = PilotLayout::comb(config.pilot_subcarrier_spacing);
            comb.validate(n)?;
            if let Admissibility::Violation(v) = check_layout_admissible(&comb, profile, config)? {
                log_warning(&v.message);
            }
            PilotArrangement::CombType
        };

        let scheduler = match mode {
            LinkMode::FixedPattern(p) => {
                if !(1..=NUM_PATTERNS).contains(&p) {
                    return Err(Error::config(format!("fixed pattern must be 1..=4, got {p}")));
                }
                if arrangement == PilotArrangement::CombType && p != 1 {
                    return Err(Error::config("comb-type pilots are sent in every symbol; use pattern 1"));
                }
                Scheduler::Fixed {
                    pattern: PatternSpec::new(p - 1, config.base_pilot_period, config.pilots_per_sounding)?,
                    until: 0,
                }
            }
            LinkMode::Adaptive(boundaries) => {
                if arrangement == PilotArrangement::CombType {
                    return Err(Error::config("adaptive mode needs block-type pilots"));
                }
                Scheduler::Adaptive(Controller::new(ControllerParams::from_config(config, boundaries))?)
            }
        };

        let mut streams = Streams::new(seed);
        let channel = init_channel_with(profile, &mut streams.channel);
        Ok(LinkSimulator {
            config: config.clone(),
            profile: profile.clone(),
            arrangement,
            modem: OfdmModem::from_config(config),
            pilots: config.pilot_sequence(),
            streams,
            channel,
            scheduler,
            estimate: None,
            pending: VecDeque::new(),
            metric_window: BerWindow::new(config.ber_window),
            t: 0,
            metrics: RunMetrics {
                snr_db: config.snr_db,
                total_bits: 0,
                bit_errors: 0,
                ber: 0.0,
                data_rate_fraction: 0.0,
                data_symbols: 0,
                pilot_symbols: 0,
                pattern_soundings: [0; NUM_PATTERNS],
                resets: 0,
                erasures: 0,
                max_windowed_ber: None,
                seed,
            },
            trace: None,
            bits_buf: Vec::new(),
        })
    }

    /// Records controller events from now on.
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> &[TraceEvent] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        self.trace.take().unwrap_or_default()
    }

    /// Changes the channel's stationarity for subsequent symbols.
    pub fn set_rho(&mut self, rho: f64) -> Result<()> {
        let profile = self.profile.clone().with_rho(rho);
        profile.validate()?;
        self.profile = profile;
        Ok(())
    }

    pub fn symbol_index(&self) -> usize {
        self.t
    }

    pub fn channel(&self) -> &ChannelState {
        &self.channel
    }

    pub fn estimate(&self) -> Option<&ChannelEstimate> {
        self.estimate.as_ref()
    }

    pub fn pattern(&self) -> PatternSpec {
        match &self.scheduler {
            Scheduler::Fixed { pattern, .. } => *pattern,
            Scheduler::Adaptive(c) => c.pattern(),
        }
    }

    pub fn controller(&self) -> Option<&Controller> {
        match &self.scheduler {
            Scheduler::Adaptive(c) => Some(c),
            Scheduler::Fixed { .. } => None,
        }
    }

    fn sounding_due(&self) -> bool {
        match &self.scheduler {
            Scheduler::Fixed { until, .. } => *until == 0,
            Scheduler::Adaptive(c) => c.sounding_due(),
        }
    }

    fn record(&mut self, ev: TraceEvent) {
        if let Some(tr) = self.trace.as_mut() {
            tr.push(ev);
        }
    }

    /// Sends one OFDM symbol over the channel and processes it at the receiver.
    pub fn step(&mut self) -> Result<SymbolReport> {
        let t = self.t;
        let n = self.config.num_subcarriers;
        let bps = self.config.bits_per_symbol();
        let delay = self.config.feedback_delay;

        if t > 0 {
            self.channel = step_channel(&self.channel, &self.profile, &mut self.streams.channel);
        }
        if delay > 0 {
            self.deliver_feedback(t);
        }

        let comb = self.arrangement == PilotArrangement::CombType;
        let sounding = comb || self.sounding_due();

        // Data bits are drawn for every symbol so the stream stays aligned across modes.
        self.bits_buf.clear();
        let rng = &mut self.streams.data;
        self.bits_buf.extend((0..n * bps).map(|_| rng.random_range(0..2u8)));

        let mut roles = vec![CellRole::Data; n];
        let mut row = Vec::with_capacity(n);
        for k in 0..n {
            let is_pilot = sounding && k % self.config.pilot_subcarrier_spacing == 0;
            if is_pilot {
                roles[k] = CellRole::Pilot;
                row.push(self.pilots[k]);
            } else {
                row.push(self.config.modulation.map(&self.bits_buf[k * bps..(k + 1) * bps]));
            }
        }

        let mut tx = Vec::with_capacity(self.modem.samples_per_symbol());
        self.modem.modulate_symbol(&row, &mut tx);
        let tx = TimeDomainSignal::new(tx, self.modem.samples_per_symbol())?;
        let rx = apply_channel(
            &tx,
            std::slice::from_ref(&self.channel),
            &self.profile,
            self.config.snr_db,
            &mut self.streams.noise,
        )?;
        let received = self.modem.demodulate(&rx)?;

        let mut report = SymbolReport {
            t,
            sounding,
            bit_errors: 0,
            bits: 0,
            reset: false,
            pattern: self.pattern(),
        };

        if sounding {
            let pilot_idx: Vec<usize> = (0..n).step_by(self.config.pilot_subcarrier_spacing).collect();
            let obs: Vec<Complex64> = pilot_idx.iter().map(|&k| received.get(0, k)).collect();
            let known: Vec<Complex64> = pilot_idx.iter().map(|&k| self.pilots[k]).collect();
            self.estimate = Some(ls_estimate(&obs, &known, &pilot_idx, n, t)?);
            self.metrics.pilot_symbols += 1;
            self.on_sounding(t, &obs)?;
        } else if let Some(est) = self.estimate.as_mut() {
            est.tick();
        }

        let has_data = roles.contains(&CellRole::Data);
        if has_data {
            let est = self
                .estimate
                .as_ref()
                .ok_or_else(|| Error::config("data symbol before the first sounding"))?;
            let grid_roles = roles.clone();
            let eq = equalize_and_demap(&received, est, &grid_roles, &self.config, &mut self.streams.erasure)?;
            let sent: Vec<u8> = (0..n)
                .filter(|&k| roles[k] == CellRole::Data)
                .flat_map(|k| self.bits_buf[k * bps..(k + 1) * bps].iter().copied())
                .collect();
            let errors = sent.iter().zip(&eq.bits).filter(|(a, b)| a != b).count() as u64;
            let bits = sent.len() as u64;
            self.metrics.bit_errors += errors;
            self.metrics.total_bits += bits;
            self.metrics.erasures += eq.erasures as u64;
            if !sounding {
                self.metrics.data_symbols += 1;
            }
            self.metric_window.push(errors, bits);
            if self.metric_window.is_full() {
                let w = self.metric_window.ber().unwrap_or(0.0);
                let m = self.metrics.max_windowed_ber.get_or_insert(w);
                *m = m.max(w);
            }
            report.bit_errors = errors;
            report.bits = bits;
            report.reset = self.on_data(t, errors, bits);
        }

        if let Scheduler::Fixed { pattern, until } = &mut self.scheduler {
            *until = if sounding { pattern.period - 1 } else { until.saturating_sub(1) };
        }
        if sounding {
            self.metrics.pattern_soundings[self.pattern().index] += 1;
        }
        report.pattern = self.pattern();
        self.t += 1;
        Ok(report)
    }

    fn on_sounding(&mut self, t: usize, obs: &[Complex64]) -> Result<()> {
        let delay = self.config.feedback_delay;
        let Scheduler::Adaptive(ctl) = &mut self.scheduler else {
            let p = self.pattern();
            self.record(TraceEvent {
                t,
                kind: TraceKind::Sound,
                correlation: None,
                pattern: p.number(),
                period: p.period,
                windowed_ber: None,
                ber_error: None,
            });
            return Ok(());
        };
        let correlation = if delay == 0 {
            ctl.on_sounding(obs)?.correlation
        } else {
            let fb = ctl.measure_sounding(obs)?;
            ctl.advance(true);
            match fb {
                Some(f @ Feedback::Correlation(r)) => {
                    self.pending.push_back((t + 1 + delay, f));
                    Some(r)
                }
                _ => None,
            }
        };
        let p = self.pattern();
        self.record(TraceEvent {
            t,
            kind: TraceKind::Sound,
            correlation,
            pattern: p.number(),
            period: p.period,
            windowed_ber: None,
            ber_error: None,
        });
        Ok(())
    }

    /// Returns whether the controller reset.
    fn on_data(&mut self, t: usize, errors: u64, bits: u64) -> bool {
        let delay = self.config.feedback_delay;
        let Scheduler::Adaptive(ctl) = &mut self.scheduler else {
            return false;
        };
        let (decision, evaluated) = if delay == 0 {
            let out = ctl.on_data_symbol(errors, bits);
            (out.decision, out.evaluated)
        } else {
            let m = ctl.measure_data(errors, bits);
            ctl.advance(false);
            match m {
                Some((fb @ Feedback::BerError(e), pe)) => {
                    self.pending.push_back((t + 1 + delay, fb));
                    (DataDecision::Continue, Some((pe, e)))
                }
                _ => (DataDecision::Continue, None),
            }
        };
        let reset = decision == DataDecision::ResetToPattern1;
        if reset {
            self.metrics.resets += 1;
        }
        if self.trace.is_some() {
            let p = self.pattern();
            self.record(TraceEvent {
                t,
                kind: if reset { TraceKind::Reset } else { TraceKind::Data },
                correlation: None,
                pattern: p.number(),
                period: p.period,
                windowed_ber: evaluated.map(|(pe, _)| pe),
                ber_error: evaluated.map(|(_, e)| e),
            });
        }
        reset
    }

    fn deliver_feedback(&mut self, t: usize) {
        while let Some(&(at, fb)) = self.pending.front() {
            if at > t {
                break;
            }
            self.pending.pop_front();
            let Scheduler::Adaptive(ctl) = &mut self.scheduler else {
                continue;
            };
            if ctl.apply(fb) == DataDecision::ResetToPattern1 {
                self.metrics.resets += 1;
                let p = ctl.pattern();
                self.record(TraceEvent {
                    t,
                    kind: TraceKind::Reset,
                    correlation: None,
                    pattern: p.number(),
                    period: p.period,
                    windowed_ber: None,
                    ber_error: match fb {
                        Feedback::BerError(e) => Some(e),
                        Feedback::Correlation(_) => None,
                    },
                });
            }
        }
    }

    /// Metrics accumulated so far.
    pub fn metrics(&self) -> RunMetrics {
        let mut m = self.metrics.clone();
        m.ber = if m.total_bits > 0 {
            m.bit_errors as f64 / m.total_bits as f64
        } else {
            0.0
        };
        let n = self.config.num_subcarriers as u64;
        let (data_cells, pilot_cells) = match self.arrangement {
            PilotArrangement::BlockType => (m.data_symbols * n, m.pilot_symbols * n),
            PilotArrangement::CombType => {
                let per = n.div_ceil(self.config.pilot_subcarrier_spacing as u64);
                (self.t as u64 * (n - per), self.t as u64 * per)
            }
        };
        m.data_rate_fraction = if data_cells + pilot_cells > 0 {
            data_cells as f64 / (data_cells + pilot_cells) as f64
        } else {
            0.0
        };
        m
    }
}

fn log_warning(msg: &str) {
    eprintln!("warning: {msg}");
}

/// Simulates `num_symbols` OFDM symbols of one link.
pub fn run_link(
    config: &LinkConfig,
    profile: &ChannelProfile,
    mode: LinkMode,
    num_symbols: usize,
    seed: u64,
) -> Result<RunMetrics> {
    let mut sim = LinkSimulator::new(config, profile, mode, seed)?;
    for _ in 0..num_symbols {
        sim.step()?;
    }
    Ok(sim.metrics())
}

/// As [`run_link`], also returning the controller decision trace.
pub fn run_link_traced(
    config: &LinkConfig,
    profile: &ChannelProfile,
    mode: LinkMode,
    num_symbols: usize,
    seed: u64,
) -> Result<(RunMetrics, Vec<TraceEvent>)> {
    let mut sim = LinkSimulator::new(config, profile, mode, seed)?;
    sim.enable_trace();
    for _ in 0..num_symbols {
        sim.step()?;
    }
    let metrics = sim.metrics();
    Ok((metrics, sim.take_trace()))
}

/// Builds the transmitted grid a fixed block-type schedule would produce;
/// used to cross-check the simulator's overhead accounting.
pub fn fixed_schedule_grid(config: &LinkConfig, period: usize, num_symbols: usize) -> Result<OfdmGrid> {
    let bits = vec![0u8; num_symbols * config.num_subcarriers * config.bits_per_symbol()];
    let (grid, _) = crate::grid::build_grid(config, &PilotLayout::block(period), num_symbols, &bits)?;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::data_rate_fraction;

    fn noiseless() -> LinkConfig {
        LinkConfig {
            snr_db: f64::INFINITY,
            ..LinkConfig::default()
        }
    }

    #[test]
    fn all_pilot_noiseless_static() {
        let m = run_link(&noiseless(), &ChannelProfile::default(), LinkMode::FixedPattern(1), 200, 7).unwrap();
        assert_eq!(m.ber, 0.0);
        assert_eq!(m.total_bits, 0);
        assert_eq!(m.data_rate_fraction, 0.0);
        assert_eq!(m.pattern_soundings, [200, 0, 0, 0]);
    }

    #[test]
    fn fixed_patterns_match_grid_overhead() {
        for p in 1..=4usize {
            let period = 1 << (p - 1);
            let m = run_link(&noiseless(), &ChannelProfile::default(), LinkMode::FixedPattern(p), 64, 1).unwrap();
            let g = fixed_schedule_grid(&noiseless(), period, 64).unwrap();
            assert!((m.data_rate_fraction - data_rate_fraction(&g)).abs() < 1e-15);
            assert_eq!(m.ber, 0.0, "static noiseless channel, pattern {p}");
        }
    }

    #[test]
    fn adaptive_static_noiseless_reaches_pattern_four() {
        let symbols = 8000;
        let m = run_link(
            &noiseless(),
            &ChannelProfile::default(),
            LinkMode::Adaptive(BoundarySet::default()),
            symbols,
            3,
        )
        .unwrap();
        assert_eq!(m.ber, 0.0);
        assert_eq!(m.resets, 0);
        // soundings at t = 0, then t = 1 + 8k
        let soundings = 2 + ((symbols - 2) / 8) as u64;
        assert_eq!(m.pilot_symbols, soundings);
        assert_eq!(m.pattern_soundings[3], soundings - 1);
        assert!((m.data_rate_fraction - (1.0 - 1.0 / 8.0)).abs() < 1e-3);
    }

    #[test]
    fn oracle_equalization_has_no_errors_on_selective_channel() {
        // every sounding is followed by data on an unchanged channel
        let m = run_link(&noiseless(), &ChannelProfile::default(), LinkMode::FixedPattern(4), 400, 11).unwrap();
        assert!(m.total_bits > 0);
        assert_eq!(m.bit_errors, 0);
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = LinkConfig {
            snr_db: 12.0,
            ..LinkConfig::default()
        };
        let p = ChannelProfile::model(2).unwrap();
        let mode = LinkMode::Adaptive(BoundarySet::default());
        let a = run_link(&cfg, &p, mode, 1500, 99).unwrap();
        let b = run_link(&cfg, &p, mode, 1500, 99).unwrap();
        assert_eq!(a, b);
        let c = run_link(&cfg, &p, mode, 1500, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn same_seed_same_channel_across_modes() {
        let cfg = LinkConfig {
            snr_db: 15.0,
            ..LinkConfig::default()
        };
        let p = ChannelProfile::model(3).unwrap();
        let mut a = LinkSimulator::new(&cfg, &p, LinkMode::FixedPattern(1), 5).unwrap();
        let mut b = LinkSimulator::new(&cfg, &p, LinkMode::Adaptive(BoundarySet::default()), 5).unwrap();
        for _ in 0..300 {
            a.step().unwrap();
            b.step().unwrap();
            assert_eq!(a.channel(), b.channel());
        }
    }

    #[test]
    fn estimate_age_tracks_hold() {
        let mut sim = LinkSimulator::new(&noiseless(), &ChannelProfile::default(), LinkMode::FixedPattern(3), 0).unwrap();
        for t in 0..12 {
            sim.step().unwrap();
            let est = sim.estimate().unwrap();
            assert_eq!(est.age, t % 4);
            assert_eq!(est.sounded_at, Some(t - t % 4));
        }
    }

    #[test]
    fn comb_layout_runs_and_rejects_adaptive() {
        let cfg = LinkConfig {
            pilot_subcarrier_spacing: 4,
            pilots_per_sounding: 16,
            snr_db: f64::INFINITY,
            ..LinkConfig::default()
        };
        let m = run_link(&cfg, &ChannelProfile::default(), LinkMode::FixedPattern(1), 50, 2).unwrap();
        assert!((m.data_rate_fraction - 0.75).abs() < 1e-12);
        assert!(run_link(&cfg, &ChannelProfile::default(), LinkMode::Adaptive(BoundarySet::default()), 5, 2).is_err());
    }

    #[test]
    fn rejects_profiles_longer_than_cp() {
        let p = ChannelProfile::exponential(&[0, 4, 8], 2.0, 1.0);
        assert!(run_link(&noiseless(), &p, LinkMode::FixedPattern(1), 5, 0).is_err());
    }

    #[test]
    fn feedback_delay_postpones_pattern_change() {
        let cfg = LinkConfig {
            feedback_delay: 3,
            ..noiseless()
        };
        let (m, trace) = run_link_traced(
            &cfg,
            &ChannelProfile::default(),
            LinkMode::Adaptive(BoundarySet::default()),
            400,
            4,
        )
        .unwrap();
        let sounds: Vec<usize> = trace.iter().filter(|e| e.kind == TraceKind::Sound).map(|e| e.t).collect();
        // R from the sounding at t=1 reaches the transmitter at t=5
        assert_eq!(&sounds[..6], &[0, 1, 2, 3, 4, 5]);
        assert_eq!(sounds[6], 13);
        assert_eq!(m.resets, 0);
    }

    #[test]
    fn trace_csv_header() {
        let (_, trace) = run_link_traced(
            &noiseless(),
            &ChannelProfile::default(),
            LinkMode::Adaptive(BoundarySet::default()),
            20,
            4,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,event,R,pattern,period,windowed_BER,e\n"));
        assert!(text.contains("1,SOUND,1,4,8,,"));
    }
}
