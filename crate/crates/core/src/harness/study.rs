//! Parametric SNR sweeps comparing pilot modes, boundary sets or channel models.

use rayon::prelude::*;

use super::link::{derive_seed, run_link, LinkMode, RunMetrics};
use super::results::{ResultRow, ResultTable};
use crate::channel::{ChannelProfile, StationarityMode, MODEL_RHO};
use crate::controller::{BoundarySet, NUM_PATTERNS};
use crate::error::{Error, Result};
use crate::grid::LinkConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    AdaptiveVsFixed,
    BoundarySweep,
    ModelSweep,
}

impl StudyKind {
    /// Value of the `study` column and stem of the output files.
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::AdaptiveVsFixed => "adaptive-vs-fixed",
            StudyKind::BoundarySweep => "boundaries",
            StudyKind::ModelSweep => "models",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySpec {
    /// Tabulated set `1..=5`.
    Table(usize),
    Explicit(BoundarySet),
}

impl BoundarySpec {
    pub fn resolve(&self) -> Result<BoundarySet> {
        match self {
            BoundarySpec::Table(id) => BoundarySet::table(*id),
            BoundarySpec::Explicit(b) => {
                b.validate()?;
                Ok(*b)
            }
        }
    }

    pub fn id(&self) -> Option<usize> {
        match self {
            BoundarySpec::Table(id) => Some(*id),
            BoundarySpec::Explicit(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    /// Model `1..=5` on the default tap profile.
    Model(usize),
    Explicit(ChannelProfile),
}

impl ChannelSpec {
    pub fn resolve(&self) -> Result<ChannelProfile> {
        match self {
            ChannelSpec::Model(m) => ChannelProfile::model(*m),
            ChannelSpec::Explicit(p) => {
                p.validate()?;
                Ok(p.clone())
            }
        }
    }

    pub fn id(&self) -> Option<usize> {
        match self {
            ChannelSpec::Model(m) => Some(*m),
            ChannelSpec::Explicit(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub kind: StudyKind,
    pub snr_grid: Vec<f64>,
    pub symbols_per_point: usize,
    pub trials: usize,
    pub boundaries: BoundarySpec,
    pub channel: ChannelSpec,
    pub stationarity: StationarityMode,
}

impl StudyConfig {
    pub fn new(kind: StudyKind) -> Self {
        StudyConfig {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self, link: &LinkConfig) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be >= 1"));
        }
        let min = 10 * 8 * link.base_pilot_period;
        if self.symbols_per_point < min {
            return Err(Error::config(format!(
                "symbols_per_point must be >= {min} so the longest pattern is reachable"
            )));
        }
        if let Some(bad) = self.snr_grid.iter().find(|s| s.is_nan()) {
            return Err(Error::config(format!("invalid SNR {bad}")));
        }
        self.boundaries.resolve()?;
        self.channel.resolve()?;
        Ok(())
    }
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            kind: StudyKind::AdaptiveVsFixed,
            snr_grid: (0..=6).map(|i| 5.0 * i as f64).collect(),
            symbols_per_point: 20_000,
            trials: 20,
            boundaries: BoundarySpec::Table(4),
            channel: ChannelSpec::Model(2),
            stationarity: StationarityMode::GaussMarkov,
        }
    }
}

/// Metrics of one trial behind a table row.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub row: usize,
    pub trial: usize,
    pub metrics: RunMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutput {
    pub table: ResultTable,
    pub trials: Vec<TrialRecord>,
}

impl StudyOutput {
    /// Per-trial metrics of row `row`, in trial order.
    pub fn trials_of(&self, row: usize) -> impl Iterator<Item = &RunMetrics> {
        self.trials.iter().filter(move |t| t.row == row).map(|t| &t.metrics)
    }
}

struct Variant {
    mode: LinkMode,
    profile: ChannelProfile,
    model: Option<usize>,
    boundary_set: Option<usize>,
}

fn variants(cfg: &StudyConfig) -> Result<Vec<Variant>> {
    let profile = cfg.channel.resolve()?;
    let boundaries = cfg.boundaries.resolve()?;
    Ok(match cfg.kind {
        StudyKind::AdaptiveVsFixed => vec![
            Variant {
                mode: LinkMode::FixedPattern(1),
                profile: profile.clone(),
                model: cfg.channel.id(),
                boundary_set: None,
            },
            Variant {
                mode: LinkMode::Adaptive(boundaries),
                profile,
                model: cfg.channel.id(),
                boundary_set: cfg.boundaries.id(),
            },
        ],
        StudyKind::BoundarySweep => (1..=5)
            .map(|id| {
                Ok(Variant {
                    mode: LinkMode::Adaptive(BoundarySet::table(id)?),
                    profile: profile.clone(),
                    model: cfg.channel.id(),
                    boundary_set: Some(id),
                })
            })
            .collect::<Result<_>>()?,
        StudyKind::ModelSweep => (1..=MODEL_RHO.len())
            .map(|m| Variant {
                mode: LinkMode::Adaptive(boundaries),
                profile: profile.clone().with_rho(MODEL_RHO[m - 1]),
                model: Some(m),
                boundary_set: cfg.boundaries.id(),
            })
            .collect(),
    })
}

/// Runs a study. Every (SNR point, trial) pair gets one seed shared by all
/// compared variants; jobs run on the rayon pool.
pub fn run_study(link: &LinkConfig, cfg: &StudyConfig) -> Result<StudyOutput> {
    link.validate()?;
    cfg.validate(link)?;
    let variants = variants(cfg)?;
    let master = link.rng_seed;
    let trials = cfg.trials;

    let jobs: Vec<(usize, usize, usize)> = (0..variants.len())
        .flat_map(|v| (0..cfg.snr_grid.len()).flat_map(move |s| (0..trials).map(move |t| (v, s, t))))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(v, s, t)| {
            let var = &variants[v];
            let config = LinkConfig {
                snr_db: cfg.snr_grid[s],
                ..link.clone()
            };
            let seed = derive_seed(master, (s * trials + t) as u64);
            run_link(&config, &var.profile, var.mode, cfg.symbols_per_point, seed)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut records = Vec::with_capacity(results.len());
    for (chunk_idx, chunk) in results.chunks(trials).enumerate() {
        let (v, s) = (chunk_idx / cfg.snr_grid.len(), chunk_idx % cfg.snr_grid.len());
        let var = &variants[v];
        rows.push(aggregate(cfg, var, cfg.snr_grid[s], master, chunk));
        for (t, m) in chunk.iter().enumerate() {
            records.push(TrialRecord {
                row: chunk_idx,
                trial: t,
                metrics: m.clone(),
            });
        }
    }
    Ok(StudyOutput {
        table: ResultTable::new(rows),
        trials: records,
    })
}

fn aggregate(cfg: &StudyConfig, var: &Variant, snr_db: f64, seed: u64, runs: &[RunMetrics]) -> ResultRow {
    let bits: u64 = runs.iter().map(|m| m.total_bits).sum();
    let errors: u64 = runs.iter().map(|m| m.bit_errors).sum();
    let mut soundings = [0u64; NUM_PATTERNS];
    for m in runs {
        for (acc, c) in soundings.iter_mut().zip(m.pattern_soundings) {
            *acc += c;
        }
    }
    let total: u64 = soundings.iter().sum();
    let occ = soundings.map(|c| if total > 0 { c as f64 / total as f64 } else { 0.0 });
    ResultRow {
        study: cfg.kind.name().to_string(),
        mode: var.mode.label(),
        snr_db,
        model: var.model,
        boundary_set: var.boundary_set,
        trial: runs.len(),
        ber: if bits > 0 { errors as f64 / bits as f64 } else { 0.0 },
        data_rate: runs.iter().map(|m| m.data_rate_fraction).sum::<f64>() / runs.len() as f64,
        resets: runs.iter().map(|m| m.resets).sum(),
        occ_p1: occ[0],
        occ_p2: occ[1],
        occ_p3: occ[2],
        occ_p4: occ[3],
        seed,
    }
}

pub fn study_adaptive_vs_fixed(link: &LinkConfig, cfg: &StudyConfig) -> Result<StudyOutput> {
    run_study(link, &StudyConfig { kind: StudyKind::AdaptiveVsFixed, ..cfg.clone() })
}

pub fn study_boundaries(link: &LinkConfig, cfg: &StudyConfig) -> Result<StudyOutput> {
    run_study(link, &StudyConfig { kind: StudyKind::BoundarySweep, ..cfg.clone() })
}

pub fn study_models(link: &LinkConfig, cfg: &StudyConfig) -> Result<StudyOutput> {
    run_study(link, &StudyConfig { kind: StudyKind::ModelSweep, ..cfg.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: StudyKind) -> StudyConfig {
        StudyConfig {
            kind,
            snr_grid: vec![10.0, 20.0],
            symbols_per_point: 400,
            trials: 2,
            ..StudyConfig::default()
        }
    }

    #[test]
    fn row_counts() {
        let link = LinkConfig::default();
        let a = run_study(&link, &small(StudyKind::AdaptiveVsFixed)).unwrap();
        assert_eq!(a.table.len(), 2 * 2);
        assert_eq!(a.trials.len(), 2 * 2 * 2);
        let b = run_study(&link, &small(StudyKind::BoundarySweep)).unwrap();
        assert_eq!(b.table.len(), 5 * 2);
        let m = run_study(&link, &small(StudyKind::ModelSweep)).unwrap();
        assert_eq!(m.table.len(), 5 * 2);
        assert_eq!(m.table.rows.iter().filter_map(|r| r.model).collect::<Vec<_>>(), vec![1, 1, 2, 2, 3, 3, 4, 4, 5, 5]);
    }

    #[test]
    fn pooled_aggregation() {
        let out = run_study(&LinkConfig::default(), &small(StudyKind::AdaptiveVsFixed)).unwrap();
        for (i, row) in out.table.rows.iter().enumerate() {
            let runs: Vec<_> = out.trials_of(i).collect();
            let bits: u64 = runs.iter().map(|m| m.total_bits).sum();
            let errs: u64 = runs.iter().map(|m| m.bit_errors).sum();
            let ber = if bits == 0 { 0.0 } else { errs as f64 / bits as f64 };
            assert_eq!(row.ber, ber);
            assert_eq!(row.trial, 2);
            let occ: f64 = row.occupancy().iter().sum();
            assert!((occ - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn modes_share_seeds() {
        let out = run_study(&LinkConfig::default(), &small(StudyKind::AdaptiveVsFixed)).unwrap();
        let seeds = |row| out.trials_of(row).map(|m| m.seed).collect::<Vec<_>>();
        assert_eq!(seeds(0), seeds(2));
        assert_eq!(seeds(1), seeds(3));
        assert_ne!(seeds(0), seeds(1));
    }

    #[test]
    fn rejects_bad_configs() {
        let link = LinkConfig::default();
        let mut c = small(StudyKind::BoundarySweep);
        c.trials = 0;
        assert!(run_study(&link, &c).is_err());
        let mut c = small(StudyKind::BoundarySweep);
        c.symbols_per_point = 79;
        assert!(run_study(&link, &c).is_err());
        let mut c = small(StudyKind::AdaptiveVsFixed);
        c.boundaries = BoundarySpec::Table(6);
        assert!(run_study(&link, &c).is_err());
    }

    #[test]
    fn empty_grid_gives_empty_table() {
        let mut c = small(StudyKind::ModelSweep);
        c.snr_grid.clear();
        assert!(run_study(&LinkConfig::default(), &c).unwrap().table.is_empty());
    }
}
