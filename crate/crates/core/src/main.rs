use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use adaptive_pilot::channel::StationarityMode;
use adaptive_pilot::harness::config::FileConfig;
use adaptive_pilot::harness::link::{write_trace_csv, LinkSimulator};
use adaptive_pilot::harness::{emit_results, run_study, LinkMode, ResultRow, ResultTable, StudyKind};
use adaptive_pilot::ChannelProfile;

#[derive(Parser, Debug)]
#[command(name = "adaptive-pilot", version, about = "Adaptive pilot-pattern OFDM link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a single link and print its metrics.
    Run(RunArgs),
    /// Adaptive against fixed pattern 1 over an SNR grid.
    SweepSnr(Common),
    /// Adaptive mode under each tabulated boundary set.
    StudyBoundaries(Common),
    /// Adaptive mode under each channel model.
    StudyModels(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides link.rng_seed).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    /// SNR in dB; a comma-separated list for studies. `inf` disables noise.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr: Option<Vec<f64>>,
    /// Channel model 1..=5.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    model: Option<u8>,
    /// Tabulated boundary set 1..=5.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    boundary_set: Option<u8>,
    #[arg(long, value_enum)]
    stationarity_mode: Option<StationarityMode>,
    #[arg(long)]
    trials: Option<usize>,
    /// OFDM symbols per run.
    #[arg(long)]
    symbols: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Always use pattern 1..=4.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4), conflicts_with = "adaptive")]
    fixed_pattern: Option<u8>,
    /// Let the controller pick the pattern (default).
    #[arg(long)]
    adaptive: bool,
    /// Also write the controller decision trace.
    #[arg(long)]
    trace: bool,
}

fn load_config(c: &Common) -> anyhow::Result<FileConfig> {
    let mut file = match &c.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(seed) = c.seed {
        file.link.rng_seed = seed;
    }
    if let Some(m) = c.model {
        file.channel = None;
        file.study.channel_model = Some(m as usize);
    }
    if let Some(b) = c.boundary_set {
        file.study.boundary_lower = None;
        file.study.boundary_upper = None;
        file.study.boundary_set = Some(b as usize);
    }
    if let Some(mode) = c.stationarity_mode {
        file.study.stationarity_mode = mode;
    }
    if let Some(t) = c.trials {
        file.study.trials = t;
    }
    if let Some(s) = c.symbols {
        file.study.symbols_per_point = s;
    }
    Ok(file)
}

fn write_config(file: &FileConfig, dir: &Path, stem: &str) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("{stem}_config.toml"));
    file.save(&path)?;
    Ok(path)
}

fn run(args: &RunArgs) -> anyhow::Result<()> {
    let mut file = load_config(&args.common)?;
    if let Some(snr) = &args.common.snr {
        let [s] = snr.as_slice() else {
            bail!("run takes a single --snr value");
        };
        file.link.snr_db = *s;
    }
    let study = file.study_config(StudyKind::AdaptiveVsFixed)?;
    let profile: ChannelProfile = study.channel.resolve()?;
    let mode = match args.fixed_pattern {
        Some(p) => LinkMode::FixedPattern(p as usize),
        None => LinkMode::Adaptive(study.boundaries.resolve()?),
    };
    let seed = file.link.rng_seed;
    let mut sim = LinkSimulator::new(&file.link, &profile, mode, seed)?;
    if args.trace {
        sim.enable_trace();
    }
    for _ in 0..study.symbols_per_point {
        sim.step()?;
    }
    let m = sim.metrics();
    let occ = m.pattern_occupancy();
    println!("mode        {}", mode.label());
    println!("snr_db      {}", m.snr_db);
    println!("symbols     {}", study.symbols_per_point);
    println!("bits        {}", m.total_bits);
    println!("bit_errors  {}", m.bit_errors);
    println!("ber         {:.6e}", m.ber);
    println!("data_rate   {:.6}", m.data_rate_fraction);
    println!("resets      {}", m.resets);
    println!("occupancy   {:.4} {:.4} {:.4} {:.4}", occ[0], occ[1], occ[2], occ[3]);
    println!("seed        {seed}");

    let dir = &args.common.out_dir;
    let table = ResultTable::new(vec![ResultRow {
        study: "run".into(),
        mode: mode.label(),
        snr_db: m.snr_db,
        model: study.channel.id(),
        boundary_set: match mode {
            LinkMode::Adaptive(_) => study.boundaries.id(),
            LinkMode::FixedPattern(_) => None,
        },
        trial: 1,
        ber: m.ber,
        data_rate: m.data_rate_fraction,
        resets: m.resets,
        occ_p1: occ[0],
        occ_p2: occ[1],
        occ_p3: occ[2],
        occ_p4: occ[3],
        seed,
    }]);
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    table.save_csv(&dir.join("run.csv"))?;
    write_config(&file, dir, "run")?;
    if args.trace {
        let path = dir.join("run_trace.csv");
        let out = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_trace_csv(sim.trace(), std::io::BufWriter::new(out))?;
        println!("trace       {}", path.display());
    }
    Ok(())
}

fn study(kind: StudyKind, c: &Common) -> anyhow::Result<()> {
    let mut file = load_config(c)?;
    if let Some(snr) = &c.snr {
        file.study.snr_grid = snr.clone();
    }
    let cfg = file.study_config(kind)?;
    let out = run_study(&file.link, &cfg)?;
    let files = emit_results(&out.table, &c.out_dir, kind.name())?;
    write_config(&file, &c.out_dir, kind.name())?;
    println!("{:<20} {:>7} {:>12} {:>10} {:>8}", "series", "snr_db", "ber", "data_rate", "resets");
    for r in &out.table.rows {
        println!(
            "{:<20} {:>7} {:>12.4e} {:>10.4} {:>8}",
            r.series(),
            r.snr_db,
            r.ber,
            r.data_rate,
            r.resets
        );
    }
    println!("wrote {}", files.csv.display());
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(args) => run(args),
        Command::SweepSnr(c) => study(StudyKind::AdaptiveVsFixed, c),
        Command::StudyBoundaries(c) => study(StudyKind::BoundarySweep, c),
        Command::StudyModels(c) => study(StudyKind::ModelSweep, c),
    }
}
