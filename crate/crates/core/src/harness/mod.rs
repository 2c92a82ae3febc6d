//! Link simulation and parameter studies.

use std::path::{Path, PathBuf};

pub mod config;
pub mod link;
pub mod plot;
pub mod results;
pub mod study;

pub use link::{run_link, run_link_traced, LinkMode, LinkSimulator, RunMetrics, TraceEvent, TraceKind};
pub use results::{ResultRow, ResultTable};
pub use study::{
    run_study, study_adaptive_vs_fixed, study_boundaries, study_models, BoundarySpec, ChannelSpec, StudyConfig,
    StudyKind, StudyOutput,
};

use crate::error::{Error, Result};

/// Files written by [`emit_results`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedFiles {
    pub csv: PathBuf,
    pub ber_chart: PathBuf,
    pub rate_chart: PathBuf,
}

/// Writes `<stem>.csv`, `<stem>_ber.svg` and `<stem>_rate.svg` into `dir`.
pub fn emit_results(table: &ResultTable, dir: &Path, stem: &str) -> Result<EmittedFiles> {
    if table.is_empty() {
        return Err(Error::config("result table is empty; nothing to write"));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = EmittedFiles {
        csv: dir.join(format!("{stem}.csv")),
        ber_chart: dir.join(format!("{stem}_ber.svg")),
        rate_chart: dir.join(format!("{stem}_rate.svg")),
    };
    table.save_csv(&files.csv)?;
    plot::plot_metric(table, plot::Metric::Ber, &format!("{stem}: BER vs SNR"), &files.ber_chart)?;
    plot::plot_metric(
        table,
        plot::Metric::DataRate,
        &format!("{stem}: data rate vs SNR"),
        &files.rate_chart,
    )?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        assert!(emit_results(&ResultTable::default(), &out, "x").is_err());
        assert!(!out.exists());
    }

    #[test]
    fn emits_csv_and_charts() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = StudyConfig {
            snr_grid: vec![0.0, 10.0, f64::INFINITY],
            symbols_per_point: 200,
            trials: 1,
            ..StudyConfig::default()
        };
        let out = run_study(&crate::LinkConfig::default(), &cfg).unwrap();
        let files = emit_results(&out.table, dir.path(), "avf").unwrap();
        let back = ResultTable::load_csv(&files.csv).unwrap();
        assert_eq!(back, out.table);
        for svg in [&files.ber_chart, &files.rate_chart] {
            let text = std::fs::read_to_string(svg).unwrap();
            assert!(text.starts_with("<svg"));
            assert!(text.contains("adaptive"));
        }
    }
}
