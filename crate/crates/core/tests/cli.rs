use std::path::Path;
use std::process::{Command, Output};

use adaptive_pilot::harness::config::FileConfig;
use adaptive_pilot::harness::results::{ResultTable, CSV_HEADER};

fn cli(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adaptive-pilot"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_metrics_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(
        &["run", "--snr", "inf", "--model", "1", "--symbols", "400", "--trace", "--out-dir", "out"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("ber         0.000000e0"), "{stdout}");

    let out = dir.path().join("out");
    let table = ResultTable::load_csv(&out.join("run.csv")).unwrap();
    assert_eq!(table.len(), 1);
    assert_eq!(table.rows[0].model, Some(1));
    let trace = std::fs::read_to_string(out.join("run_trace.csv")).unwrap();
    assert!(trace.starts_with("t,event,R,pattern,period,windowed_BER,e"));
    assert!(trace.lines().any(|l| l.starts_with("1,SOUND,1,4,8")));
    let cfg = FileConfig::load(&out.join("run_config.toml")).unwrap();
    assert!(cfg.link.snr_db.is_infinite());
}

#[test]
fn fixed_pattern_and_adaptive_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["run", "--fixed-pattern", "2", "--adaptive"], dir.path());
    assert!(!o.status.success());
    let o = cli(&["run", "--fixed-pattern", "5"], dir.path());
    assert!(!o.status.success());
    let o = cli(&["run", "--model", "0"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn study_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("study.toml"),
        "[link]\nrng_seed = 7\n\n[study]\nsnr_grid = [10.0, 20.0]\nsymbols_per_point = 800\ntrials = 2\n",
    )
    .unwrap();
    let o = cli(
        &["study-models", "--config", "study.toml", "--out-dir", "res", "--stationarity-mode", "gauss-markov"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let res = dir.path().join("res");
    let csv = std::fs::read_to_string(res.join("models.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER.join(","));
    let table = ResultTable::read_csv(csv.as_bytes()).unwrap();
    assert_eq!(table.len(), 10);
    assert!(table.rows.iter().all(|r| r.seed == 7 && r.trial == 2 && r.study == "models"));
    for f in ["models_ber.svg", "models_rate.svg", "models_config.toml"] {
        assert!(res.join(f).exists(), "{f}");
    }
}

#[test]
fn sweep_snr_and_boundaries_accept_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(
        &["sweep-snr", "--snr", "0,15", "--trials", "1", "--symbols", "400", "--seed", "3", "--model", "4"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let t = ResultTable::load_csv(&dir.path().join("results/adaptive-vs-fixed.csv")).unwrap();
    assert_eq!(t.len(), 4);
    assert!(t.rows.iter().all(|r| r.model == Some(4) && r.seed == 3));

    let o = cli(
        &["study-boundaries", "--snr", "10", "--trials", "1", "--symbols", "400", "--out-dir", "b"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let t = ResultTable::load_csv(&dir.path().join("b/boundaries.csv")).unwrap();
    assert_eq!(t.rows.iter().map(|r| r.boundary_set.unwrap()).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
}

#[test]
fn bad_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[link]\nfft_size = 64\n").unwrap();
    let o = cli(&["run", "--config", "bad.toml"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("fft_size"), "{}", stderr(&o));

    let o = cli(&["sweep-snr", "--snr", "", "--out-dir", "empty"], dir.path());
    assert!(!o.status.success());
    assert!(!dir.path().join("empty/adaptive-vs-fixed.csv").exists());

    let o = cli(&["run", "--config", "missing.toml"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("missing.toml"));
}
