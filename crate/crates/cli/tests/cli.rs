use std::path::{Path, PathBuf};
use std::process::Command;

use hbgbc_cli::config::{Check, SweepMode};
use hbgbc_cli::{
    ed_latency_rows, hard_failure, render_csv, render_ed_csv, render_ndjson, run_checks, run_sweep, sweep_records,
    timesharing_records, CliError, Overrides, ScenarioFile,
};
use hbgbc_core::Order;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn recipe(name: &str) -> ScenarioFile {
    ScenarioFile::load(&manifest().join("../../docs/recipes").join(name)).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hbgbc"))
}

fn to(dir: &Path, name: &str) -> Overrides {
    Overrides {
        out: Some(dir.join(name)),
        ..Overrides::default()
    }
}

#[test]
fn golden_csv() {
    let file = ScenarioFile::load(&manifest().join("tests/golden/pinned.toml")).unwrap();
    let csv = render_csv(&sweep_records(&file, Order::WithHalfLogN).unwrap());
    let golden = std::fs::read_to_string(manifest().join("tests/golden/pinned.csv")).unwrap();
    assert_eq!(csv, golden);
}

#[test]
fn fig2_het_below_hom() {
    for name in ["fig2_h2_1p5.toml", "fig2_h2_10.toml"] {
        let recs = sweep_records(&recipe(name), Order::WithHalfLogN).unwrap();
        let series = |s: &str| recs.iter().filter(|r| r.series == s).map(|r| r.y).collect::<Vec<_>>();
        let (het, hom) = (series("sato_het"), series("sato_hom"));
        assert_eq!(het.len(), 61);
        assert!(het.iter().zip(&hom).all(|(a, b)| a < b), "{name}");
    }
}

#[test]
fn single_point_gives_one_record_per_series() {
    let mut file = recipe("fig2_h2_10.toml");
    file.sweep = None;
    let recs = sweep_records(&file, Order::FirstOrder).unwrap();
    assert_eq!(recs.len(), 4);
    assert!(recs.iter().all(|r| r.x == 128.0 && r.order == "first"));
}

#[test]
fn fig3_region_het_inside_hom() {
    let file = recipe("fig3_region.toml");
    assert_eq!(file.bounds.mode, SweepMode::Region);
    let recs = sweep_records(&file, Order::WithHalfLogN).unwrap();
    let sum = |s: &str| {
        recs.iter()
            .filter(|r| r.series == s)
            .map(|r| r.x + r.y)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    assert!(sum("sato_het") < sum("sato_hom"));
    assert!(sum("sato_hom") < sum("single_user"));
}

#[test]
fn fig4_latency_trend() {
    let rows = ed_latency_rows(&recipe("fig4_ed_latency.toml")).unwrap();
    assert!(rows.iter().all(|r| r.n2_shell >= r.n2_asymptotic));
    let ratio: Vec<f64> = rows
        .iter()
        .map(|r| r.n2_shell as f64 / r.n2_asymptotic as f64)
        .collect();
    assert!(ratio.windows(2).all(|w| w[1] <= w[0]), "{ratio:?}");
    let last = rows.last().unwrap();
    assert!(last.log_m1_bits >= 1e5 && *ratio.last().unwrap() < 1.05);
}

#[test]
fn fig1_sag_deeper_for_short_blocks() {
    let recs = timesharing_records(&recipe("fig1_timesharing.toml")).unwrap();
    let mid = |s: &str| {
        recs.iter()
            .find(|r| r.series == s && r.confidence.unwrap().0 == 0.5)
            .unwrap()
            .x
    };
    assert!(mid("n=128") < mid("n=512") && mid("n=512") < mid("n=2048") && mid("n=2048") < mid("asymptotic"));
    let flagged = recs.iter().filter(|r| r.confidence.unwrap().1).count();
    assert!(flagged > 0);
}

#[test]
fn ed_latency_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let file = recipe("fig4_ed_latency.toml");
    let a = hbgbc_cli::run_ed_latency(&file, &to(dir.path(), "a.csv")).unwrap();
    let b = hbgbc_cli::run_ed_latency(&file, &to(dir.path(), "b.csv")).unwrap();
    let (a, b) = (std::fs::read(a.csv).unwrap(), std::fs::read(b.csv).unwrap());
    assert_eq!(a, b);
    assert_eq!(
        String::from_utf8(a).unwrap(),
        render_ed_csv(&ed_latency_rows(&file).unwrap())
    );
}

#[test]
fn verify_reproducible_and_stable_across_seeds() {
    let mut file = recipe("verify.toml");
    file.mc.as_mut().unwrap().trials = 5000;
    let first = render_ndjson(&run_checks(&file, 1).unwrap());
    assert_eq!(first, render_ndjson(&run_checks(&file, 1).unwrap()));
    for seed in 1..=5 {
        let reports = run_checks(&file, seed).unwrap();
        assert_eq!(reports.len(), Check::ALL.len());
        assert!(
            reports.iter().all(|r| r.pass && r.warning.is_none()),
            "seed {seed}: {reports:?}"
        );
    }
}

#[test]
fn few_trials_warn_without_failing() {
    let mut file = recipe("verify.toml");
    file.mc.as_mut().unwrap().trials = 10;
    let reports = run_checks(&file, 3).unwrap();
    assert!(reports.iter().all(|r| r.warning.is_some()));
    assert!(!hard_failure(&reports));
}

#[test]
fn invalid_file_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(manifest().join("tests/golden/pinned.toml")).unwrap();
    let bad = text.replace("p = 0.9", "n2 = 200");
    let err = ScenarioFile::parse(&bad).unwrap_err();
    assert!(matches!(&err, CliError::Core(_)), "{err}");
    assert!(err.to_string().contains("n2"), "{err}");

    let path = dir.path().join("bad.toml");
    std::fs::write(&path, bad).unwrap();
    let out = bin()
        .arg("bounds")
        .arg("sweep")
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("o.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n2"));
    assert!(!dir.path().join("o.csv").exists());
}

#[test]
fn binary_sweep_with_env_dir_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["bounds", "sweep"])
        .arg(manifest().join("tests/golden/pinned.toml"))
        .args(["--svg", "--order", "first"])
        .env("HBGBC_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("pinned.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",first")));
    assert!(std::fs::read_to_string(dir.path().join("pinned.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn binary_verify_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(manifest().join("../../docs/recipes/verify.toml")).unwrap();
    let path = dir.path().join("v.toml");
    std::fs::write(&path, text.replace("trials = 20000", "trials = 10")).unwrap();
    let ndjson = dir.path().join("v.ndjson");
    let out = bin()
        .arg("verify")
        .arg(&path)
        .arg("--out")
        .arg(&ndjson)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let lines = std::fs::read_to_string(&ndjson).unwrap();
    assert_eq!(lines.lines().count(), 5);
    for l in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert!(v["warning"].is_string());
    }
}

#[test]
fn run_sweep_respects_output_override() {
    let dir = tempfile::tempdir().unwrap();
    let w = run_sweep(&recipe("fig3_region.toml"), &to(dir.path(), "r.csv")).unwrap();
    assert_eq!(w.csv, dir.path().join("r.csv"));
    assert!(w.svg.is_none());
}
