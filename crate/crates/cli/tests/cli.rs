use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const POINT: &str = r#"
[stable]
d = 1
alpha = 1.5

[catalyst]
family = "point"
c = 1.0

[offspring]
p0 = 0.0
p2 = 1.0

[sim]
x0 = [0.0]
dt = 0.01
horizon = 1.0
checkpoints = [0.5, 1.0]
n_runs = 40
population_cap = 100000
base_seed = 3

[verify]
kappa_grid = [1.0]
a_of_t = "t^2"
horizons = [1.0]
"#;

const BALL: &str = r#"
[stable]
d = 3
alpha = 1.5

[catalyst]
family = "ball"
c = 1.0
r = 2.0

[offspring]
p0 = 0.25
p2 = 0.75

[sim]
x0 = [0.0, 0.0, 0.0]
dt = 0.05
horizon = 1.0
checkpoints = [0.5, 1.0]
n_runs = 30
base_seed = 9
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stablebranch"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["density", "--dim", "1", "--alpha", "1.5", "--grid", "lin:1:0:3"])), 2);
    assert_eq!(code(&run(&["density", "--grid", "0,1"])), 2);
    assert_eq!(code(&run(&["spectrum"])), 2);
    assert_eq!(code(&run(&["simulate", "--config", "x.toml", "--threads", "0"])), 2);
}

#[test]
fn density_table_is_finite_at_zero() {
    let out = run(&["density", "--dim", "1", "--alpha", "1.5", "--grid", "0,1,200"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("# stablebranch "));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "r,g,tail_asymptote,tail_ratio,error");
    let g0: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!(g0.is_finite() && g0 > 0.0);
    let ratio: f64 = rows[3].split(',').nth(3).unwrap().parse().unwrap();
    assert!((ratio - 1.0).abs() < 0.02);
}

#[test]
fn resolvent_table_columns() {
    let out = run(&["resolvent", "--dim", "3", "--alpha", "1.5", "--beta", "1", "--grid", "0,0.001,500"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().filter(|l| !l.starts_with('#')).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0].len(), 7);
    // r = 0 is singular for d > alpha and reported in the row
    assert!(rows[1][1].is_empty() && !rows[1][6].is_empty());
    let small: f64 = rows[2][5].parse().unwrap();
    assert!((small - 1.0).abs() < 0.05);
    let tail: f64 = rows[3][3].parse().unwrap();
    assert!((tail - 1.0).abs() < 0.05);
}

#[test]
fn spectrum_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "point.toml", POINT);
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let lambda = v["spectral"]["lambda"].as_f64().unwrap();
    assert!((lambda + 1.8247119618832608).abs() < 1e-10);
    assert!(v["discrete"]["lambda"].as_f64().unwrap() < 0.0);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);

    let critical = write_config(dir.path(), "m1.toml", &POINT.replace("p0 = 0.0", "p0 = 0.5").replace("p2 = 1.0", "p2 = 0.5"));
    assert_eq!(code(&run(&["spectrum", "--config", critical.to_str().unwrap()])), 3);

    let ball = write_config(dir.path(), "ball.toml", BALL);
    let out = run(&["spectrum", "--config", ball.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("\"Indeterminate\""));
    assert_eq!(code(&run(&["spectrum", "--config", ball.to_str().unwrap(), "--require-negative"])), 3);
}

#[test]
fn missing_files_exit_4() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(&["spectrum", "--config", dir.path().join("none.toml").to_str().unwrap()])), 4);
    let cfg = write_config(dir.path(), "point.toml", POINT);
    let out = run(&["verify", "--config", cfg.to_str().unwrap(), "--runs", "nope.csv", "--mixture", "nope2.csv"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn zero_checkpoints_rejected_at_load() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &BALL.replace("checkpoints = [0.5, 1.0]", "checkpoints = []"));
    assert_eq!(code(&run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])), 2);
}

fn simulate(cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn simulate_is_byte_identical_across_runs_and_threads() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "point.toml", POINT);
    let outs: Vec<PathBuf> = (0..3).map(|i| dir.path().join(format!("o{i}"))).collect();
    assert_eq!(code(&simulate(&cfg, &outs[0], &["--threads", "1"])), 0);
    assert_eq!(code(&simulate(&cfg, &outs[1], &["--threads", "1"])), 0);
    assert_eq!(code(&simulate(&cfg, &outs[2], &["--threads", "4"])), 0);
    for name in ["runs.csv", "summary.json"] {
        let first = fs::read(outs[0].join(name)).unwrap();
        for o in &outs[1..] {
            assert_eq!(first, fs::read(o.join(name)).unwrap(), "{name}");
        }
    }
    let runs = fs::read_to_string(outs[0].join("runs.csv")).unwrap();
    assert!(runs.contains("# config_hash="));
    assert!(runs.contains("# stablebranch "));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(outs[0].join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["n_runs"], 40);
    assert!(summary["version"].is_string());

    let reseeded = dir.path().join("o3");
    assert_eq!(code(&simulate(&cfg, &reseeded, &["--seed", "4"])), 0);
    assert_ne!(fs::read(outs[0].join("runs.csv")).unwrap(), fs::read(reseeded.join("runs.csv")).unwrap());
}

#[test]
fn population_cap_flags_censoring() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "cap.toml", &POINT.replace("population_cap = 100000", "population_cap = 1"));
    let out = simulate(&cfg, dir.path(), &[]);
    assert_eq!(code(&out), 0);
    let runs = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    let mut censored = 0;
    for line in runs.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        // a run that never split stays within the cap
        assert!(f[8] == "censored" || f[3] == "1", "{line}");
        censored += usize::from(f[8] == "censored");
    }
    assert!(censored > 0);
    assert!(String::from_utf8(out.stderr).unwrap().contains("censored"));
}

#[test]
fn verify_single_kappa_report() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "point.toml", POINT);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&simulate(&cfg, &a, &[])), 0);
    assert_eq!(code(&simulate(&cfg, &b, &["--seed", "99"])), 0);
    let out = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--runs",
        a.join("runs.csv").to_str().unwrap(),
        "--mixture",
        b.join("runs.csv").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let stderr = String::from_utf8(out.stderr.clone()).unwrap();
    // at this tiny budget the tail section may have no events
    if code(&out) == 3 {
        assert!(stderr.contains("no exceedance events"), "{stderr}");
        return;
    }
    assert_eq!(code(&out), 0, "{stderr}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let weak = report["report"]["weak"].as_array().unwrap();
    assert_eq!(weak.len(), 2);
    assert_eq!(weak[0]["rows"].as_array().unwrap().len(), 1);
    assert_ne!(report["exceed_batch"], report["mixture_batch"]);
    assert!(stdout(&out).lines().all(|l| l.starts_with("PASS ") || l.starts_with("FAIL ")));
}

#[test]
fn verify_rejects_same_batch() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "point.toml", POINT);
    assert_eq!(code(&simulate(&cfg, dir.path(), &[])), 0);
    let runs = dir.path().join("runs.csv");
    let out = run(&["verify", "--config", cfg.to_str().unwrap(), "--runs", runs.to_str().unwrap(), "--mixture", runs.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}
