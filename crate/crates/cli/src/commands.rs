use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use stablebranch::config::ExperimentConfig;
use stablebranch::sim::{Ensemble, Simulator};
use stablebranch::spectral::{CatalystFamily, LambdaSign, SpectralData};
use stablebranch::verify::{LimitConstants, LimitLawReport};
use stablebranch::{Error, StableParams};

use crate::{grid, Cli, Command, Common, RadialArgs};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Error with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn infeasible(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self { code: 4, message: format!("{}: {e}", path.display()) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::InvalidParams(_) => 2,
            Error::Io(_) => 4,
            _ => 3,
        };
        Self { code, message: e.to_string() }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

pub fn run(cli: Cli) -> Outcome {
    let Cli { command, common } = cli;
    match common.threads {
        Some(0) => Err(Failure::usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::infeasible(e.to_string()))?
            .install(|| dispatch(command, &common)),
        None => dispatch(command, &common),
    }
}

fn dispatch(command: Command, common: &Common) -> Outcome {
    match command {
        Command::Density(args) => density(&args, common),
        Command::Resolvent { radial, beta } => resolvent(&radial, beta, common),
        Command::Spectrum => spectrum(common),
        Command::Simulate => simulate(common),
        Command::Verify { runs, mixture } => verify(common, &runs, &mixture),
        Command::Reproduce => reproduce(common),
    }
}

fn load_config(common: &Common) -> Outcome<ExperimentConfig> {
    let path = common.config.as_ref().ok_or_else(|| Failure::usage("--config PATH is required"))?;
    if !path.exists() {
        return Err(Failure::io(path, "no such file"));
    }
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = common.seed {
        cfg.sim.base_seed = seed;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn header(hash: &str) -> String {
    format!("# stablebranch {VERSION}\n# config_hash={hash}\n")
}

/// Writes `name` under `--out`, or to stdout without it.
fn emit(common: &Common, name: &str, contents: &str) -> Outcome {
    match &common.out {
        Some(dir) => write_file(dir, name, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn out_dir(common: &Common) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::io(&path, e))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n"
}

fn radial_params(args: &RadialArgs, common: &Common) -> Outcome<(StableParams, String)> {
    let cfg = match common.config {
        Some(_) => Some(load_config(common)?),
        None => None,
    };
    let dim = args.dim.or(cfg.as_ref().map(|c| c.stable.d));
    let alpha = args.alpha.or(cfg.as_ref().map(|c| c.stable.alpha));
    let (Some(dim), Some(alpha)) = (dim, alpha) else {
        return Err(Failure::usage("give --dim and --alpha, or --config"));
    };
    let hash = cfg.map_or_else(|| "none".to_string(), |c| c.hash());
    Ok((StableParams::new(dim, alpha)?, hash))
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn error_cell(e: &Error) -> String {
    e.to_string().replace(',', ";")
}

fn density(args: &RadialArgs, common: &Common) -> Outcome {
    let (p, hash) = radial_params(args, common)?;
    let radii = grid::parse(&args.grid).map_err(Failure::usage)?;
    let (d, a) = (p.dim() as f64, p.alpha());
    let c = p.tail_constant();
    let mut out = header(&hash);
    writeln!(out, "# d={} alpha={a}", p.dim()).unwrap();
    out.push_str("r,g,tail_asymptote,tail_ratio,error\n");
    for r in radii {
        let tail = (r > 0.0).then(|| c * r.powf(-d - a));
        let (g, err) = match p.density(r) {
            Ok(g) => (Some(g), String::new()),
            Err(e) => (None, error_cell(&e)),
        };
        let ratio = g.zip(tail).map(|(g, t)| g / t);
        writeln!(out, "{r:e},{},{},{},{err}", cell(g), cell(tail), cell(ratio)).unwrap();
    }
    emit(common, "density.csv", &out)
}

fn resolvent(args: &RadialArgs, beta: f64, common: &Common) -> Outcome {
    let (p, hash) = radial_params(args, common)?;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Failure::usage(format!("--beta must be positive, got {beta}")));
    }
    let radii = grid::parse(&args.grid).map_err(Failure::usage)?;
    let (d, a) = (p.dim() as f64, p.alpha());
    let c = p.tail_constant();
    let small = |r: f64| -> Option<f64> {
        if d < a {
            Some(p.resolvent_at_zero(beta))
        } else if d == a {
            (r > 0.0 && r < 1.0).then(|| a * p.g_at_zero() * (1.0 / r).ln())
        } else if r > 0.0 {
            p.green_density(r).ok()
        } else {
            None
        }
    };
    let mut out = header(&hash);
    writeln!(out, "# d={} alpha={a} beta={beta}", p.dim()).unwrap();
    out.push_str("r,w,tail_asymptote,tail_ratio,small_r_asymptote,small_r_ratio,error\n");
    for r in radii {
        let tail = (r > 0.0).then(|| c * r.powf(-d - a) / (beta * beta));
        let (w, err) = match p.resolvent_density(beta, r) {
            Ok(w) => (Some(w), String::new()),
            Err(e) => (None, error_cell(&e)),
        };
        let s = small(r);
        writeln!(
            out,
            "{r:e},{},{},{},{},{},{err}",
            cell(w),
            cell(tail),
            cell(w.zip(tail).map(|(w, t)| w / t)),
            cell(s),
            cell(w.zip(s).map(|(w, s)| w / s)),
        )
        .unwrap();
    }
    emit(common, "resolvent.csv", &out)
}

/// Spectral summary, plus the data of the discretized system the simulator
/// runs for a supercritical point catalyst.
fn spectral_json(cfg: &ExperimentConfig, sim: Option<&Simulator>) -> Outcome<(Value, SpectralData)> {
    let data = SpectralData::compute(&cfg.spec()?)?;
    let discrete = sim.and_then(|s| s.model()).map(|m| {
        json!({
            "epsilon": m.epsilon,
            "dt": m.dt,
            "lambda": m.lambda,
            "growth_per_step": m.rho,
            "nu_mass": m.nu_mass,
            "c_star": m.c_star,
            "h_x0": m.phi(cfg.sim.x0[0]),
        })
    });
    let value = json!({
        "version": VERSION,
        "config_hash": cfg.hash(),
        "spectral": data,
        "discrete": discrete,
    });
    Ok((value, data))
}

fn require_negative(common: &Common, data: &SpectralData) -> Outcome {
    if common.require_negative && data.sign != LambdaSign::Negative {
        return Err(Failure::infeasible(format!(
            "principal eigenvalue is not known to be negative (classification {:?})",
            data.sign
        )));
    }
    Ok(())
}

fn needs_model(cfg: &ExperimentConfig) -> bool {
    matches!(cfg.family(), Ok(CatalystFamily::Point { .. })) && 2.0 * cfg.offspring.p2 > 1.0
}

fn spectrum(common: &Common) -> Outcome {
    let cfg = load_config(common)?;
    let sim = if needs_model(&cfg) { Some(cfg.simulator()?) } else { None };
    let (value, data) = spectral_json(&cfg, sim.as_ref())?;
    emit(common, "spectrum.json", &pretty(&value))?;
    require_negative(common, &data)
}

fn check_sign(cfg: &ExperimentConfig, common: &Common) -> Outcome {
    if common.require_negative {
        require_negative(common, &SpectralData::compute(&cfg.spec()?)?)?;
    }
    Ok(())
}

fn runs_table(ensemble: &Ensemble, hash: &str) -> Outcome<String> {
    let mut buf = header(hash).into_bytes();
    ensemble.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
}

fn summary_json(cfg: &ExperimentConfig, sim: &Simulator, ensemble: &Ensemble) -> Value {
    json!({
        "version": VERSION,
        "config_hash": cfg.hash(),
        "config": cfg,
        "n_runs": ensemble.records.len(),
        "censored": ensemble.censored(),
        "lambda": sim.lambda(),
        "summary": ensemble.summary(),
    })
}

/// Runs one batch and writes `{prefix}runs.csv` and `{prefix}summary.json`.
fn simulate_batch(cfg: &ExperimentConfig, sim: &Simulator, seed: u64, dir: &Path, prefix: &str) -> Outcome<Ensemble> {
    let ensemble = sim.ensemble(cfg.sim.n_runs, seed)?;
    let hash = cfg.hash();
    write_file(dir, &format!("{prefix}runs.csv"), &runs_table(&ensemble, &hash)?)?;
    write_file(dir, &format!("{prefix}summary.json"), &pretty(&summary_json(cfg, sim, &ensemble)))?;
    if ensemble.censored() > 0 {
        eprintln!("{} of {} runs censored by the population cap", ensemble.censored(), ensemble.records.len());
    }
    Ok(ensemble)
}

fn simulate(common: &Common) -> Outcome {
    let cfg = load_config(common)?;
    check_sign(&cfg, common)?;
    let sim = cfg.simulator()?;
    simulate_batch(&cfg, &sim, cfg.sim.base_seed, &out_dir(common), "")?;
    Ok(())
}

fn read_runs(path: &Path, hash: &str) -> Outcome<Ensemble> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    if let Some(line) = text.lines().find(|l| l.starts_with("# config_hash=")) {
        if line.trim_start_matches("# config_hash=") != hash {
            eprintln!("warning: {} was written for a different configuration", path.display());
        }
    }
    Ensemble::read_csv(&text).map_err(|e| Failure { code: 4, message: format!("{}: {e}", path.display()) })
}

fn verify_report(cfg: &ExperimentConfig, sim: &Simulator, exceed: &Ensemble, mixture: &Ensemble, dir: &Path) -> Outcome<bool> {
    let v = cfg.verify.as_ref().ok_or_else(|| Failure::usage("the config has no [verify] section"))?;
    let constants = LimitConstants::from_simulator(sim)
        .ok_or_else(|| Failure::infeasible("limit-law checks need a supercritical point catalyst"))?;
    let horizons = if v.horizons.is_empty() { vec![cfg.sim.horizon] } else { v.horizons.clone() };
    let report = LimitLawReport::build(exceed, mixture, constants, &v.kappa_grid, &horizons, cfg.a_exponent()?)?;
    let flags = report.flags();
    let hash = cfg.hash();
    let value = json!({
        "version": VERSION,
        "config_hash": hash,
        "exceed_batch": exceed.base_seed,
        "mixture_batch": mixture.base_seed,
        "report": report,
        "flags": flags,
    });
    write_file(dir, "report.json", &pretty(&value))?;
    let mut csv = header(&hash).into_bytes();
    report.write_csv(&mut csv)?;
    write_file(dir, "report.csv", &String::from_utf8(csv).expect("CSV is UTF-8"))?;
    for f in &flags {
        println!("{} {}: {}", if f.pass { "PASS" } else { "FAIL" }, f.name, f.detail);
    }
    Ok(flags.iter().all(|f| f.pass))
}

fn verify(common: &Common, runs: &Path, mixture: &Path) -> Outcome {
    let cfg = load_config(common)?;
    let hash = cfg.hash();
    let exceed = read_runs(runs, &hash)?;
    let mixture = read_runs(mixture, &hash)?;
    let sim = cfg.simulator()?;
    verify_report(&cfg, &sim, &exceed, &mixture, &out_dir(common))?;
    Ok(())
}

fn reproduce(common: &Common) -> Outcome {
    let cfg = load_config(common)?;
    check_sign(&cfg, common)?;
    let dir = out_dir(common);
    let sim = cfg.simulator()?;
    let (value, _) = spectral_json(&cfg, Some(&sim))?;
    write_file(&dir, "spectrum.json", &pretty(&value))?;
    let exceed = simulate_batch(&cfg, &sim, cfg.sim.base_seed, &dir, "")?;
    let mixture = simulate_batch(&cfg, &sim, cfg.mixture_seed(), &dir, "mixture_")?;
    verify_report(&cfg, &sim, &exceed, &mixture, &dir)?;
    Ok(())
}
