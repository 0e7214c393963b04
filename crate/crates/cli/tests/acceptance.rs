//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use stablebranch::config::ExperimentConfig;
use stablebranch::quad::{integrate_half_line, Tolerance};
use stablebranch::sim::{feynman_kac_estimate, second_moment_estimate, MeanEstimate, Simulator, TestFunction};
use stablebranch::spectral::{lambda_point_closed_form, lambda_point_numeric, PointGroundState};
use stablebranch::verify::{LimitConstants, LimitLawReport};
use stablebranch::StableParams;
use statrs::distribution::{ContinuousCDF, Normal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&configs().join(name)).expect("shipped config loads")
}

/// Two-sided normal quantile for a family-wise 3σ level over `k` tests.
fn bonferroni_z(k: usize) -> f64 {
    let tail = 2.0 * (1.0 - Normal::standard().cdf(3.0));
    Normal::standard().inverse_cdf(1.0 - tail / (2.0 * k as f64))
}

fn eigenvalue_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for a in [1.1, 1.5, 1.9] {
        for c in [0.5, 1.0, 2.0] {
            for m in [1.5, 2.0, 3.0] {
                let x = lambda_point_numeric(a, c, m).unwrap();
                let y = lambda_point_closed_form(a, c, m).unwrap();
                worst = worst.max(rel(x, y));
            }
        }
    }
    Outcome { pass: worst <= 1e-10, detail: format!("max relative difference {worst:.2e} over 27 points") }
}

/// `g(0) = ω_d (2π)^{-d} ∫_0^∞ u^{d-1} e^{-u^α/2} du` by quadrature.
fn g0_by_quadrature(p: StableParams) -> f64 {
    let d = p.dim() as i32;
    let a = p.alpha();
    let integral = integrate_half_line(|u| u.powi(d - 1) * (-0.5 * u.powf(a)).exp(), 0.0, 1.0, Tolerance::new(0.0, 1e-13), "g0")
        .unwrap()
        .value;
    p.omega() * integral / (2.0 * PI).powi(d)
}

fn density_asymptotics() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, a) in [(1, 1.0), (1, 1.5), (2, 1.0), (3, 1.5)] {
        let p = StableParams::new(d, a).unwrap();
        let ratio = |r: f64| r.powf(d as f64 + a) * p.density(r).unwrap() / p.tail_constant();
        let (r200, r400) = (ratio(200.0), ratio(400.0));
        let g0 = rel(p.g_at_zero(), g0_by_quadrature(p));
        let ok = (0.98..=1.02).contains(&r200) && (r400 - 1.0).abs() < (r200 - 1.0).abs() && g0 <= 1e-6;
        pass &= ok;
        parts.push(format!("({d},{a}): {r200:.5}/{r400:.5} g0 {g0:.1e}"));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn resolvent_asymptotics() -> Outcome {
    let beta = 1.0;
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, a) in [(1, 1.0), (1, 1.5), (2, 1.0), (3, 1.5)] {
        let p = StableParams::new(d, a).unwrap();
        let r: f64 = 500.0;
        let ratio = p.resolvent_density(beta, r).unwrap() / (p.tail_constant() * r.powf(-(d as f64) - a) / (beta * beta));
        pass &= (ratio - 1.0).abs() <= 0.05;
        parts.push(format!("tail ({d},{a}) {ratio:.4}"));
    }
    let r: f64 = 1e-3;
    // d < α: w_β(r) → w_β(0)
    let p = StableParams::new(1, 1.5).unwrap();
    let below = p.resolvent_density(beta, r).unwrap() / p.resolvent_at_zero(beta);
    // d > α: w_β(r) ~ G(r)
    let p = StableParams::new(3, 1.5).unwrap();
    let above = p.resolvent_density(beta, r).unwrap() / p.green_density(r).unwrap();
    // d = α: w_β(r) / log(1/r) → α g(0)
    let p = StableParams::new(1, 1.0).unwrap();
    let log_ratio = |r: f64| p.resolvent_density(beta, r).unwrap() / (1.0 / r).ln() / (p.alpha() * p.g_at_zero());
    let critical = log_ratio(r);
    for (name, v) in [("d<α", below), ("d>α", above), ("d=α", critical)] {
        pass &= (v - 1.0).abs() <= 0.05;
        parts.push(format!("{name} {v:.4}"));
    }
    parts.push(format!("d=α at r=1e-6 {:.4}, 1e-9 {:.4}", log_ratio(1e-6), log_ratio(1e-9)));
    Outcome { pass, detail: parts.join("; ") }
}

fn three_g_stability() -> Outcome {
    let p = StableParams::new(3, 1.5).unwrap();
    let small = p.three_g_max(1.0, 10_000, 10.0, 1e-3, 11).unwrap();
    let large = p.three_g_max(1.0, 20_000, 10.0, 1e-3, 11).unwrap();
    Outcome {
        pass: small.is_finite() && large <= 1.1 * small,
        detail: format!("max ratio {small:.4} (1e4 triples) -> {large:.4} (2e4 triples)"),
    }
}

fn sampler_conformance() -> Outcome {
    let p = StableParams::new(2, 1.5).unwrap();
    let sampler = p.increment_sampler(1.0).unwrap();
    let n = 1_000_000;
    let mut rng = Simulator::replica_rng(5, 0);
    let xs: Vec<Vec<f64>> = (0..n).map(|_| sampler.sample_increment(&mut rng)).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for xi in [[0.1, 0.0], [0.5, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, -1.0]] {
        let vals: Vec<f64> = xs.iter().map(|x| (xi[0] * x[0] + xi[1] * x[1]).cos()).collect();
        let est = MeanEstimate::from_samples(&vals).unwrap();
        let exact = (-0.5 * (xi[0] * xi[0] + xi[1] * xi[1]).sqrt().powf(1.5)).exp();
        let z = (est.mean - exact).abs() / est.std_err;
        pass &= z <= 3.0;
        parts.push(format!("cf z {z:.2}"));
    }
    for radius in [1.0, 2.0, 5.0] {
        let hits = xs.iter().filter(|x| x[0].hypot(x[1]) > radius).count() as f64;
        let q = p.tail_probability(1.0, radius).unwrap();
        let z = (hits / n as f64 - q).abs() / (q * (1.0 - q) / n as f64).sqrt();
        pass &= z <= 3.0;
        parts.push(format!("tail R={radius} z {z:.2}"));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn ground_state_tail() -> Outcome {
    let h = PointGroundState::from_parts(1.5, 1.0, 2.0).unwrap();
    let at = |r: f64| rel(r.powf(1.5) * h.tail_mass(r).unwrap(), h.c_star());
    let (e100, e200) = (at(100.0), at(200.0));
    Outcome {
        pass: e200 <= 0.05 && e200 < e100,
        detail: format!("relative error {e100:.4} at R=100, {e200:.4} at R=200"),
    }
}

fn moment_oracle(sim: &Simulator, x0: &[f64]) -> Outcome {
    let n = 10_000;
    let fs = [TestFunction::One, TestFunction::Beyond(5.0)];
    let cps = &sim.settings().checkpoints;
    let values = sim.functionals(&fs, n, 71);
    let mut pass = true;
    let mut parts = Vec::new();
    for t in [1.0, 2.0] {
        let k = cps.iter().position(|&c| (c - t).abs() < 1e-9).expect("checkpoint");
        for (j, f) in fs.iter().enumerate() {
            let xs: Vec<f64> = values.iter().flatten().map(|v| v[k][j]).collect();
            let mc = MeanEstimate::from_samples(&xs).unwrap();
            let fk = feynman_kac_estimate(sim, x0, t, *f, n, 72).unwrap();
            let z = mc.z_score(&fk);
            pass &= z <= 3.0;
            parts.push(format!("E Z_{t}({f:?}) z {z:.2}"));
        }
        let sq: Vec<f64> = values.iter().flatten().map(|v| v[k][0].powi(2)).collect();
        let mc = MeanEstimate::from_samples(&sq).unwrap();
        let fk = second_moment_estimate(sim, x0, t, TestFunction::One, n, 73).unwrap();
        let z = mc.z_score(&fk);
        pass &= z <= 3.0;
        parts.push(format!("E Z_{t}(1)^2 z {z:.2}"));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn martingale(sim: &Simulator) -> Outcome {
    let constants = LimitConstants::from_simulator(sim).unwrap();
    let ensemble = sim.ensemble(10_000, 81).unwrap();
    let summary = ensemble.summary();
    let limit = bonferroni_z(summary.checkpoints.len());
    let mut pass = ensemble.censored() == 0;
    let mut parts = vec![format!("h(x0) {:.4}, bound {limit:.2}σ", constants.h_x0)];
    for c in &summary.checkpoints {
        let m = c.m.unwrap();
        let z = (m.mean - constants.h_x0).abs() / m.std_err;
        pass &= z <= limit;
        parts.push(format!("t={} z {z:.2}", c.t));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn limit_laws() -> (Outcome, Outcome) {
    let cfg = load("acceptance.toml");
    let sim = cfg.simulator().unwrap();
    let v = cfg.verify.clone().unwrap();
    let exceed = sim.ensemble(cfg.sim.n_runs, cfg.sim.base_seed).unwrap();
    let mixture = sim.ensemble(cfg.sim.n_runs, cfg.mixture_seed()).unwrap();
    let constants = LimitConstants::from_simulator(&sim).unwrap();
    let report = LimitLawReport::build(&exceed, &mixture, constants, &v.kappa_grid, &v.horizons, cfg.a_exponent().unwrap());
    let report = match report {
        Ok(r) => r,
        Err(e) => {
            let fail = || Outcome { pass: false, detail: e.to_string() };
            return (fail(), fail());
        }
    };
    let growth = (-constants.lambda * v.horizons.last().unwrap()).exp();
    let flags = report.flags();
    let join = |names: &[&str]| {
        let picked: Vec<_> = flags.iter().filter(|f| names.contains(&f.name.as_str())).collect();
        Outcome {
            pass: picked.iter().all(|f| f.pass),
            detail: picked.iter().map(|f| format!("{} {}", f.name, f.detail)).collect::<Vec<_>>().join("; "),
        }
    };
    let mut weak = join(&["weak_within_3sigma", "weak_discrepancy_not_growing"]);
    weak.pass &= growth >= 1e3 && v.kappa_grid.len() == 8;
    weak.detail = format!("e^(-λT) = {growth:.0}; {}", weak.detail);
    let tail = join(&[
        "tail_probability_ratio",
        "tail_mean_ratio",
        "single_exceedance_at_least_0.9",
        "single_exceedance_not_decreasing",
    ]);
    (weak, tail)
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("stablebranch-acceptance-{}", std::process::id()));
    let cfg = configs().join("example1.toml");
    let run = |name: &str, threads: &str| {
        let out = dir.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_stablebranch"))
            .args(["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .args(["--seed", "17", "--threads", threads])
            .status()
            .expect("binary runs");
        assert!(status.success());
        (std::fs::read(out.join("runs.csv")).unwrap(), std::fs::read(out.join("summary.json")).unwrap())
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "4");
    let _ = std::fs::remove_dir_all(&dir);
    Outcome {
        pass: a == b && a == c,
        detail: format!("runs.csv {} bytes; repeat identical {}, 1 vs 4 threads identical {}", a.0.len(), a == b, a == c),
    }
}

fn report(id: usize, name: &str, budget: Duration, started: Instant, outcome: Outcome, failures: &mut Vec<usize>) {
    let elapsed = started.elapsed();
    let pass = outcome.pass && elapsed <= budget;
    if !pass {
        failures.push(id);
    }
    println!(
        "{} [{id:2}] {name} ({:.1} s, budget {} s): {}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs(),
        outcome.detail
    );
}

fn main() {
    let mut failures = Vec::new();
    let secs = Duration::from_secs;

    let t = Instant::now();
    report(1, "eigenvalue identity", secs(1), t, eigenvalue_identity(), &mut failures);
    let t = Instant::now();
    report(2, "density asymptotics", secs(30), t, density_asymptotics(), &mut failures);
    let t = Instant::now();
    report(3, "resolvent asymptotics", secs(60), t, resolvent_asymptotics(), &mut failures);
    let t = Instant::now();
    report(4, "3G stability", secs(60), t, three_g_stability(), &mut failures);
    let t = Instant::now();
    report(5, "sampler conformance", secs(60), t, sampler_conformance(), &mut failures);
    let t = Instant::now();
    report(6, "ground-state tail", secs(30), t, ground_state_tail(), &mut failures);

    let cfg = load("example1.toml");
    let t = Instant::now();
    let sim = cfg.simulator().unwrap();
    report(7, "moment oracle", secs(600), t, moment_oracle(&sim, &cfg.sim.x0), &mut failures);
    let t = Instant::now();
    report(8, "martingale", secs(600), t, martingale(&sim), &mut failures);

    let t = Instant::now();
    let (weak, tail) = limit_laws();
    report(9, "weak limit law", secs(1800), t, weak, &mut failures);
    report(10, "tail asymptotics", secs(1800), t, tail, &mut failures);

    let t = Instant::now();
    report(11, "determinism", secs(600), t, determinism(), &mut failures);

    if failures.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {failures:?}");
        std::process::exit(1);
    }
}
