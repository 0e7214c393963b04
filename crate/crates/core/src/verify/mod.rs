//! Statistical checks of the limit laws for the maximal displacement `L_t`
//! against simulated ensembles and spectral constants.
//!
//! Predictions are built only from spectral constants and martingale samples
//! of one batch; the statistics they are compared with come from a second,
//! independently seeded batch.

mod stats;

pub use stats::{isotonic_nonincreasing, kolmogorov_survival, ks_distance};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Ensemble, RunRecord, Simulator};

/// `E[exp(-κ^{-α} c* M)]` over the given martingale samples: the Fréchet
/// mixture law of the normalized maximum.
pub fn mixture_cdf(kappa: f64, m_samples: &[f64], c_star: f64, alpha: f64) -> Result<f64> {
    if m_samples.is_empty() {
        return Err(Error::EmptyConditioningSet);
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidParams(format!("kappa must be positive, got {kappa}")));
    }
    let rate = kappa.powf(-alpha) * c_star;
    Ok(m_samples.iter().map(|m| (-rate * m).exp()).sum::<f64>() / m_samples.len() as f64)
}

/// `R^κ(t) = (e^{-λt} κ)^{1/α}`.
pub fn weak_radius(lambda: f64, alpha: f64, t: f64, kappa: f64) -> f64 {
    ((-lambda * t).exp() * kappa).powf(1.0 / alpha)
}

/// `R(t) = (e^{-λt} a(t))^{1/α}`.
pub fn tail_radius(lambda: f64, alpha: f64, t: f64, a: f64) -> f64 {
    ((-lambda * t).exp() * a).powf(1.0 / alpha)
}

/// Constants the checks need from the spectral side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitConstants {
    pub lambda: f64,
    pub alpha: f64,
    pub c_star: f64,
    /// Ground state at the starting point.
    pub h_x0: f64,
}

impl LimitConstants {
    /// Constants of the discretized system a simulator runs, when it has
    /// spectral data (supercritical point catalyst).
    pub fn from_simulator(sim: &Simulator) -> Option<Self> {
        let model = sim.model()?;
        Some(Self {
            lambda: model.lambda,
            alpha: model.alpha,
            c_star: model.c_star,
            h_x0: model.phi(sim.settings().x0[0]),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakRow {
    pub kappa: f64,
    pub radius: f64,
    pub empirical: f64,
    pub empirical_se: f64,
    /// `empirical` after nonincreasing isotonic regression in `κ`.
    pub empirical_smoothed: f64,
    pub predicted: f64,
    pub predicted_se: f64,
    /// `|empirical - predicted|` over the combined standard error.
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakSection {
    pub t: f64,
    /// Whether both sides are restricted to runs alive at their horizon.
    pub conditioned: bool,
    pub exceed_batch: u64,
    pub mixture_batch: u64,
    pub n_exceed: usize,
    pub n_mixture: usize,
    pub rows: Vec<WeakRow>,
    /// Sup distance between the law of `Y_t` and the mixture CDF.
    pub ks_distance: Option<f64>,
    pub ks_p_value: Option<f64>,
}

impl WeakSection {
    pub fn max_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z_score).fold(0.0, f64::max)
    }

    /// Root mean square of `empirical - predicted` over the grid.
    pub fn rms_difference(&self) -> f64 {
        let n = self.rows.len().max(1) as f64;
        (self.rows.iter().map(|r| (r.empirical - r.predicted).powi(2)).sum::<f64>() / n).sqrt()
    }

    /// Root mean square of the combined standard errors over the grid.
    pub fn rms_noise(&self) -> f64 {
        let n = self.rows.len().max(1) as f64;
        (self.rows.iter().map(|r| r.empirical_se.powi(2) + r.predicted_se.powi(2)).sum::<f64>() / n).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub value: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSection {
    pub t: f64,
    pub a: f64,
    pub radius: f64,
    pub n_runs: usize,
    pub exceed_events: usize,
    /// `a(t) P̂(L_t > R(t)) / (c* h(x0))`
    pub probability_ratio: Ratio,
    /// `a(t) Ê[Z_t^{R(t)}] / (c* h(x0))`
    pub mean_ratio: Ratio,
    /// `P̂(L_t > R(t)) / Ê[Z_t^{R(t)}]`
    pub probability_over_mean: f64,
    /// `P̂(Z_t^{R(t)} = 1 | L_t > R(t))`
    pub single_exceedance: Ratio,
}

/// Report over a κ-grid and a set of horizons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitLawReport {
    pub constants: LimitConstants,
    pub weak: Vec<WeakSection>,
    pub tail: Vec<TailSection>,
}

fn checkpoint_index(record: &RunRecord, t: f64) -> Option<usize> {
    record.checkpoints.iter().position(|c| (c.t - t).abs() <= 1e-9 * t.max(1.0))
}

fn binomial(k: usize, n: usize) -> (f64, f64) {
    let p = k as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Compares `P̂(L_t > R^κ(t))` from `exceed` with `E[1 - exp(-κ^{-1} c* M)]`
/// built from the final martingale values of `mixture`. With `conditioned`
/// both sides use only runs alive at their horizon, and the distance between
/// the law of `Y_t = e^{λt/α} L_t` and the mixture CDF is added.
pub fn weak_limit_check(
    exceed: &Ensemble,
    mixture: &Ensemble,
    constants: &LimitConstants,
    kappa_grid: &[f64],
    t: f64,
    conditioned: bool,
) -> Result<WeakSection> {
    if exceed.base_seed == mixture.base_seed {
        return Err(Error::InvalidParams("prediction and measurement must come from different seed batches".into()));
    }
    let LimitConstants { lambda, alpha, c_star, .. } = *constants;
    let keep = |r: &&RunRecord| !r.censored && (!conditioned || r.survived == Some(true));
    let mut l_values = Vec::new();
    for r in exceed.records.iter().filter(keep) {
        let k = checkpoint_index(r, t).ok_or_else(|| Error::InvalidParams(format!("t = {t} is not a recorded checkpoint")))?;
        l_values.push(r.checkpoints[k].l);
    }
    let m_values: Vec<f64> = mixture
        .records
        .iter()
        .filter(keep)
        .map(|r| r.m_final.ok_or_else(|| Error::InvalidParams("mixture batch has no martingale values".into())))
        .collect::<Result<_>>()?;
    if l_values.is_empty() || m_values.is_empty() {
        return Err(if conditioned { Error::EmptyConditioningSet } else { Error::EmptySample });
    }
    let n = l_values.len();
    let mut rows = Vec::with_capacity(kappa_grid.len());
    for &kappa in kappa_grid {
        let radius = weak_radius(lambda, alpha, t, kappa);
        let hits = l_values.iter().filter(|&&l| l > radius).count();
        let (empirical, empirical_se) = binomial(hits, n);
        let terms: Vec<f64> = m_values.iter().map(|m| -(-c_star * m / kappa).exp_m1()).collect();
        let pred = crate::sim::MeanEstimate::from_samples(&terms)?;
        let se = empirical_se.hypot(pred.std_err);
        let diff = (empirical - pred.mean).abs();
        rows.push(WeakRow {
            kappa,
            radius,
            empirical,
            empirical_se,
            empirical_smoothed: empirical,
            predicted: pred.mean,
            predicted_se: pred.std_err,
            z_score: if se > 0.0 { diff / se } else if diff == 0.0 { 0.0 } else { f64::INFINITY },
        });
    }
    // smooth in increasing κ order
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[a].kappa.total_cmp(&rows[b].kappa));
    let sorted: Vec<f64> = order.iter().map(|&i| rows[i].empirical).collect();
    for (&i, v) in order.iter().zip(isotonic_nonincreasing(&sorted, &vec![1.0; sorted.len()])) {
        rows[i].empirical_smoothed = v;
    }
    let (ks_distance, ks_p_value) = if conditioned {
        let y: Vec<f64> = l_values.iter().map(|l| (lambda * t / alpha).exp() * l).collect();
        let d = ks_distance(&y, |x| if x <= 0.0 { 0.0 } else { mixture_cdf(x, &m_values, c_star, alpha).unwrap_or(0.0) })?;
        (Some(d), Some(kolmogorov_survival(d, n)))
    } else {
        (None, None)
    };
    Ok(WeakSection {
        t,
        conditioned,
        exceed_batch: exceed.base_seed,
        mixture_batch: mixture.base_seed,
        n_exceed: n,
        n_mixture: m_values.len(),
        rows,
        ks_distance,
        ks_p_value,
    })
}

/// Tail asymptotics at `t` with `a = a(t)`. The exceedance counts stored in
/// the runs must have been taken at the same radius `R(t)`.
pub fn tail_check(ensemble: &Ensemble, constants: &LimitConstants, a: f64, t: f64) -> Result<TailSection> {
    let LimitConstants { lambda, alpha, c_star, h_x0 } = *constants;
    let radius = tail_radius(lambda, alpha, t, a);
    let mut hits = 0usize;
    let mut single = 0usize;
    let mut counts = Vec::new();
    for r in ensemble.complete() {
        let k = checkpoint_index(r, t).ok_or_else(|| Error::InvalidParams(format!("t = {t} is not a recorded checkpoint")))?;
        let c = r.checkpoints[k];
        let z = c.z_exceed.ok_or_else(|| Error::InvalidParams("runs carry no exceedance counts".into()))?;
        counts.push(z as f64);
        if c.l > radius {
            hits += 1;
            if z == 1 {
                single += 1;
            }
        }
    }
    if counts.is_empty() {
        return Err(Error::EmptySample);
    }
    if hits == 0 {
        return Err(Error::ZeroEventCount(format!("L_t > R(t) at t = {t}")));
    }
    let n = counts.len();
    let scale = a / (c_star * h_x0);
    let (p, p_se) = binomial(hits, n);
    let mean = crate::sim::MeanEstimate::from_samples(&counts)?;
    let (s, s_se) = binomial(single, hits);
    Ok(TailSection {
        t,
        a,
        radius,
        n_runs: n,
        exceed_events: hits,
        probability_ratio: Ratio { value: p * scale, std_err: p_se * scale },
        mean_ratio: Ratio { value: mean.mean * scale, std_err: mean.std_err * scale },
        probability_over_mean: p / mean.mean,
        single_exceedance: Ratio { value: s, std_err: s_se },
    })
}

/// Pass/fail outcome of one check on a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl LimitLawReport {
    /// Checks at the first (`T`) and last (`2T`) horizon: weak-limit rows
    /// within 3σ at the last horizon and an RMS discrepancy that does not
    /// grow beyond three noise units; tail ratios within 3σ of one, and a
    /// single-exceedance frequency of at least 0.9 that does not drop
    /// between the horizons beyond 3σ.
    pub fn flags(&self) -> Vec<Flag> {
        let mut flags = Vec::new();
        let mut flag = |name: &str, pass: bool, detail: String| {
            flags.push(Flag { name: name.to_string(), pass, detail })
        };
        let weak: Vec<&WeakSection> = self.weak.iter().filter(|w| !w.conditioned).collect();
        if let (Some(first), Some(last)) = (weak.first(), weak.last()) {
            flag("weak_within_3sigma", last.max_z() <= 3.0, format!("t = {}, max z = {:.3}", last.t, last.max_z()));
            let allowed = first.rms_difference() + 3.0 * first.rms_noise().hypot(last.rms_noise());
            flag(
                "weak_discrepancy_not_growing",
                last.rms_difference() <= allowed,
                format!(
                    "rms difference {:.4} at t = {} vs {:.4} at t = {} (allowed {:.4})",
                    first.rms_difference(),
                    first.t,
                    last.rms_difference(),
                    last.t,
                    allowed
                ),
            );
        }
        if let (Some(first), Some(last)) = (self.tail.first(), self.tail.last()) {
            for (name, r) in [("tail_probability_ratio", last.probability_ratio), ("tail_mean_ratio", last.mean_ratio)] {
                let z = (r.value - 1.0).abs() / r.std_err;
                flag(name, z <= 3.0, format!("t = {}, ratio {:.4} ± {:.4} (z = {:.2})", last.t, r.value, r.std_err, z));
            }
            let (s1, s2) = (first.single_exceedance, last.single_exceedance);
            flag("single_exceedance_at_least_0.9", s2.value >= 0.9, format!("t = {}, frequency {:.4}", last.t, s2.value));
            flag(
                "single_exceedance_not_decreasing",
                s2.value + 3.0 * s1.std_err.hypot(s2.std_err) >= s1.value,
                format!("{:.4} at t = {} -> {:.4} at t = {}", s1.value, first.t, s2.value, last.t),
            );
        }
        flags
    }

    /// Unconditioned and conditioned weak sections plus a tail section at
    /// every horizon, with `a(t) = t^a_exponent`.
    pub fn build(
        exceed: &Ensemble,
        mixture: &Ensemble,
        constants: LimitConstants,
        kappa_grid: &[f64],
        horizons: &[f64],
        a_exponent: f64,
    ) -> Result<Self> {
        let mut weak = Vec::new();
        let mut tail = Vec::new();
        for &t in horizons {
            weak.push(weak_limit_check(exceed, mixture, &constants, kappa_grid, t, false)?);
            weak.push(weak_limit_check(exceed, mixture, &constants, kappa_grid, t, true)?);
            tail.push(tail_check(exceed, &constants, t.powf(a_exponent), t)?);
        }
        Ok(Self { constants, weak, tail })
    }

    /// Flat table: `statistic,section,t,key,value,half_width`, half widths
    /// at three standard errors.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "statistic,section,t,key,value,half_width")?;
        for w in &self.weak {
            let section = if w.conditioned { "conditioned" } else { "unconditioned" };
            for r in &w.rows {
                writeln!(out, "empirical_exceedance,{section},{},{},{},{}", w.t, r.kappa, r.empirical, 3.0 * r.empirical_se)?;
                writeln!(out, "mixture_prediction,{section},{},{},{},{}", w.t, r.kappa, r.predicted, 3.0 * r.predicted_se)?;
            }
            if let Some(d) = w.ks_distance {
                writeln!(out, "ks_distance,{section},{},,{d},", w.t)?;
            }
        }
        for s in &self.tail {
            let rows = [
                ("probability_ratio", s.probability_ratio),
                ("mean_ratio", s.mean_ratio),
                ("single_exceedance", s.single_exceedance),
            ];
            for (name, r) in rows {
                writeln!(out, "{name},tail,{},{},{},{}", s.t, s.radius, r.value, 3.0 * r.std_err)?;
            }
            writeln!(out, "probability_over_mean,tail,{},{},{},", s.t, s.radius, s.probability_over_mean)?;
        }
        Ok(())
    }
}
