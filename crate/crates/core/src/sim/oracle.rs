//! Single-path Feynman–Kac estimators of the first and second moments of
//! `Z_t(f)` for the discretized system, independent of the branching code.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{euclidean, Simulator};
use crate::error::{Error, Result};

/// Test functions `f` for `Z_t(f) = Σ_k f(X_t^{(k)})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TestFunction {
    One,
    /// `1{|y| <= R}`
    Within(f64),
    /// `1{|y| > R}`
    Beyond(f64),
}

impl TestFunction {
    pub fn eval(&self, y: &[f64]) -> f64 {
        match *self {
            Self::One => 1.0,
            Self::Within(r) => f64::from(euclidean(y) <= r),
            Self::Beyond(r) => f64::from(euclidean(y) > r),
        }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptySample);
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Ok(Self { mean, std_err: (var / n).sqrt(), n: xs.len() })
    }

    /// `|a - b|` in units of the combined standard error.
    pub fn z_score(&self, other: &MeanEstimate) -> f64 {
        let se = self.std_err.hypot(other.std_err);
        if se == 0.0 {
            if self.mean == other.mean { 0.0 } else { f64::INFINITY }
        } else {
            (self.mean - other.mean).abs() / se
        }
    }
}

fn steps_for(sim: &Simulator, t: f64) -> Result<usize> {
    let dt = sim.settings().dt;
    let n = (t / dt).round();
    if !(t > 0.0) || (n * dt - t).abs() > 1e-9 * t.max(1.0) {
        return Err(Error::InvalidParams(format!("t = {t} is not a positive multiple of dt = {dt}")));
    }
    Ok(n as usize)
}

/// Weight `exp(Σ (m-1) V(X_k) dt) f(X_n)` of one path of `n` steps from `x`.
fn weighted_path<R: Rng + ?Sized>(sim: &Simulator, x: &[f64], n: usize, f: TestFunction, rng: &mut R) -> f64 {
    let growth = sim.spec().offspring().mean() - 1.0;
    let dt = sim.settings().dt;
    let mut pos = x.to_vec();
    let mut a = 0.0;
    for _ in 0..n {
        sim.sampler().displace(rng, &mut pos);
        a += growth * sim.rate().at(&pos) * dt;
    }
    a.exp() * f.eval(&pos)
}

/// Average of `exp(A_t^{(m-1)μ}) f(X_t)` over `n_paths` single-particle paths.
pub fn feynman_kac_estimate(
    sim: &Simulator,
    x0: &[f64],
    t: f64,
    f: TestFunction,
    n_paths: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    let n = steps_for(sim, t)?;
    let samples: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| weighted_path(sim, x0, n, f, &mut Simulator::replica_rng(seed, i)))
        .collect();
    MeanEstimate::from_samples(&samples)
}

/// Unbiased path estimate of `E[Z_t(f)²]` from the two-term identity
///
/// ```text
/// E[Z_n(f)²] = E[e^{A_n} f(X_n)²]
///            + Σ_k E[e^{A_{k-1}} R V(X_k) e^{b_k dt}(e^{b_k dt} - 1)/b_k · u_{n-k}(X_k)²]
/// ```
///
/// with `b_k = (m-1) V(X_k)`, `R = Σ n(n-1) p_n` and `u_j(y) = E[Z_j(f)]` from
/// one particle at `y`. The sum is sampled by picking one catalyst step
/// uniformly, and `u²` by the product of two independent inner paths.
pub fn second_moment_estimate(
    sim: &Simulator,
    x0: &[f64],
    t: f64,
    f: TestFunction,
    n_paths: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    let n = steps_for(sim, t)?;
    let off = sim.spec().offspring();
    let growth = off.mean() - 1.0;
    let factorial = off.factorial_moment();
    let dt = sim.settings().dt;
    let samples: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = Simulator::replica_rng(seed, i);
            let mut pos = x0.to_vec();
            let mut a: f64 = 0.0;
            // (step, position, e^{A_{k-1}}, rate) at every step spent on the catalyst
            let mut visits = Vec::new();
            for k in 1..=n {
                sim.sampler().displace(&mut rng, &mut pos);
                let v = sim.rate().at(&pos);
                if v > 0.0 {
                    visits.push((k, pos.clone(), a.exp(), v));
                }
                a += growth * v * dt;
            }
            let fx = f.eval(&pos);
            let mut value = a.exp() * fx * fx;
            if !visits.is_empty() {
                let pick = rng.random_range(0..visits.len());
                let (k, y, pre, v) = &visits[pick];
                let b = growth * v;
                let pair = if b == 0.0 {
                    factorial * v * dt
                } else {
                    factorial * v * (b * dt).exp() * (b * dt).exp_m1() / b
                };
                let u1 = weighted_path(sim, y, n - k, f, &mut rng);
                let u2 = weighted_path(sim, y, n - k, f, &mut rng);
                value += visits.len() as f64 * pre * pair * u1 * u2;
            }
            value
        })
        .collect();
    MeanEstimate::from_samples(&samples)
}
