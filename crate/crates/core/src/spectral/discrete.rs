//! Exact spectral data of the time-discretized point-catalyst system that
//! the simulator runs.
//!
//! On the `dt`-grid a particle moves by a stable increment and then branches
//! for a time `dt` at rate `c/(2ε)` while inside the window `W = (-ε, ε)`.
//! The expected population then evolves by `T f = P((1 + a) f)` with
//! `a = (e^{c(m-1)dt/(2ε)} - 1) 1_W`, and `T φ = ρ φ` reduces to the integral
//! equation `φ(x) = ∫_W K_ρ(x - y) a(y) φ(y) dy` with
//! `K_ρ = Σ_{k≥1} ρ^{-k} p_{k dt}`. It is solved by Nyström on Gauss–Legendre
//! nodes in `W`. With `∫ (1 + a) φ² = 1`, `ρ^{-n} Σ φ(X_n)` is an exact
//! martingale of the discrete system and `∫_{|y|>R} φ ~ c R^{-α}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{decreasing_root, lambda_point_closed_form, CatalystFamily, CatalystSpec};
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, integrate_half_line, Tolerance};
use crate::stable::inversion::{cosine_transform, Symbol};

const NODES: usize = 32;
const TABLE_NODES: usize = 800;
const TABLE_REACH: f64 = 1e4;

/// `Σ_{k≥1} ρ^{-k} e^{-k dt u^α/2} = q / (ρ - q)` with `q = e^{-dt u^α/2}`.
/// Its poles lie at `arg u > π/(2α)`, so the heat ray is admissible.
struct StepKernel {
    alpha: f64,
    dt: f64,
    rho: f64,
}

impl Symbol for StepKernel {
    fn at(&self, u: Complex64) -> Complex64 {
        let (y, th) = u.to_polar();
        let q = (-0.5 * self.dt * Complex64::from_polar(y.powf(self.alpha), self.alpha * th)).exp();
        q / (self.rho - q)
    }
    fn ray_angle(&self) -> f64 {
        PI / (4.0 * self.alpha)
    }
    fn scale(&self) -> f64 {
        (2.0 * self.rho.ln() / self.dt).powf(1.0 / self.alpha)
    }
}

/// `K̂_ρ(u) · Σ_j c_j cos(u y_j)`: the transform of `φ` outside the window.
struct ProfileSymbol<'a> {
    kernel: &'a StepKernel,
    nodes: &'a [f64],
    coef: &'a [f64],
}

impl Symbol for ProfileSymbol<'_> {
    fn at(&self, u: Complex64) -> Complex64 {
        let f: Complex64 = self.nodes.iter().zip(self.coef).map(|(&y, &c)| c * (u * y).cos()).sum();
        self.kernel.at(u) * f
    }
    fn ray_angle(&self) -> f64 {
        self.kernel.ray_angle()
    }
    fn scale(&self) -> f64 {
        self.kernel.scale()
    }
}

/// Spectral data of the discretized point-catalyst system.
#[derive(Debug, Clone, Serialize)]
pub struct DiscretePointModel {
    pub alpha: f64,
    pub epsilon: f64,
    pub dt: f64,
    /// One-step growth factor of the mean population on the window.
    pub boost: f64,
    /// `T φ = ρ φ`.
    pub rho: f64,
    /// `-ln ρ / dt`, the counterpart of `λ`.
    pub lambda: f64,
    /// `∫ a φ`.
    pub nu_mass: f64,
    /// `lim R^α ∫_{|y|>R} φ`, the counterpart of `c*`.
    pub c_star: f64,
    #[serde(skip)]
    nodes: Vec<f64>,
    /// Positive nodes and mirrored coefficient sums, for `Σ_j c_j cos(u y_j)`.
    #[serde(skip)]
    half_nodes: Vec<f64>,
    #[serde(skip)]
    half_coef: Vec<f64>,
    #[serde(skip)]
    window_phi: Vec<f64>,
    #[serde(skip)]
    table: Vec<f64>,
    #[serde(skip)]
    s_step: f64,
    #[serde(skip)]
    tail_coef: f64,
}

impl DiscretePointModel {
    pub fn solve(spec: &CatalystSpec, epsilon: f64, dt: f64) -> Result<Self> {
        let CatalystFamily::Point { c } = spec.family() else {
            return Err(Error::DomainError("discrete eigen-data needs the point catalyst".into()));
        };
        if !(epsilon > 0.0) || !(dt > 0.0) {
            return Err(Error::InvalidParams(format!("need epsilon > 0 and dt > 0, got {epsilon}, {dt}")));
        }
        let alpha = spec.params().alpha();
        let m = spec.offspring().mean();
        let lambda_ref = lambda_point_closed_form(alpha, c, m)?;
        let boost = (c * (m - 1.0) * dt / (2.0 * epsilon)).exp_m1();

        let (x, w) = gauss_legendre(NODES);
        let nodes: Vec<f64> = x.iter().map(|x| epsilon * x).collect();
        let weights: Vec<f64> = w.iter().map(|w| epsilon * w).collect();

        let top = |beta: f64| -> Result<(f64, Vec<f64>)> {
            let kernel = StepKernel { alpha, dt, rho: (beta * dt).exp() };
            let mut b = vec![0.0; NODES * NODES];
            // the nodes are symmetric, so (i, j) and (N-1-j, N-1-i) share a distance
            for i in 0..NODES {
                for j in i..NODES {
                    if i + j > NODES - 1 {
                        continue;
                    }
                    let k = cosine_transform(&kernel, (nodes[i] - nodes[j]).abs(), Tolerance::new(0.0, 1e-11))?;
                    let v = boost * k * (weights[i] * weights[j]).sqrt();
                    let (i2, j2) = (NODES - 1 - j, NODES - 1 - i);
                    for (p, q) in [(i, j), (j, i), (i2, j2), (j2, i2)] {
                        b[p * NODES + q] = v;
                    }
                }
            }
            Ok(perron(&b, NODES))
        };

        let mut failure = None;
        let ln_beta = decreasing_root(
            |ln_beta| match top(ln_beta.exp()) {
                Ok((mu, _)) => mu.ln(),
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            (-lambda_ref).ln() - 2.0,
            (-lambda_ref).ln(),
            1e-11,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let beta = ln_beta?.exp();
        let rho = (beta * dt).exp();
        let (_, v) = top(beta)?;
        let mut window_phi: Vec<f64> = v.iter().zip(&weights).map(|(v, w)| v / w.sqrt()).collect();

        let kernel = StepKernel { alpha, dt, rho };
        let coef_of = |phi: &[f64]| -> Vec<f64> { phi.iter().zip(&weights).map(|(p, w)| boost * w * p).collect() };
        // ∫_ℝ φ² by Plancherel, plus the window term of ∫ a φ²
        let coef = coef_of(&window_phi);
        let sq = integrate_half_line(
            |u| {
                let q = (-0.5 * dt * u.powf(alpha)).exp();
                let f: f64 = nodes.iter().zip(&coef).map(|(y, c)| c * (u * y).cos()).sum();
                (q / (rho - q) * f).powi(2)
            },
            0.0,
            kernel.scale(),
            Tolerance::new(0.0, 1e-11),
            "discrete ground state normalization",
        )?
        .value
            / PI;
        let window: f64 = window_phi.iter().zip(&weights).map(|(p, w)| boost * w * p * p).sum();
        let norm = (sq + window).sqrt();
        for p in &mut window_phi {
            *p /= norm;
        }
        let coef = coef_of(&window_phi);
        let nu_mass: f64 = coef.iter().sum();
        let tail_constant = spec.params().tail_constant();
        let tail_coef = nu_mass * tail_constant * dt * rho / (rho - 1.0).powi(2);
        let c_star = 2.0 * tail_coef / alpha;

        let half = NODES / 2;
        let half_nodes = nodes[half..].to_vec();
        let half_coef = (0..half).map(|k| coef[half + k] + coef[half - 1 - k]).collect();
        let mut model = Self {
            alpha,
            epsilon,
            dt,
            boost,
            rho,
            lambda: -beta,
            nu_mass,
            c_star,
            nodes,
            half_nodes,
            half_coef,
            window_phi,
            table: Vec::new(),
            s_step: (TABLE_REACH / epsilon).asinh() / (TABLE_NODES - 1) as f64,
            tail_coef,
        };
        let table = (0..TABLE_NODES)
            .map(|k| model.phi_exact(epsilon * (k as f64 * model.s_step).sinh()).map(f64::ln))
            .collect::<Result<Vec<_>>>()?;
        model.table = table;
        Ok(model)
    }

    fn kernel(&self) -> StepKernel {
        StepKernel { alpha: self.alpha, dt: self.dt, rho: self.rho }
    }

    /// `φ(x)` by direct Fourier inversion.
    pub fn phi_exact(&self, x: f64) -> Result<f64> {
        let kernel = self.kernel();
        let sym = ProfileSymbol { kernel: &kernel, nodes: &self.half_nodes, coef: &self.half_coef };
        cosine_transform(&sym, x.abs(), Tolerance::new(0.0, 1e-10))
    }

    /// `φ(x)` from the precomputed table (cubic in `asinh(|x|/ε)` on `ln φ`),
    /// with the power-law tail beyond the table.
    pub fn phi(&self, x: f64) -> f64 {
        let r = x.abs();
        let reach = self.epsilon * ((TABLE_NODES - 1) as f64 * self.s_step).sinh();
        if r >= reach {
            let last = self.table[TABLE_NODES - 1].exp();
            return last * (reach / r).powf(1.0 + self.alpha);
        }
        let s = (r / self.epsilon).asinh() / self.s_step;
        let k = (s.floor() as usize).clamp(1, TABLE_NODES - 3);
        let t = s - k as f64;
        let [y0, y1, y2, y3] = [
            self.table[k - 1],
            self.table[k],
            self.table[k + 1],
            self.table[k + 2],
        ];
        // cubic Lagrange through nodes k-1..k+2, local coordinate t ∈ [-1, 2]
        let l0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let l1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let l2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let l3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        (l0 * y0 + l1 * y1 + l2 * y2 + l3 * y3).exp()
    }

    /// `φ` at the Nyström nodes inside the window.
    pub fn window_values(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.window_phi.iter().copied())
    }

    /// Leading coefficient of `φ(x) ~ A |x|^{-1-α}`.
    pub fn tail_coefficient(&self) -> f64 {
        self.tail_coef
    }
}

/// Top eigenvalue and eigenvector of a symmetric matrix with positive
/// entries, by power iteration.
fn perron(b: &[f64], n: usize) -> (f64, Vec<f64>) {
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut mu = 0.0;
    for _ in 0..10_000 {
        let mut next = vec![0.0; n];
        for i in 0..n {
            next[i] = (0..n).map(|j| b[i * n + j] * v[j]).sum();
        }
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut next {
            *x /= norm;
        }
        let delta = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        let converged = (norm - mu).abs() <= 1e-15 * norm && delta < 1e-14;
        mu = norm;
        if converged {
            break;
        }
    }
    (mu, v)
}
