//! Monte Carlo engine for the branching stable particle system.
//!
//! Time runs on a `dt`-grid. In each step every particle first moves by an
//! independent stable increment and then sits at its new position for the
//! duration `dt`, accruing the additive functional at the local branching
//! rate. Splitting inside the step is exact: when the accrued amount reaches
//! the particle's Exp(1) clock it dies (probability `p0`) or is replaced by
//! two children at the same position, each with a fresh clock, and the
//! children keep accruing for what is left of the step. With this rule the
//! mean population obeys `E[Z_n(f)] = E[exp(Σ_k (m-1) V(X_k) dt) f(X_n)]`
//! exactly, where `V` is the branching rate.

mod oracle;
mod record;

pub use oracle::{feynman_kac_estimate, second_moment_estimate, MeanEstimate, TestFunction};
pub use record::{CheckpointSummary, Ensemble, EnsembleSummary};

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{CatalystFamily, CatalystSpec, DiscretePointModel};
use crate::stable::IncrementSampler;

/// Branching rate `V(x)` realizing the catalyst on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchingRate {
    family: CatalystFamily,
    epsilon: f64,
}

impl BranchingRate {
    /// `epsilon` is the mollification half-width used by the point and
    /// sphere catalysts (ignored for the ball).
    pub fn new(family: CatalystFamily, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParams(format!("mollification width must be positive, got {epsilon}")));
        }
        Ok(Self { family, epsilon })
    }

    pub fn family(&self) -> CatalystFamily {
        self.family
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Rate at `x`: `c/(2ε)` on `|x| < ε` (point), `c/(2ε)` on the shell
    /// `||x| - r| < ε` (sphere, total mass ≈ `c ω_d r^{d-1}`), `c` on `|x| < r`
    /// (ball).
    pub fn at(&self, x: &[f64]) -> f64 {
        let norm = euclidean(x);
        match self.family {
            CatalystFamily::Point { c } => {
                if norm < self.epsilon {
                    c / (2.0 * self.epsilon)
                } else {
                    0.0
                }
            }
            CatalystFamily::Sphere { c, r } => {
                if (norm - r).abs() < self.epsilon {
                    c / (2.0 * self.epsilon)
                } else {
                    0.0
                }
            }
            CatalystFamily::Ball { c, r } => {
                if norm < r {
                    c
                } else {
                    0.0
                }
            }
        }
    }

    /// Increment of the additive functional `A^μ` over one step from
    /// `x_old` to `x_new` (the rate is evaluated at the new position).
    pub fn additive_increment(&self, _x_old: &[f64], x_new: &[f64], dt: f64) -> f64 {
        self.at(x_new) * dt
    }
}

pub(crate) fn euclidean(x: &[f64]) -> f64 {
    if x.len() == 1 {
        x[0].abs()
    } else {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    /// Exp(1) threshold for the accrued additive functional.
    pub clock_budget: f64,
    pub accumulated_a: f64,
}

impl Particle {
    pub fn new<R: Rng + ?Sized>(position: Vec<f64>, rng: &mut R) -> Self {
        Self { position, clock_budget: Exp1.sample(rng), accumulated_a: 0.0 }
    }

    pub fn norm(&self) -> f64 {
        euclidean(&self.position)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub time: f64,
    pub steps: usize,
    pub particles: Vec<Particle>,
    /// Branching events `(time, event)`, recorded only when enabled.
    pub event_log: Option<Vec<(f64, Event)>>,
}

impl SystemState {
    pub fn single<R: Rng + ?Sized>(x0: &[f64], rng: &mut R) -> Self {
        Self { time: 0.0, steps: 0, particles: vec![Particle::new(x0.to_vec(), rng)], event_log: None }
    }

    pub fn population(&self) -> usize {
        self.particles.len()
    }

    /// Largest particle norm, 0 when extinct.
    pub fn max_norm(&self) -> f64 {
        self.particles.iter().map(Particle::norm).fold(0.0, f64::max)
    }
}

/// Branching event inside a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Event {
    Death,
    Split,
}

/// Advances `state` by one step. Fails with `PopulationOverflow` once the
/// population exceeds `cap`; the state is then left mid-step.
pub fn step<R: Rng + ?Sized>(
    state: &mut SystemState,
    sampler: &IncrementSampler,
    rate: &BranchingRate,
    p0: f64,
    cap: usize,
    rng: &mut R,
) -> Result<()> {
    advance(state, sampler.dt(), |rng, x| sampler.displace(rng, x), rate, p0, cap, rng)
}

/// [`step`] with an arbitrary motion (used to pin particles in tests).
pub(crate) fn advance<R: Rng + ?Sized, M: FnMut(&mut R, &mut [f64])>(
    state: &mut SystemState,
    dt: f64,
    mut motion: M,
    rate: &BranchingRate,
    p0: f64,
    cap: usize,
    rng: &mut R,
) -> Result<()> {
    let mut next = Vec::with_capacity(state.particles.len());
    let mut pending: Vec<(Particle, f64)> = Vec::new();
    for mut p in std::mem::take(&mut state.particles) {
        motion(rng, &mut p.position);
        let v = rate.at(&p.position);
        if v == 0.0 {
            next.push(p);
            continue;
        }
        pending.push((p, dt));
        while let Some((mut q, remaining)) = pending.pop() {
            let need = q.clock_budget - q.accumulated_a;
            if v * remaining < need {
                q.accumulated_a += v * remaining;
                next.push(q);
                continue;
            }
            let left = remaining - need / v;
            let death = rng.random::<f64>() < p0;
            if let Some(log) = state.event_log.as_mut() {
                log.push((state.time + dt - left, if death { Event::Death } else { Event::Split }));
            }
            if death {
                continue;
            }
            let child = Particle::new(q.position.clone(), rng);
            pending.push((child, left));
            let child = Particle::new(q.position, rng);
            pending.push((child, left));
            if next.len() + pending.len() > cap {
                state.particles = next;
                return Err(Error::PopulationOverflow { cap, time: state.time + dt });
            }
        }
    }
    if next.len() > cap {
        state.particles = next;
        return Err(Error::PopulationOverflow { cap, time: state.time + dt });
    }
    state.particles = next;
    state.steps += 1;
    state.time = state.steps as f64 * dt;
    Ok(())
}

/// Run-level settings shared by every replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    pub x0: Vec<f64>,
    pub dt: f64,
    /// Recording times; the last one is the horizon.
    pub checkpoints: Vec<f64>,
    pub population_cap: usize,
    /// Mollification half-width for point and sphere catalysts.
    pub epsilon: f64,
    /// Exponent `p` of `a(t) = t^p` in the exceedance radius `R(t)`.
    pub a_exponent: f64,
}

/// Observables at one checkpoint. `m`, `y` and `z_exceed` need the growth
/// rate and ground state of the simulated system and are absent otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: f64,
    pub z: u64,
    pub l: f64,
    pub m: Option<f64>,
    pub y: Option<f64>,
    pub z_exceed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: u64,
    pub seed: u64,
    pub config_hash: String,
    pub checkpoints: Vec<Checkpoint>,
    /// `Z_T > 0`; `None` when the run was censored.
    pub survived: Option<bool>,
    pub m_final: Option<f64>,
    pub censored: bool,
}

/// A configured system ready to produce replicas.
#[derive(Debug, Clone)]
pub struct Simulator {
    spec: CatalystSpec,
    settings: SimSettings,
    rate: BranchingRate,
    sampler: IncrementSampler,
    steps: Vec<usize>,
    model: Option<Arc<DiscretePointModel>>,
    config_hash: String,
}

impl Simulator {
    /// Builds the simulator; for the point catalyst this also solves for the
    /// spectral data of the discretized system.
    pub fn new(spec: CatalystSpec, settings: SimSettings) -> Result<Self> {
        let model = match spec.family() {
            CatalystFamily::Point { .. } if spec.offspring().mean() > 1.0 => {
                Some(Arc::new(DiscretePointModel::solve(&spec, settings.epsilon, settings.dt)?))
            }
            _ => None,
        };
        Self::with_model(spec, settings, model)
    }

    /// As [`Simulator::new`] with precomputed spectral data (which must match
    /// `epsilon` and `dt`).
    pub fn with_model(spec: CatalystSpec, settings: SimSettings, model: Option<Arc<DiscretePointModel>>) -> Result<Self> {
        let d = spec.params().dim();
        if settings.x0.len() != d {
            return Err(Error::InvalidParams(format!("x0 has {} coordinates, expected {d}", settings.x0.len())));
        }
        if settings.checkpoints.is_empty() {
            return Err(Error::InvalidParams("at least one checkpoint is required".into()));
        }
        if settings.population_cap == 0 {
            return Err(Error::InvalidParams("population cap must be positive".into()));
        }
        let sampler = IncrementSampler::new(spec.params(), settings.dt)?;
        let rate = BranchingRate::new(spec.family(), settings.epsilon)?;
        let mut steps = Vec::with_capacity(settings.checkpoints.len());
        for &t in &settings.checkpoints {
            let n = (t / settings.dt).round();
            if !(t > 0.0) || (n * settings.dt - t).abs() > 1e-9 * t.max(1.0) {
                return Err(Error::InvalidParams(format!(
                    "checkpoint {t} is not a positive multiple of dt = {}",
                    settings.dt
                )));
            }
            if steps.last().is_some_and(|&last| n as usize <= last) {
                return Err(Error::InvalidParams("checkpoints must be strictly increasing".into()));
            }
            steps.push(n as usize);
        }
        if let Some(m) = &model {
            if m.epsilon != settings.epsilon || m.dt != settings.dt {
                return Err(Error::InvalidParams("spectral data was computed for a different epsilon or dt".into()));
            }
        }
        Ok(Self { spec, settings, rate, sampler, steps, model, config_hash: String::new() })
    }

    /// Tags every record with the hash of the originating configuration.
    pub fn with_config_hash(mut self, hash: impl Into<String>) -> Self {
        self.config_hash = hash.into();
        self
    }

    pub fn spec(&self) -> &CatalystSpec {
        &self.spec
    }

    pub fn settings(&self) -> &SimSettings {
        &self.settings
    }

    pub fn rate(&self) -> &BranchingRate {
        &self.rate
    }

    pub fn sampler(&self) -> &IncrementSampler {
        &self.sampler
    }

    pub fn model(&self) -> Option<&Arc<DiscretePointModel>> {
        self.model.as_ref()
    }

    pub fn horizon(&self) -> f64 {
        *self.settings.checkpoints.last().expect("validated non-empty")
    }

    /// Growth exponent of the simulated system (`λ` of the discretized model).
    pub fn lambda(&self) -> Option<f64> {
        self.model.as_ref().map(|m| m.lambda)
    }

    /// `R(t) = (e^{-λt} a(t))^{1/α}` with `a(t) = t^p`.
    pub fn exceedance_radius(&self, t: f64) -> Option<f64> {
        let alpha = self.spec.params().alpha();
        self.lambda()
            .map(|l| ((-l * t).exp() * t.powf(self.settings.a_exponent)).powf(1.0 / alpha))
    }

    /// Deterministic generator for replica `index` of batch `base_seed`.
    pub fn replica_rng(base_seed: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
        rng.set_stream(index);
        rng
    }

    /// Evolves one replica, calling `observe(k, state)` at checkpoint `k`.
    /// Returns `false` if the run was censored by the population cap.
    pub fn evolve<F: FnMut(usize, &SystemState)>(&self, rng: &mut ChaCha8Rng, mut observe: F) -> bool {
        let mut state = SystemState::single(&self.settings.x0, rng);
        let p0 = self.spec.offspring().p0();
        for (k, &n) in self.steps.iter().enumerate() {
            while state.steps < n {
                if state.particles.is_empty() {
                    // extinction is absorbing
                    state.steps = n;
                    state.time = n as f64 * self.settings.dt;
                    break;
                }
                if step(&mut state, &self.sampler, &self.rate, p0, self.settings.population_cap, rng).is_err() {
                    return false;
                }
            }
            observe(k, &state);
        }
        true
    }

    fn observe(&self, k: usize, state: &SystemState) -> Checkpoint {
        let alpha = self.spec.params().alpha();
        let t = self.settings.checkpoints[k];
        let l = state.max_norm();
        let (m, y, z_exceed) = match &self.model {
            Some(model) => {
                let sum: f64 = state.particles.iter().map(|p| model.phi(p.position[0])).sum();
                let m = (-(state.steps as f64) * model.rho.ln()).exp() * sum;
                let y = (model.lambda * t / alpha).exp() * l;
                let radius = self.exceedance_radius(t).expect("model present");
                let count = state.particles.iter().filter(|p| p.norm() > radius).count() as u64;
                (Some(m), Some(y), Some(count))
            }
            None => (None, None, None),
        };
        Checkpoint { t, z: state.population() as u64, l, m, y, z_exceed }
    }

    /// Replica `index` of batch `base_seed`.
    pub fn run(&self, base_seed: u64, index: u64) -> RunRecord {
        let mut rng = Self::replica_rng(base_seed, index);
        let mut checkpoints = Vec::with_capacity(self.steps.len());
        let complete = self.evolve(&mut rng, |k, state| checkpoints.push(self.observe(k, state)));
        let last = checkpoints.last().filter(|_| complete);
        RunRecord {
            run_id: index,
            seed: base_seed,
            config_hash: self.config_hash.clone(),
            survived: last.map(|c| c.z > 0),
            m_final: last.and_then(|c| c.m),
            checkpoints,
            censored: !complete,
        }
    }

    /// `n_runs` replicas on the current rayon pool. The result does not
    /// depend on the number of threads.
    pub fn ensemble(&self, n_runs: usize, base_seed: u64) -> Result<Ensemble> {
        if n_runs == 0 {
            return Err(Error::InvalidParams("n_runs must be at least 1".into()));
        }
        let records: Vec<RunRecord> = (0..n_runs as u64).into_par_iter().map(|i| self.run(base_seed, i)).collect();
        Ok(Ensemble::new(base_seed, records))
    }

    /// Per-replica values of the population functionals `Z_t(f)` for every
    /// checkpoint and every `f`, as `[replica][checkpoint][f]`. Censored
    /// replicas are returned as `None`.
    pub fn functionals(&self, fs: &[TestFunction], n_runs: usize, base_seed: u64) -> Vec<Option<Vec<Vec<f64>>>> {
        (0..n_runs as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = Self::replica_rng(base_seed, i);
                let mut out = Vec::with_capacity(self.steps.len());
                let complete = self.evolve(&mut rng, |_, state| {
                    out.push(
                        fs.iter()
                            .map(|f| state.particles.iter().map(|p| f.eval(&p.position)).sum())
                            .collect(),
                    );
                });
                complete.then_some(out)
            })
            .collect()
    }
}
