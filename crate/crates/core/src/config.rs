//! Experiment configuration: one TOML file per experiment.
//!
//! ```toml
//! [stable]
//! d = 1
//! alpha = 1.5
//!
//! [catalyst]
//! family = "point"
//! c = 1.0
//! epsilon = 0.05
//!
//! [offspring]
//! p0 = 0.0
//! p2 = 1.0
//!
//! [sim]
//! x0 = [0.0]
//! dt = 0.01
//! horizon = 2.0
//! checkpoints = [1.0, 2.0]
//! n_runs = 1000
//! population_cap = 1000000
//! base_seed = 1
//!
//! [verify]
//! kappa_grid = [0.5, 1.0, 2.0]
//! a_of_t = "t^2"
//! horizons = [1.0, 2.0]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sim::{SimSettings, Simulator};
use crate::spectral::{lambda_point_closed_form, CatalystFamily, CatalystSpec, OffspringDist};
use crate::stable::StableParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StableSection {
    pub d: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Point,
    Sphere,
    Ball,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalystSection {
    pub family: FamilyName,
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Mollification half-width for point and sphere catalysts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffspringSection {
    pub p0: f64,
    pub p2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub x0: Vec<f64>,
    pub dt: f64,
    pub horizon: f64,
    pub checkpoints: Vec<f64>,
    pub n_runs: usize,
    #[serde(default = "default_cap")]
    pub population_cap: usize,
    #[serde(default)]
    pub base_seed: u64,
}

fn default_cap() -> usize {
    1_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub kappa_grid: Vec<f64>,
    #[serde(default = "default_a_of_t")]
    pub a_of_t: String,
    pub horizons: Vec<f64>,
    /// Seed of the batch whose martingale values feed the mixture
    /// prediction; defaults to `base_seed + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture_seed: Option<u64>,
}

fn default_a_of_t() -> String {
    "t^2".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub stable: StableSection,
    pub catalyst: CatalystSection,
    pub offspring: OffspringSection,
    pub sim: SimSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
}

/// Parses `a(t)` given as `t^p` (or `t`) into the exponent `p > 0`.
pub fn parse_a_of_t(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let p = match s.as_str() {
        "t" => 1.0,
        _ => s
            .strip_prefix("t^")
            .and_then(|e| e.parse::<f64>().ok())
            .ok_or_else(|| Error::Config(format!("a_of_t must look like \"t^p\", got {text:?}")))?,
    };
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Config(format!("a_of_t exponent must be positive, got {p}")));
    }
    Ok(p)
}

fn on_grid(t: f64, dt: f64) -> bool {
    let n = (t / dt).round();
    t > 0.0 && (n * dt - t).abs() <= 1e-9 * t.max(1.0)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn params(&self) -> Result<StableParams> {
        StableParams::new(self.stable.d, self.stable.alpha)
    }

    pub fn family(&self) -> Result<CatalystFamily> {
        let c = self.catalyst.c;
        let radius = || {
            self.catalyst
                .r
                .ok_or_else(|| Error::Config(format!("catalyst family {:?} needs a radius r", self.catalyst.family)))
        };
        Ok(match self.catalyst.family {
            FamilyName::Point => CatalystFamily::Point { c },
            FamilyName::Sphere => CatalystFamily::Sphere { c, r: radius()? },
            FamilyName::Ball => CatalystFamily::Ball { c, r: radius()? },
        })
    }

    pub fn spec(&self) -> Result<CatalystSpec> {
        let offspring = OffspringDist::new(self.offspring.p0, self.offspring.p2)?;
        CatalystSpec::new(self.params()?, self.family()?, offspring)
    }

    /// Mollification width: the configured one, or `0.05 |λ|^{-1/α}` for a
    /// supercritical point catalyst and `0.05 r` for a sphere.
    pub fn epsilon(&self) -> Result<f64> {
        if let Some(e) = self.catalyst.epsilon {
            return Ok(e);
        }
        let m = 2.0 * self.offspring.p2;
        Ok(match self.family()? {
            CatalystFamily::Point { c } if m > 1.0 => {
                0.05 * lambda_point_closed_form(self.stable.alpha, c, m)?.abs().powf(-1.0 / self.stable.alpha)
            }
            CatalystFamily::Point { c } => 0.05 * c.powf(-1.0 / (self.stable.alpha - 1.0)),
            CatalystFamily::Sphere { r, .. } => 0.05 * r,
            CatalystFamily::Ball { .. } => 0.05,
        })
    }

    /// Checkpoints with the horizon appended when it is not already last.
    pub fn checkpoints(&self) -> Vec<f64> {
        let mut cps = self.sim.checkpoints.clone();
        if cps.last().is_none_or(|&t| (t - self.sim.horizon).abs() > 1e-9 * t.max(1.0)) {
            cps.push(self.sim.horizon);
        }
        cps
    }

    pub fn a_exponent(&self) -> Result<f64> {
        self.verify.as_ref().map_or(Ok(2.0), |v| parse_a_of_t(&v.a_of_t))
    }

    pub fn mixture_seed(&self) -> u64 {
        self.verify
            .as_ref()
            .and_then(|v| v.mixture_seed)
            .unwrap_or(self.sim.base_seed.wrapping_add(1))
    }

    pub fn sim_settings(&self) -> Result<SimSettings> {
        Ok(SimSettings {
            x0: self.sim.x0.clone(),
            dt: self.sim.dt,
            checkpoints: self.checkpoints(),
            population_cap: self.sim.population_cap,
            epsilon: self.epsilon()?,
            a_exponent: self.a_exponent()?,
        })
    }

    /// Builds the simulator; this solves the discretized spectral problem
    /// for a supercritical point catalyst.
    pub fn simulator(&self) -> Result<Simulator> {
        Ok(Simulator::new(self.spec()?, self.sim_settings()?)?.with_config_hash(self.hash()))
    }

    /// Cross-field checks beyond what the types enforce.
    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        self.spec()?;
        let sim = &self.sim;
        if sim.x0.len() != self.stable.d {
            return cfg(format!("sim.x0 has {} coordinates, expected d = {}", sim.x0.len(), self.stable.d));
        }
        if sim.x0.iter().any(|x| !x.is_finite()) {
            return cfg("sim.x0 must be finite".into());
        }
        if !(sim.dt > 0.0) || !sim.dt.is_finite() {
            return cfg(format!("sim.dt must be positive, got {}", sim.dt));
        }
        if !on_grid(sim.horizon, sim.dt) {
            return cfg(format!("sim.horizon = {} is not a positive multiple of dt", sim.horizon));
        }
        if sim.checkpoints.is_empty() {
            return cfg("sim.checkpoints must not be empty".into());
        }
        for pair in sim.checkpoints.windows(2) {
            if !(pair[0] < pair[1]) {
                return cfg("sim.checkpoints must be strictly increasing".into());
            }
        }
        for &t in &sim.checkpoints {
            if !on_grid(t, sim.dt) || t > sim.horizon * (1.0 + 1e-12) {
                return cfg(format!("checkpoint {t} must be a multiple of dt in (0, horizon]"));
            }
        }
        if sim.n_runs == 0 {
            return cfg("sim.n_runs must be at least 1".into());
        }
        if sim.population_cap == 0 {
            return cfg("sim.population_cap must be positive".into());
        }
        if let Some(e) = self.catalyst.epsilon {
            if !(e > 0.0) || !e.is_finite() {
                return cfg(format!("catalyst.epsilon must be positive, got {e}"));
            }
        }
        if let Some(v) = &self.verify {
            if v.kappa_grid.is_empty() || v.kappa_grid.iter().any(|k| !(*k > 0.0) || !k.is_finite()) {
                return cfg("verify.kappa_grid must be a non-empty list of positive numbers".into());
            }
            parse_a_of_t(&v.a_of_t)?;
            let cps = self.checkpoints();
            for &t in &v.horizons {
                if !cps.iter().any(|&c| (c - t).abs() <= 1e-9 * t.max(1.0)) {
                    return cfg(format!("verify horizon {t} is not a checkpoint"));
                }
            }
            if v.mixture_seed == Some(sim.base_seed) {
                return cfg("verify.mixture_seed must differ from sim.base_seed".into());
            }
        }
        Ok(())
    }
}
