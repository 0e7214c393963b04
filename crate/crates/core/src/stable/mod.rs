//! Numerics for the rotationally symmetric α-stable motion generated by
//! `-(-Δ)^{α/2} / 2`, i.e. with characteristic function `exp(-t|ξ|^α / 2)`.
//!
//! Everything here is radial: `g(r)` is the time-one density at distance `r`,
//! and the transition density, resolvent and Green function are expressed
//! through it.

pub(crate) mod inversion;
mod profile;
mod sampler;
mod three_g;

pub use profile::RadialProfile;
pub use sampler::IncrementSampler;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_half_line, Tolerance};
use inversion::{cosine_transform, planar_kernel, sine_moment, HeatSymbol, ResolventSymbol};

/// Dimension and stability index of the motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct StableParams {
    dim: usize,
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    d: usize,
    alpha: f64,
}

impl TryFrom<RawParams> for StableParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        StableParams::new(raw.d, raw.alpha)
    }
}

impl From<StableParams> for RawParams {
    fn from(p: StableParams) -> Self {
        RawParams { d: p.dim, alpha: p.alpha }
    }
}

/// Radius below which the `d = 3` density uses its Taylor expansion.
fn small_radius_d3(alpha: f64) -> f64 {
    let m2 = heat_moment(alpha, 2);
    let m6 = heat_moment(alpha, 6);
    (1e-12 * 120.0 * m2 / m6).powf(0.25)
}

/// `∫_0^∞ u^k exp(-u^α/2) du`.
fn heat_moment(alpha: f64, k: i32) -> f64 {
    let p = (k + 1) as f64 / alpha;
    2f64.powf(p) * gamma(p) / alpha
}

impl StableParams {
    pub fn new(dim: usize, alpha: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("dimension must be at least 1".into()));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidParams(format!("alpha must lie in (0, 2), got {alpha}")));
        }
        Ok(Self { dim, alpha })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn d(&self) -> f64 {
        self.dim as f64
    }

    /// Surface area `ω_d = 2 π^{d/2} / Γ(d/2)` of the unit sphere.
    pub fn omega(&self) -> f64 {
        2.0 * PI.powf(self.d() / 2.0) / gamma(self.d() / 2.0)
    }

    /// `g(0) = 2^{d/α} Γ(d/α) / (α 2^{d-1} π^{d/2} Γ(d/2))`.
    pub fn g_at_zero(&self) -> f64 {
        let (d, a) = (self.d(), self.alpha);
        2f64.powf(d / a) * gamma(d / a) / (a * 2f64.powf(d - 1.0) * PI.powf(d / 2.0) * gamma(d / 2.0))
    }

    /// `C_{d,α} = lim r^{d+α} g(r)`.
    pub fn tail_constant(&self) -> f64 {
        let (d, a) = (self.d(), self.alpha);
        a * (a * PI / 2.0).sin() * gamma((d + a) / 2.0) * gamma(a / 2.0)
            / (2f64.powf(2.0 - a) * PI.powf(1.0 + d / 2.0))
    }

    /// Jump-kernel constant `𝒜(d, α)` of the associated Dirichlet form.
    pub fn dirichlet_constant(&self) -> f64 {
        let (d, a) = (self.d(), self.alpha);
        a * 2f64.powf(d - 1.0) * gamma((d + a) / 2.0) / (PI.powf(d / 2.0) * gamma(1.0 - a / 2.0))
    }

    /// `κ_{d,α} = α Γ(d/2) Γ(α/2) / (2^{2-α} Γ((d-α)/2))`; requires `d > α`.
    pub fn kappa(&self) -> Result<f64> {
        self.require_transient()?;
        let (d, a) = (self.d(), self.alpha);
        Ok(a * gamma(d / 2.0) * gamma(a / 2.0) / (2f64.powf(2.0 - a) * gamma((d - a) / 2.0)))
    }

    /// `I_{d,α} = α ∫_0^1 u^{d-1} (1+u)^{α-d} du`.
    pub fn ball_integral(&self) -> Result<f64> {
        let (d, a) = (self.d(), self.alpha);
        let est = integrate(
            |u| u.powf(d - 1.0) * (1.0 + u).powf(a - d),
            0.0,
            1.0,
            Tolerance::new(1e-15, 1e-12),
            "I_{d,alpha}",
        )?;
        Ok(a * est.value)
    }

    fn require_transient(&self) -> Result<()> {
        if self.d() > self.alpha {
            Ok(())
        } else {
            Err(Error::NotTransient { dim: self.dim, alpha: self.alpha })
        }
    }

    /// Time-one radial density `g(r)`.
    pub fn density(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidParams(format!("radius must be finite and >= 0, got {r}")));
        }
        let sym = HeatSymbol { alpha: self.alpha };
        let tol = Tolerance::DEFAULT;
        match self.dim {
            1 => cosine_transform(&sym, r, tol),
            2 if r == 0.0 => Ok(self.g_at_zero()),
            2 => planar_kernel(&sym, r, tol),
            3 => {
                if r < small_radius_d3(self.alpha) {
                    let a = self.alpha;
                    let series = heat_moment(a, 2) - r * r * heat_moment(a, 4) / 6.0
                        + r.powi(4) * heat_moment(a, 6) / 120.0;
                    Ok(series / (2.0 * PI * PI))
                } else {
                    Ok(sine_moment(&sym, r, tol)? / (2.0 * PI * r))
                }
            }
            _ => self.subordinated_density(r),
        }
    }

    /// `g(r)` as a Gaussian scale mixture: `X = √S Z` with `S` one-sided
    /// (α/2)-stable, written through Kanter's representation of `S`. Valid
    /// for every dimension; used directly for `d >= 4`.
    pub fn subordinated_density(&self, r: f64) -> Result<f64> {
        let a = self.alpha / 2.0;
        let d = self.d();
        // S = σ (A(θ)/E)^{(1-a)/a} has Laplace transform exp(-2^{a-1} u^a).
        let sigma = 2f64.powf(a - 1.0).powf(1.0 / a);
        let expo = (1.0 - a) / a;
        let inner_tol = Tolerance::new(1e-18, 1e-10);
        let mut failure = None;
        let outer = integrate(
            |theta| {
                if failure.is_some() || theta <= 0.0 || theta >= PI {
                    return 0.0;
                }
                let zolotarev = ((a * theta).sin().powf(a) * ((1.0 - a) * theta).sin().powf(1.0 - a)
                    / theta.sin())
                .powf(1.0 / (1.0 - a));
                // integrate over v = ln E on unit panels
                let mut sum = 0.0;
                let mut v = -60.0;
                while v < 6.0 {
                    let panel = integrate(
                        |v| {
                            let e = v.exp();
                            let s = sigma * (zolotarev / e).powf(expo);
                            let gauss = (2.0 * PI * s).powf(-d / 2.0) * (-r * r / (2.0 * s)).exp();
                            (-e).exp() * e * gauss
                        },
                        v,
                        v + 1.0,
                        inner_tol,
                        "subordination inner",
                    );
                    match panel {
                        Ok(p) => sum += p.value,
                        Err(e) => {
                            failure = Some(e);
                            return 0.0;
                        }
                    }
                    v += 1.0;
                }
                sum
            },
            0.0,
            PI,
            Tolerance::new(1e-16, 1e-8),
            "subordination outer",
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(outer.value / PI)
    }

    /// `p_t(r) = t^{-d/α} g(r / t^{1/α})`.
    pub fn transition_density(&self, t: f64, r: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidParams(format!("time must be positive, got {t}")));
        }
        let s = t.powf(1.0 / self.alpha);
        Ok(t.powf(-self.d() / self.alpha) * self.density(r / s)?)
    }

    /// β-resolvent density `w_β(r) = ∫_0^∞ e^{-βt} p_t(r) dt`.
    pub fn resolvent_density(&self, beta: f64, r: f64) -> Result<f64> {
        if !(beta > 0.0) {
            return Err(Error::InvalidParams(format!("beta must be positive, got {beta}")));
        }
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidParams(format!("radius must be finite and >= 0, got {r}")));
        }
        let (d, a) = (self.d(), self.alpha);
        if r == 0.0 {
            if d < a {
                return Ok(self.resolvent_at_zero(beta));
            }
            return Err(Error::SingularArgument);
        }
        let sym = ResolventSymbol { alpha: a, beta };
        let tol = Tolerance::DEFAULT;
        match self.dim {
            1 => cosine_transform(&sym, r, tol),
            2 => planar_kernel(&sym, r, tol),
            3 => {
                if r < self.resolvent_crossover(beta) {
                    self.green_density(r)
                } else {
                    Ok(sine_moment(&sym, r, tol)? / (2.0 * PI * r))
                }
            }
            _ => {
                let mut failure = None;
                let est = integrate_half_line(
                    |t| {
                        if t <= 0.0 || failure.is_some() {
                            return 0.0;
                        }
                        match self.transition_density(t, r) {
                            Ok(p) => (-beta * t).exp() * p,
                            Err(e) => {
                                failure = Some(e);
                                0.0
                            }
                        }
                    },
                    0.0,
                    r.powf(a).min(1.0 / beta),
                    Tolerance::new(1e-14, 1e-7),
                    "resolvent time integral",
                )?;
                match failure {
                    Some(e) => Err(e),
                    None => Ok(est.value),
                }
            }
        }
    }

    /// `w_β(0) = β^{(d-α)/α} Γ((α-d)/α) g(0)` for `d < α`.
    pub fn resolvent_at_zero(&self, beta: f64) -> f64 {
        let (d, a) = (self.d(), self.alpha);
        beta.powf((d - a) / a) * gamma((a - d) / a) * self.g_at_zero()
    }

    /// Radius below which `w_β` for `d = 3` is replaced by its small-`r`
    /// asymptote (which coincides with the Green function).
    pub fn resolvent_crossover(&self, beta: f64) -> f64 {
        1e-6 * beta.powf(-1.0 / self.alpha)
    }

    /// Green function `G(r) = 2^{1-α} Γ((d-α)/2) / (π^{d/2} Γ(α/2)) r^{α-d}`.
    pub fn green_density(&self, r: f64) -> Result<f64> {
        self.require_transient()?;
        if !(r > 0.0) {
            return Err(Error::InvalidParams(format!("radius must be positive, got {r}")));
        }
        let (d, a) = (self.d(), self.alpha);
        Ok(2f64.powf(1.0 - a) * gamma((d - a) / 2.0) / (PI.powf(d / 2.0) * gamma(a / 2.0)) * r.powf(a - d))
    }

    /// `P_0(|X_t| > R) = ω_d ∫_{R/t^{1/α}}^∞ g(r) r^{d-1} dr`.
    pub fn tail_probability(&self, t: f64, radius: f64) -> Result<f64> {
        if !(t > 0.0) || !(radius >= 0.0) {
            return Err(Error::InvalidParams(format!("need t > 0 and R >= 0, got t={t}, R={radius}")));
        }
        let x = radius / t.powf(1.0 / self.alpha);
        let p = if x <= 1.0 {
            1.0 - self.ball_mass(x)?
        } else {
            self.mass_beyond(x)?
        };
        Ok(p.clamp(0.0, 1.0))
    }

    /// `ω_d ∫_0^x g(r) r^{d-1} dr`.
    pub(crate) fn ball_mass(&self, x: f64) -> Result<f64> {
        let d = self.d();
        let v = self.radial_integral(0.0, x, d)?;
        Ok(self.omega() * v)
    }

    /// `ω_d ∫_x^∞ g(r) r^{d-1} dr` for `x > 0`, closing the far tail with the
    /// power-law shape of `g`.
    pub(crate) fn mass_beyond(&self, x: f64) -> Result<f64> {
        let d = self.d();
        let r_end = 1e4 * x.max(1.0);
        let mut lo = x;
        let mut total = 0.0;
        while lo < r_end {
            let hi = (2.0 * lo).min(r_end);
            total += self.radial_integral(lo, hi, d)?;
            lo = hi;
        }
        let remainder = self.density(r_end)? * r_end.powf(d) / self.alpha;
        Ok(self.omega() * (total + remainder))
    }

    fn radial_integral(&self, lo: f64, hi: f64, d: f64) -> Result<f64> {
        let mut failure = None;
        let est = integrate(
            |r| {
                if failure.is_some() {
                    return 0.0;
                }
                match self.density(r) {
                    Ok(g) => g * r.powf(d - 1.0),
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                }
            },
            lo,
            hi,
            Tolerance::new(1e-15, 1e-9),
            "radial mass",
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(est.value),
        }
    }

    /// Sampler of increments `X_{t+dt} - X_t` for a fixed step.
    pub fn increment_sampler(&self, dt: f64) -> Result<IncrementSampler> {
        IncrementSampler::new(*self, dt)
    }
}
