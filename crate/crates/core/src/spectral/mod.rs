//! Principal eigenvalue, ground state and limit constants for the three
//! catalyst families: a point mass in `d = 1`, a uniform sphere surface and
//! a uniform ball.
//!
//! The branching rate is `μ` and the potential is `ν = (m - 1) μ`, where `m`
//! is the mean offspring number. `λ < 0` is the bottom of the spectrum of
//! `(-Δ)^{α/2}/2 - ν`.

mod discrete;
mod point;

pub use discrete::DiscretePointModel;
pub use point::PointGroundState;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::stable::StableParams;

/// Binary offspring law: `p0` no children, `p2` two children.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOffspring", into = "RawOffspring")]
pub struct OffspringDist {
    p0: f64,
    p2: f64,
}

#[derive(Serialize, Deserialize)]
struct RawOffspring {
    p0: f64,
    p2: f64,
}

impl TryFrom<RawOffspring> for OffspringDist {
    type Error = Error;
    fn try_from(raw: RawOffspring) -> Result<Self> {
        OffspringDist::new(raw.p0, raw.p2)
    }
}

impl From<OffspringDist> for RawOffspring {
    fn from(o: OffspringDist) -> Self {
        RawOffspring { p0: o.p0, p2: o.p2 }
    }
}

impl OffspringDist {
    pub fn new(p0: f64, p2: f64) -> Result<Self> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(p0) || !prob(p2) || ((p0 + p2) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "offspring law needs p0, p2 in [0, 1] with p0 + p2 = 1, got p0={p0}, p2={p2}"
            )));
        }
        Ok(Self { p0, p2 })
    }

    /// Binary law with mean `m ∈ [0, 2]`.
    pub fn with_mean(m: f64) -> Result<Self> {
        Self::new(1.0 - m / 2.0, m / 2.0)
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    /// `Q = Σ n p_n`.
    pub fn mean(&self) -> f64 {
        2.0 * self.p2
    }

    /// `R = Σ n(n-1) p_n`.
    pub fn factorial_moment(&self) -> f64 {
        2.0 * self.p2
    }
}

/// Shape and intensity of the branching rate `μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CatalystFamily {
    /// `c δ_0` in `d = 1`.
    Point { c: f64 },
    /// `c` times surface measure on the sphere of radius `r`.
    Sphere { c: f64, r: f64 },
    /// `c 1_{B(r)}(x) dx`.
    Ball { c: f64, r: f64 },
}

impl CatalystFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Point { .. } => "point",
            Self::Sphere { .. } => "sphere",
            Self::Ball { .. } => "ball",
        }
    }

    pub fn intensity(&self) -> f64 {
        match *self {
            Self::Point { c } | Self::Sphere { c, .. } | Self::Ball { c, .. } => c,
        }
    }

    pub fn radius(&self) -> Option<f64> {
        match *self {
            Self::Point { .. } => None,
            Self::Sphere { r, .. } | Self::Ball { r, .. } => Some(r),
        }
    }
}

/// Catalyst together with the motion and offspring law it acts on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalystSpec {
    params: StableParams,
    family: CatalystFamily,
    offspring: OffspringDist,
}

impl CatalystSpec {
    pub fn new(params: StableParams, family: CatalystFamily, offspring: OffspringDist) -> Result<Self> {
        let (d, a) = (params.dim(), params.alpha());
        let c = family.intensity();
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParams(format!("catalyst intensity must be positive, got {c}")));
        }
        if let Some(r) = family.radius() {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::InvalidParams(format!("catalyst radius must be positive, got {r}")));
            }
        }
        match family {
            CatalystFamily::Point { .. } => {
                if d != 1 || !(a > 1.0 && a < 2.0) {
                    return Err(Error::DomainError(format!(
                        "point catalyst needs d = 1 and 1 < alpha < 2, got d={d}, alpha={a}"
                    )));
                }
            }
            CatalystFamily::Sphere { .. } | CatalystFamily::Ball { .. } => {
                if !(a > 1.0 && a < 2.0) || (d as f64) <= a {
                    return Err(Error::DomainError(format!(
                        "{} catalyst needs 1 < alpha < 2 and d > alpha, got d={d}, alpha={a}",
                        family.name()
                    )));
                }
            }
        }
        Ok(Self { params, family, offspring })
    }

    pub fn params(&self) -> StableParams {
        self.params
    }

    pub fn family(&self) -> CatalystFamily {
        self.family
    }

    pub fn offspring(&self) -> OffspringDist {
        self.offspring
    }

    /// `c (m - 1)`, the intensity of `ν`.
    pub fn potential_intensity(&self) -> f64 {
        self.family.intensity() * (self.offspring.mean() - 1.0)
    }
}

fn check_point_domain(alpha: f64, c: f64, m: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha < 2.0) || !(c > 0.0) {
        return Err(Error::DomainError(format!("need 1 < alpha < 2 and c > 0, got alpha={alpha}, c={c}")));
    }
    if !(m > 1.0) {
        return Err(Error::SubcriticalBranching(m));
    }
    Ok(())
}

/// `λ = -{c(m-1) 2^{1/α} / (α sin(π/α))}^{α/(α-1)}` for the point catalyst.
pub fn lambda_point_closed_form(alpha: f64, c: f64, m: f64) -> Result<f64> {
    check_point_domain(alpha, c, m)?;
    let base = c * (m - 1.0) * 2f64.powf(1.0 / alpha) / (alpha * (PI / alpha).sin());
    Ok(-base.powf(alpha / (alpha - 1.0)))
}

/// Solves `c(m-1) w_β(0) = 1` for `β > 0` and returns `-β`.
pub fn lambda_point_numeric(alpha: f64, c: f64, m: f64) -> Result<f64> {
    check_point_domain(alpha, c, m)?;
    let params = StableParams::new(1, alpha)?;
    let strength = c * (m - 1.0);
    // w_β(0) is decreasing in β, so the log-residual is decreasing in ln β
    let residual = |ln_beta: f64| (strength * params.resolvent_at_zero(ln_beta.exp())).ln();
    let beta = decreasing_root(residual, 1e-8f64.ln(), 1e8f64.ln(), 1e-12)?.exp();
    Ok(-beta)
}

/// Root of a decreasing function by a bracketed secant iteration (Illinois
/// variant) with bisection as the fallback whenever a secant step does not
/// shrink the bracket enough. The bracket is first expanded geometrically
/// until it changes sign. Stops when the bracket is narrower than
/// `rel_tol * max(|x|, 1)`.
pub(crate) fn decreasing_root<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    let mut expansions = 0;
    while !(f_lo > 0.0 && f_hi < 0.0) {
        if expansions > 60 || (!f_lo.is_finite() && !f_hi.is_finite()) {
            return Err(Error::RootNotBracketed { lo, hi });
        }
        let width = hi - lo;
        if !(f_lo > 0.0) {
            lo -= width;
            f_lo = f(lo);
        }
        if !(f_hi < 0.0) {
            hi += width;
            f_hi = f(hi);
        }
        expansions += 1;
    }
    // which end was kept on the previous step: -1 low, 1 high, 0 none
    let mut kept = 0;
    for _ in 0..400 {
        let width = hi - lo;
        if width <= rel_tol * (0.5 * (lo + hi)).abs().max(1.0) {
            return Ok(if f_lo.abs() < f_hi.abs() { lo } else { hi });
        }
        let mut x = lo - f_lo * width / (f_hi - f_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::RootNotBracketed { lo, hi });
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx > 0.0 {
            lo = x;
            f_lo = fx;
            if kept == 1 {
                f_hi *= 0.5;
            }
            kept = 1;
        } else {
            hi = x;
            f_hi = fx;
            if kept == -1 {
                f_lo *= 0.5;
            }
            kept = -1;
        }
        if hi - lo > 0.5 * width {
            // slow progress: force a bisection
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if !fm.is_finite() {
                return Err(Error::RootNotBracketed { lo, hi });
            }
            if fm > 0.0 {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
                f_hi = fm;
            }
            kept = 0;
        }
    }
    Err(Error::RootNotBracketed { lo, hi })
}

/// Radius beyond which a sphere catalyst of intensity `c` has `λ < 0`:
/// `r* = {√π Γ((d+α-2)/2) Γ(α/2) / (c(m-1) Γ((d-α)/2) Γ((α-1)/2))}^{1/(α-1)}`.
pub fn sphere_critical_radius(d: usize, alpha: f64, c: f64, m: f64) -> Result<f64> {
    let df = d as f64;
    if !(alpha > 1.0 && alpha < 2.0) || df <= alpha || !(c > 0.0) {
        return Err(Error::DomainError(format!(
            "sphere threshold needs 1 < alpha < 2, d > alpha, c > 0; got d={d}, alpha={alpha}, c={c}"
        )));
    }
    if !(m > 1.0) {
        return Err(Error::SubcriticalBranching(m));
    }
    let num = PI.sqrt() * gamma((df + alpha - 2.0) / 2.0) * gamma(alpha / 2.0);
    let den = c * (m - 1.0) * gamma((df - alpha) / 2.0) * gamma((alpha - 1.0) / 2.0);
    Ok((num / den).powf(1.0 / (alpha - 1.0)))
}

/// Sign of `λ` as far as it can be decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaSign {
    Negative,
    NonNegative,
    Indeterminate,
}

/// Outcome of the ball test together with the quantities it used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallClassification {
    pub sign: LambdaSign,
    /// `(κ/β)^{1/α}`: at or below this radius `λ >= 0`.
    pub lower: f64,
    /// `(κ/(β I))^{1/α}`: beyond this radius `λ < 0`.
    pub upper: f64,
    pub kappa: f64,
    pub integral: f64,
}

/// Classifies `λ(β 1_{B(r)})` for `β = c(m-1)`.
pub fn ball_lambda_classification(d: usize, alpha: f64, beta: f64, r: f64) -> Result<BallClassification> {
    if !(alpha > 1.0 && alpha < 2.0) || (d as f64) <= alpha || !(beta > 0.0) || !(r > 0.0) {
        return Err(Error::DomainError(format!(
            "ball test needs 1 < alpha < 2, d > alpha, beta > 0, r > 0; got d={d}, alpha={alpha}, beta={beta}, r={r}"
        )));
    }
    let params = StableParams::new(d, alpha)?;
    let kappa = params.kappa()?;
    let integral = params.ball_integral()?;
    let lower = (kappa / beta).powf(1.0 / alpha);
    // I <= 1 keeps the band well formed; guard anyway
    let upper = (kappa / (beta * integral)).powf(1.0 / alpha).max(lower);
    let sign = if r > upper {
        LambdaSign::Negative
    } else if r <= lower {
        LambdaSign::NonNegative
    } else {
        LambdaSign::Indeterminate
    };
    Ok(BallClassification { sign, lower, upper, kappa, integral })
}

/// Spectral summary for a catalyst.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub family: String,
    pub parameters: serde_json::Value,
    /// Principal eigenvalue, when it is computable for the family.
    pub lambda: Option<f64>,
    pub h0: Option<f64>,
    pub c_star_base: Option<f64>,
    pub c_star: Option<f64>,
    pub sign: LambdaSign,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sphere_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ball: Option<BallClassification>,
    /// Second bottom of the spectrum; never computed.
    pub lambda2_gap: Option<f64>,
}

impl SpectralData {
    /// Computes what is available for the catalyst. Point catalysts need
    /// `m > 1`; the other families report a sign classification.
    pub fn compute(spec: &CatalystSpec) -> Result<Self> {
        let params = spec.params();
        let m = spec.offspring().mean();
        let parameters = serde_json::json!({
            "d": params.dim(),
            "alpha": params.alpha(),
            "catalyst": spec.family(),
            "p0": spec.offspring().p0(),
            "p2": spec.offspring().p2(),
        });
        let mut data = SpectralData {
            family: spec.family().name().to_string(),
            parameters,
            lambda: None,
            h0: None,
            c_star_base: None,
            c_star: None,
            sign: LambdaSign::Indeterminate,
            sphere_threshold: None,
            ball: None,
            lambda2_gap: None,
        };
        match spec.family() {
            CatalystFamily::Point { .. } => {
                let h = PointGroundState::new(spec)?;
                data.lambda = Some(h.lambda());
                data.h0 = Some(h.h0());
                data.c_star_base = Some(h.c_star_base());
                data.c_star = Some(h.c_star());
                data.sign = LambdaSign::Negative;
            }
            CatalystFamily::Sphere { c, r } => {
                if m <= 1.0 {
                    data.sign = LambdaSign::NonNegative;
                } else {
                    let threshold = sphere_critical_radius(params.dim(), params.alpha(), c, m)?;
                    data.sphere_threshold = Some(threshold);
                    data.sign = if r > threshold { LambdaSign::Negative } else { LambdaSign::NonNegative };
                }
            }
            CatalystFamily::Ball { r, .. } => {
                if m <= 1.0 {
                    data.sign = LambdaSign::NonNegative;
                } else {
                    let class = ball_lambda_classification(params.dim(), params.alpha(), spec.potential_intensity(), r)?;
                    data.sign = class.sign;
                    data.ball = Some(class);
                }
            }
        }
        Ok(data)
    }
}

/// `c_⋆ = C_{d,α} ω_d / (α λ²)`.
pub fn c_star_base(params: StableParams, lambda: f64) -> f64 {
    params.tail_constant() * params.omega() / (params.alpha() * lambda * lambda)
}
