use serde::Serialize;

use super::{c_star_base, lambda_point_closed_form, CatalystFamily, CatalystSpec};
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_half_line, Tolerance};
use crate::stable::StableParams;

/// Ground state of the point catalyst `ν = c(m-1) δ_0` in `d = 1`:
/// `h(x) = c(m-1) h(0) w_{-λ}(|x|)`, normalized in `L²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointGroundState {
    #[serde(skip)]
    params: StableParams,
    strength: f64,
    lambda: f64,
    h0: f64,
}

impl PointGroundState {
    pub fn new(spec: &CatalystSpec) -> Result<Self> {
        let CatalystFamily::Point { c } = spec.family() else {
            return Err(Error::DomainError(format!(
                "ground state is only available for the point catalyst, got {}",
                spec.family().name()
            )));
        };
        Self::from_parts(spec.params().alpha(), c, spec.offspring().mean())
    }

    pub fn from_parts(alpha: f64, c: f64, m: f64) -> Result<Self> {
        let lambda = lambda_point_closed_form(alpha, c, m)?;
        let params = StableParams::new(1, alpha)?;
        let strength = c * (m - 1.0);
        let beta = -lambda;
        // ∫ w_β(|x|)² dx = (1/π) ∫_0^∞ (β + u^α/2)^{-2} du
        let scale = (2.0 * beta).powf(1.0 / alpha);
        let sq = integrate_half_line(
            |u| (beta + 0.5 * u.powf(alpha)).powi(-2),
            0.0,
            scale,
            Tolerance::new(0.0, 1e-12),
            "ground state normalization",
        )?
        .value
            / std::f64::consts::PI;
        let h0 = 1.0 / (strength * sq.sqrt());
        Ok(Self { params, strength, lambda, h0 })
    }

    pub fn params(&self) -> StableParams {
        self.params
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    /// `h(x) = c(m-1) h(0) w_{-λ}(|x|)`.
    pub fn value(&self, x: f64) -> Result<f64> {
        Ok(self.strength * self.h0 * self.params.resolvent_density(-self.lambda, x.abs())?)
    }

    /// `∫ h dν = c(m-1) h(0)`.
    pub fn nu_mass(&self) -> f64 {
        self.strength * self.h0
    }

    pub fn c_star_base(&self) -> f64 {
        c_star_base(self.params, self.lambda)
    }

    /// `c* = c_⋆ ∫ h dν`.
    pub fn c_star(&self) -> f64 {
        self.c_star_base() * self.nu_mass()
    }

    /// `∫_{|y| > R} h(y) dy`, closing the far tail with `h ~ r^{-1-α}`.
    pub fn tail_mass(&self, radius: f64) -> Result<f64> {
        let r_end = 1e4 * radius.max(1.0);
        let tol = Tolerance::new(0.0, 1e-10);
        let mut lo = radius;
        let mut total = 0.0;
        let mut failure = None;
        while lo < r_end {
            let hi = (2.0 * lo.max(0.5)).min(r_end);
            total += integrate(
                |x| match self.value(x) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                lo,
                hi,
                tol,
                "ground state tail",
            )?
            .value;
            lo = hi;
        }
        if let Some(e) = failure {
            return Err(e);
        }
        let remainder = self.value(r_end)? * r_end / self.params.alpha();
        Ok(2.0 * (total + remainder))
    }
}
