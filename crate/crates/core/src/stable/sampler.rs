use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01, StandardNormal};

use super::StableParams;
use crate::error::{Error, Result};

/// Draws increments of the stable motion over a fixed step `dt`.
///
/// The increment is `√S · Z` with `Z` standard Gaussian in `R^d` and `S` a
/// one-sided (α/2)-stable variable with `E[e^{-uS}] = exp(-dt 2^{α/2-1} u^{α/2})`,
/// which gives characteristic function `exp(-dt |ξ|^α / 2)`.
#[derive(Debug, Clone, Copy)]
pub struct IncrementSampler {
    params: StableParams,
    dt: f64,
    index: f64,
    scale: f64,
}

impl IncrementSampler {
    pub fn new(params: StableParams, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParams(format!("step must be positive, got {dt}")));
        }
        let index = params.alpha() / 2.0;
        let scale = (dt * 2f64.powf(index - 1.0)).powf(1.0 / index);
        Ok(Self { params, dt, index, scale })
    }

    pub fn params(&self) -> StableParams {
        self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One-sided stable variable with Laplace transform `exp(-u^a)`
    /// (Chambers–Mallows–Stuck with skewness one).
    fn positive_stable<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let a = self.index;
        let u: f64 = Open01.sample(rng);
        let v = std::f64::consts::PI * (u - 0.5);
        let w: f64 = Exp1.sample(rng);
        let shifted = a * (v + FRAC_PI_2);
        shifted.sin() / v.cos().powf(1.0 / a) * ((v - shifted).cos() / w).powf((1.0 - a) / a)
    }

    /// Subordinator value `S` for this step.
    pub fn variance_mixer<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.scale * self.positive_stable(rng)
    }

    /// Adds one increment to `position` in place.
    pub fn displace<R: Rng + ?Sized>(&self, rng: &mut R, position: &mut [f64]) {
        let s = self.variance_mixer(rng).sqrt();
        for x in position.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *x += s * z;
        }
    }

    pub fn sample_increment<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.params.dim()];
        self.displace(rng, &mut out);
        out
    }
}
