use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::StableParams;
use crate::error::{Error, Result};

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
}

fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, d: usize, radius: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..d).map(|_| radius * (2.0 * rng.random::<f64>() - 1.0)).collect();
        if x.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
            return x;
        }
    }
}

impl StableParams {
    /// `w(x,y) w(y,z) / [w(x,z) (w(x,y) + w(y,z))]` for the β-resolvent
    /// density `w`.
    pub fn three_g_ratio(&self, beta: f64, x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
        let wxy = self.resolvent_density(beta, distance(x, y))?;
        let wyz = self.resolvent_density(beta, distance(y, z))?;
        let wxz = self.resolvent_density(beta, distance(x, z))?;
        Ok(wxy * wyz / (wxz * (wxy + wyz)))
    }

    /// Largest [`StableParams::three_g_ratio`] over `n` triples drawn
    /// uniformly from the ball of radius `radius` with pairwise distances at
    /// least `min_gap`. Triple `i` uses its own stream of `seed`, so the
    /// first `n` triples are shared between calls with different `n`.
    pub fn three_g_max(&self, beta: f64, n: usize, radius: f64, min_gap: f64, seed: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let d = self.dim();
        let ratios: Vec<Result<f64>> = (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                let (x, y, z) = loop {
                    let x = uniform_in_ball(&mut rng, d, radius);
                    let y = uniform_in_ball(&mut rng, d, radius);
                    let z = uniform_in_ball(&mut rng, d, radius);
                    if distance(&x, &y) >= min_gap && distance(&y, &z) >= min_gap && distance(&x, &z) >= min_gap {
                        break (x, y, z);
                    }
                };
                self.three_g_ratio(beta, &x, &y, &z)
            })
            .collect();
        let mut max: f64 = 0.0;
        for r in ratios {
            max = max.max(r?);
        }
        Ok(max)
    }
}
