use std::collections::HashMap;
use std::sync::Mutex;

use super::StableParams;
use crate::error::Result;

/// The radial density `g` of a fixed law, optionally memoized by radius.
///
/// Cached values are the exact evaluations keyed by the bit pattern of the
/// radius, so results do not depend on whether caching is enabled.
#[derive(Debug)]
pub struct RadialProfile {
    params: StableParams,
    cache: Option<Mutex<HashMap<u64, f64>>>,
}

impl RadialProfile {
    pub fn new(params: StableParams) -> Self {
        Self { params, cache: None }
    }

    pub fn cached(params: StableParams) -> Self {
        Self { params, cache: Some(Mutex::new(HashMap::new())) }
    }

    pub fn params(&self) -> StableParams {
        self.params
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        let Some(cache) = &self.cache else {
            return self.params.density(r);
        };
        let key = r.to_bits();
        if let Some(v) = cache.lock().expect("profile cache poisoned").get(&key) {
            return Ok(*v);
        }
        let v = self.params.density(r)?;
        cache.lock().expect("profile cache poisoned").insert(key, v);
        Ok(v)
    }

    /// `ω_d ∫_0^∞ g(r) r^{d-1} dr`, which must equal one.
    pub fn total_mass(&self) -> Result<f64> {
        Ok(self.params.ball_mass(1.0)? + self.params.mass_beyond(1.0)?)
    }

    pub fn cache_len(&self) -> usize {
        self.cache
            .as_ref()
            .map(|c| c.lock().expect("profile cache poisoned").len())
            .unwrap_or(0)
    }
}
