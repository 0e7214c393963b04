//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`; the layout is given in each
//! doc comment. Errors surface as JS exceptions carrying the message.

use stablebranch::sim::{SimSettings, Simulator};
use stablebranch::spectral::{
    lambda_point_closed_form, CatalystFamily, CatalystSpec, OffspringDist, PointGroundState,
};
use stablebranch::verify::mixture_cdf;
use stablebranch::StableParams;
use wasm_bindgen::prelude::*;

fn js(e: stablebranch::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn log_grid(r_min: f64, r_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    if !(r_min > 0.0) || !(r_max > r_min) || n < 2 {
        return Err(JsError::new("need 0 < r_min < r_max and at least two points"));
    }
    let (a, b) = (r_min.ln(), r_max.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

/// Rows `[r, g(r), C r^{-d-α}]` on a log grid; with `beta > 0` the
/// resolvent `w_β(r)` and `C r^{-d-α}/β²` replace the density columns.
/// Failed points carry `NaN`.
#[wasm_bindgen]
pub fn radial_curve(d: usize, alpha: f64, beta: f64, r_min: f64, r_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    let p = StableParams::new(d, alpha).map_err(js)?;
    let c = p.tail_constant();
    let mut out = Vec::with_capacity(3 * n);
    for r in log_grid(r_min, r_max, n)? {
        let tail = c * r.powf(-(d as f64) - alpha);
        let (v, tail) = if beta > 0.0 {
            (p.resolvent_density(beta, r), tail / (beta * beta))
        } else {
            (p.density(r), tail)
        };
        out.extend([r, v.unwrap_or(f64::NAN), tail]);
    }
    Ok(out)
}

/// `[λ_closed, λ_numeric, h(0), c*, c_⋆]` for the point catalyst on the line,
/// followed by rows `[κ, P(Y ≤ κ)]` of the Fréchet law with `M = 1`.
#[wasm_bindgen]
pub fn point_spectrum(alpha: f64, c: f64, m: f64, kappa_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    let closed = lambda_point_closed_form(alpha, c, m).map_err(js)?;
    let h = PointGroundState::from_parts(alpha, c, m).map_err(js)?;
    let mut out = vec![closed, h.lambda(), h.h0(), h.c_star(), h.c_star_base()];
    for i in 1..=n.max(1) {
        let kappa = kappa_max * i as f64 / n.max(1) as f64;
        out.extend([kappa, mixture_cdf(kappa, &[1.0], h.c_star(), alpha).map_err(js)?]);
    }
    Ok(out)
}

/// One replica of the point-catalyst system (mollification width `epsilon`),
/// observed every `every` steps: rows `[t, Z_t, L_t]`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn sample_path(
    alpha: f64,
    c: f64,
    m: f64,
    epsilon: f64,
    dt: f64,
    steps: usize,
    every: usize,
    cap: usize,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    let every = every.max(1);
    let params = StableParams::new(1, alpha).map_err(js)?;
    let offspring = OffspringDist::with_mean(m).map_err(js)?;
    let spec = CatalystSpec::new(params, CatalystFamily::Point { c }, offspring).map_err(js)?;
    let checkpoints: Vec<f64> = (1..=steps / every).map(|k| (k * every) as f64 * dt).collect();
    let settings = SimSettings { x0: vec![0.0], dt, checkpoints, population_cap: cap.max(1), epsilon, a_exponent: 2.0 };
    let sim = Simulator::with_model(spec, settings, None).map_err(js)?;
    let record = sim.run(seed, 0);
    let mut out = vec![0.0, 1.0, 0.0];
    for cp in &record.checkpoints {
        out.extend([cp.t, cp.z as f64, cp.l]);
    }
    Ok(out)
}
