//! Adaptive Gauss–Kronrod quadrature and Gauss–Legendre rules.
//!
//! The adaptive driver bisects the interval with the largest error estimate
//! until the global estimate satisfies `error <= max(abs, rel * |value|)`.
//! Half-lines are covered by geometrically growing panels, which suits the
//! exponentially damped integrands produced by the rotated-contour Fourier
//! inversions in [`crate::stable`].

use crate::error::{Error, Result};

/// Absolute floor and relative target for an integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance { abs: 1e-14, rel: 1e-8 };

    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;
const ROUNDOFF: f64 = 100.0 * f64::EPSILON;

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    magnitude: f64,
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Segment { a, b, value, error, magnitude: resabs }
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
    context: &'static str,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let first = kronrod15(&mut f, a, b);
    let mut segments = vec![first];
    let mut value = first.value;
    let mut error = first.error;
    let mut magnitude = first.magnitude;
    // once the estimate is dominated by rounding in ∫|f|, refinement cannot help
    let floor = |m: f64| ROUNDOFF * m;
    while error > tol.target(value) && error > floor(magnitude) {
        if segments.len() >= MAX_INTERVALS {
            break;
        }
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let seg = segments.swap_remove(idx);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a.min(seg.b) || mid >= seg.a.max(seg.b) {
            // interval cannot be split further in floating point
            segments.push(seg);
            break;
        }
        let left = kronrod15(&mut f, seg.a, mid);
        let right = kronrod15(&mut f, mid, seg.b);
        segments.push(left);
        segments.push(right);
        value = segments.iter().map(|s| s.value).sum();
        error = segments.iter().map(|s| s.error).sum();
        magnitude = segments.iter().map(|s| s.magnitude).sum();
    }
    if !value.is_finite() || error > tol.target(value).max(floor(magnitude)) {
        return Err(Error::QuadratureFailure { value, error, context });
    }
    Ok(Estimate { value, error })
}

/// Integrates `f` over `[a, ∞)` with geometrically widening panels.
///
/// `first` is the width of the first panel; every subsequent panel is twice
/// as wide. Stops once two consecutive panels are negligible against the
/// running total. Intended for integrands with at least exponential decay
/// beyond a few multiples of `first`.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    first: f64,
    tol: Tolerance,
    context: &'static str,
) -> Result<Estimate> {
    let mut lo = a;
    let mut width = first;
    let mut total = 0.0;
    let mut err = 0.0;
    let mut quiet = 0;
    for _ in 0..200 {
        let hi = lo + width;
        let panel_tol = Tolerance::new(tol.abs * 0.25, tol.rel * 0.5);
        let panel = integrate(&mut f, lo, hi, panel_tol, context)?;
        total += panel.value;
        err += panel.error;
        if panel.value.abs() <= 1e-17 * total.abs() + 1e-300 {
            quiet += 1;
            if quiet >= 2 {
                return Ok(Estimate { value: total, error: err });
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        width *= 2.0;
    }
    Err(Error::QuadratureFailure { value: total, error: err, context })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
            let dx = p0 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_exponentials() {
        let est = integrate(|x| x.powi(5) - 3.0 * x, 0.0, 2.0, Tolerance::DEFAULT, "poly").unwrap();
        assert!((est.value - (64.0 / 6.0 - 6.0)).abs() < 1e-13);
        let est = integrate(f64::exp, -1.0, 1.0, Tolerance::DEFAULT, "exp").unwrap();
        assert!((est.value - (1f64.exp() - (-1f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity_converges() {
        // ∫_0^1 x^{-1/2} dx = 2
        let est = integrate(|x| x.powf(-0.5), 0.0, 1.0, Tolerance::new(1e-12, 1e-9), "sqrt").unwrap();
        assert!((est.value - 2.0).abs() < 1e-8, "{}", est.value);
    }

    #[test]
    fn half_line_exponential() {
        let est = integrate_half_line(|x| (-x).exp() * x.cos(), 0.0, 1.0, Tolerance::DEFAULT, "h").unwrap();
        assert!((est.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_is_reported() {
        let err = integrate(|x| (1.0 / x).sin() / x, 1e-300, 1.0, Tolerance::new(0.0, 1e-15), "osc");
        assert!(matches!(err, Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn gauss_legendre_is_exact_for_high_degree() {
        let (x, w) = gauss_legendre(20);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(38)).sum();
        assert!((s - 2.0 / 39.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }
}
