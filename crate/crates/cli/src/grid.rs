/// Parses a radius grid: `r1,r2,...`, `lin:START:STOP:N` or
/// `log:START:STOP:N`. Radii must be finite and nonnegative.
pub fn parse(spec: &str) -> Result<Vec<f64>, String> {
    let bad = || format!("malformed grid {spec:?}");
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let values = if let Some(rest) = spec.strip_prefix("lin:").or_else(|| spec.strip_prefix("log:")) {
        let parts: Vec<&str> = rest.split(':').collect();
        let [start, stop, n] = parts[..] else { return Err(bad()) };
        let (start, stop) = (num(start)?, num(stop)?);
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        if n < 2 || !(stop > start) {
            return Err(bad());
        }
        let frac = |i: usize| i as f64 / (n - 1) as f64;
        if spec.starts_with("lin:") {
            (0..n).map(|i| start + (stop - start) * frac(i)).collect()
        } else {
            if !(start > 0.0) {
                return Err(format!("log grid needs a positive start, got {start}"));
            }
            let (a, b) = (start.ln(), stop.ln());
            (0..n).map(|i| (a + (b - a) * frac(i)).exp()).collect()
        }
    } else {
        spec.split(',').map(num).collect::<Result<Vec<f64>, String>>()?
    };
    if values.is_empty() || values.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}
