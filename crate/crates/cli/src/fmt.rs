//! Numeric formatting: nine significant digits everywhere.

/// `x` rounded to nine significant digits, shortest round-trip text.
pub fn sig(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round9(x);
    if r == 0.0 {
        return "0".into();
    }
    if (1e-4..1e9).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

pub fn round9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

pub fn round_all(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| round9(x)).collect()
}
