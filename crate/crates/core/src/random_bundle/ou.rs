//! Ornstein–Uhlenbeck sample paths by Euler–Maruyama.

use crate::error::{Error, Result};
use crate::monad::Rng;

/// One sampled path of `dX = −θ X dt + σ dW` from `x0`, as `(t, x)` pairs
/// for `steps + 1` grid times.
pub fn ou_path(theta: f64, sigma: f64, x0: f64, h: f64, steps: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if !(h > 0.0 && h.is_finite()) || !theta.is_finite() || !(sigma >= 0.0) {
        return Err(Error::Invalid(format!("bad OU parameters θ={theta}, σ={sigma}, h={h}")));
    }
    let mut rng = Rng::seed(seed);
    let sqrt_h = h.sqrt();
    let mut x = x0;
    let mut path = Vec::with_capacity(steps + 1);
    path.push((0.0, x));
    for k in 1..=steps {
        x += -theta * x * h + sigma * sqrt_h * rng.normal();
        path.push((k as f64 * h, x));
    }
    Ok(path)
}

/// The path as CSV with header `t,x`.
pub fn ou_csv(theta: f64, sigma: f64, x0: f64, h: f64, steps: usize, seed: u64) -> Result<String> {
    let path = ou_path(theta, sigma, x0, h, steps, seed)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "x"]).map_err(|e| Error::Invalid(e.to_string()))?;
    for (t, x) in path {
        w.write_record([t.to_string(), x.to_string()]).map_err(|e| Error::Invalid(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_free_limit_is_exponential_decay() {
        let path = ou_path(1.0, 0.0, 1.0, 1e-4, 10_000, 0).unwrap();
        let (t, x) = path.last().copied().unwrap();
        assert!((t - 1.0).abs() < 1e-12);
        // Euler error is O(h)
        assert!((x - (-1.0f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn stationary_variance() {
        let (theta, sigma) = (1.0, 0.5);
        let path = ou_path(theta, sigma, 0.0, 0.01, 100_000, 42).unwrap();
        let tail: Vec<f64> = path.iter().skip(1000).map(|p| p.1).collect();
        let m = tail.iter().sum::<f64>() / tail.len() as f64;
        let v = tail.iter().map(|x| (x - m).powi(2)).sum::<f64>() / tail.len() as f64;
        let target = sigma * sigma / (2.0 * theta);
        assert!((v - target).abs() < 0.1 * target, "variance {v} vs {target}");
    }

    #[test]
    fn same_seed_same_path() {
        assert_eq!(ou_csv(1.0, 1.0, 0.0, 0.01, 100, 7).unwrap(), ou_csv(1.0, 1.0, 0.0, 0.01, 100, 7).unwrap());
        assert_ne!(ou_csv(1.0, 1.0, 0.0, 0.01, 100, 7).unwrap(), ou_csv(1.0, 1.0, 0.0, 0.01, 100, 8).unwrap());
    }
}
