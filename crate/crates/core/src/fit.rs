//! Least-squares fits of `v ≈ C k^{−α} (log₂ k)^β`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub log2_constant: f64,
    pub r2: f64,
    pub samples: usize,
    pub k_min: f64,
    pub k_max: f64,
    /// Fewer than six octaves: `log log k` barely moves, so `β̂` is weak.
    pub low_confidence: bool,
}

fn validate(samples: &[(f64, f64)]) -> Result<()> {
    if samples.len() < 5 {
        return Err(Error::DegenerateFit(format!("{} samples, need at least 5", samples.len())));
    }
    if let Some(&(k, v)) = samples.iter().find(|(k, v)| !(*k >= 4.0 && *v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateFit(format!("sample (k={k}, v={v}) needs k >= 4 and a positive value")));
    }
    Ok(())
}

fn solve(design: DMatrix<f64>, y: DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= smax * 1e-10 {
        return Err(Error::DegenerateFit("design matrix is rank deficient; widen the k range".into()));
    }
    let coef = svd.solve(&y, smax * 1e-12).map_err(|e| Error::DegenerateFit(e.to_string()))?;
    let resid = &y - &design * &coef;
    let mean = y.mean();
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res = resid.norm_squared();
    let r2 = if ss_tot <= 1e-24 * y.len() as f64 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok((coef, r2))
}

fn finish(samples: &[(f64, f64)], alpha_hat: f64, beta_hat: f64, log2_constant: f64, r2: f64) -> RateFit {
    let k_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let k_max = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    RateFit {
        alpha_hat,
        beta_hat,
        log2_constant,
        r2,
        samples: samples.len(),
        k_min,
        k_max,
        low_confidence: (k_max / k_min).log2() < 6.0,
    }
}

/// Regress `log₂ v` on `(1, −log₂ k, log₂ log₂ k)`.
pub fn fit_rate_law(samples: &[(f64, f64)]) -> Result<RateFit> {
    validate(samples)?;
    let n = samples.len();
    let design = DMatrix::from_fn(n, 3, |i, j| {
        let k = samples[i].0;
        match j {
            0 => 1.0,
            1 => -k.log2(),
            _ => k.log2().log2(),
        }
    });
    let y = DVector::from_iterator(n, samples.iter().map(|s| s.1.log2()));
    let (c, r2) = solve(design, y)?;
    Ok(finish(samples, c[1], c[2], c[0], r2))
}

/// Same regression with the log exponent held at `beta`.
pub fn fit_rate_law_fixed_beta(samples: &[(f64, f64)], beta: f64) -> Result<RateFit> {
    validate(samples)?;
    let n = samples.len();
    let design = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { -samples[i].0.log2() });
    let y = DVector::from_iterator(n, samples.iter().map(|&(k, v)| v.log2() - beta * k.log2().log2()));
    let (c, r2) = solve(design, y)?;
    Ok(finish(samples, c[1], beta, c[0], r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(f: impl Fn(f64) -> f64, lo: i32, hi: i32) -> Vec<(f64, f64)> {
        (lo..=hi).map(|e| 2f64.powi(e)).map(|k| (k, f(k))).collect()
    }

    #[test]
    fn exact_power_law() {
        let fit = fit_rate_law(&gen(|k| 1.0 / k, 2, 18)).unwrap();
        assert!((fit.alpha_hat - 1.0).abs() < 1e-9);
        assert!(fit.beta_hat.abs() < 1e-6);
        assert!(!fit.low_confidence);
    }

    #[test]
    fn power_with_log() {
        let fit = fit_rate_law(&gen(|k| k.powf(-0.5) * k.log2(), 4, 18)).unwrap();
        assert!((fit.alpha_hat - 0.5).abs() < 0.02);
        assert!((fit.beta_hat - 1.0).abs() < 0.1);
    }

    #[test]
    fn constant_samples() {
        let fit = fit_rate_law(&gen(|_| 3.0, 2, 12)).unwrap();
        assert!(fit.alpha_hat.abs() < 1e-12 && fit.beta_hat.abs() < 1e-12);
        assert_eq!(fit.r2, 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_rate_law(&gen(|k| 1.0 / k, 2, 5)).is_err());
        assert!(fit_rate_law(&[(4.0, 1.0); 6]).is_err());
        assert!(fit_rate_law(&gen(|_| 0.0, 2, 8)).is_err());
        assert!(fit_rate_law(&gen(|k| 1.0 / k, 0, 8)).is_err());
    }

    #[test]
    fn short_range_is_flagged() {
        let fit = fit_rate_law(&gen(|k| 1.0 / k, 4, 8)).unwrap();
        assert!(fit.low_confidence);
        let fixed = fit_rate_law_fixed_beta(&gen(|k| k.powf(-0.75) * k.log2().sqrt(), 4, 18), 0.5).unwrap();
        assert!((fixed.alpha_hat - 0.75).abs() < 1e-9);
    }
}
