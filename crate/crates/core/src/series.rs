//! Tail integrals for power–log series, used to bracket infinite sums.

use statrs::function::gamma::{gamma, gamma_ur};

/// `∫_s^∞ x^{−a} (log₂ x)^b dx` for `a > 1`, `b ≥ 0`, `s > 1`.
///
/// Substituting `u = ln x` gives `Γ(b+1, (a−1) ln s) / ((a−1)^{b+1} (ln 2)^b)`.
pub fn power_log_tail_integral(a: f64, b: f64, s: f64) -> f64 {
    assert!(a > 1.0 && b >= 0.0 && s > 1.0, "tail integral needs a > 1, b >= 0, s > 1");
    if b == 0.0 {
        return s.powf(1.0 - a) / (a - 1.0);
    }
    let x = (a - 1.0) * s.ln();
    let upper = gamma_ur(b + 1.0, x) * gamma(b + 1.0);
    upper / ((a - 1.0).powf(b + 1.0) * std::f64::consts::LN_2.powf(b))
}

/// Two-sided bracket for a convergent sum.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Bracket for `S^{1/t}` given a bracket for `S`.
    pub fn root(&self, t: f64) -> Bracket {
        Bracket { lower: self.lower.powf(1.0 / t), upper: self.upper.powf(1.0 / t) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Simpson's rule on `u = ln x` over a long finite window; independent of
    /// the incomplete-gamma route.
    fn numeric_tail(a: f64, b: f64, s: f64) -> f64 {
        let (lo, hi) = (s.ln(), s.ln() + 400.0 / (a - 1.0));
        let n = 400_000;
        let h = (hi - lo) / n as f64;
        let f = |u: f64| (-(a - 1.0) * u).exp() * (u / std::f64::consts::LN_2).powf(b);
        let mut acc = f(lo) + f(hi);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn tail_integral_matches_quadrature() {
        for (a, b, s) in [(2.0, 0.0, 10.0), (4.0, 0.0, 3.0), (1.5, 1.0, 8.0), (3.0, 2.5, 100.0), (1.25, 0.5, 2.0)] {
            let closed = power_log_tail_integral(a, b, s);
            let q = numeric_tail(a, b, s);
            assert!(((closed - q) / q).abs() < 1e-8, "{a} {b} {s}: {closed} vs {q}");
        }
    }
}
