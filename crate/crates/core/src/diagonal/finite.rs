//! Approximation numbers of the identity `ℓ_{p₁}^N → ℓ_{p₂}^N`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{approximation_t, Exponent};
use crate::rational::to_f64;
use crate::rates::crosses_two;

/// How much a returned value can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundStatus {
    /// The value is the approximation number itself.
    Exact,
    /// An upper bound, with the unspecified constant set to 1.
    UpperWithC1,
    /// Upper bound with constant 1, and equivalent up to constants (`k ≤ N/4`).
    EquivalentRange,
    /// Valid up to an unknown multiplicative constant.
    UpToConstant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FiniteIdApprox {
    pub value: f64,
    pub status: BoundStatus,
}

/// Which branch of the finite-dimensional formula applies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum IdCase {
    /// `p₁ ≤ p₂`, both on one side of 2; `exact` when `p₁ = p₂`
    Flat { exact: bool },
    /// `p₁ < 2 < p₂` with `1/t`
    Cross { inv_t: f64 },
    /// `p₂ < p₁` with exponent `1/p₂ − 1/p₁ > 0`
    Shrink { exponent: f64 },
}

impl IdCase {
    pub(crate) fn classify(p1: &Exponent, p2: &Exponent) -> Result<IdCase> {
        if p2 < p1 {
            return Ok(IdCase::Shrink { exponent: to_f64(&(p2.inv() - p1.inv())) });
        }
        if crosses_two(p1, p2) {
            if p1 == &Exponent::one() && p2.is_infinite() {
                return Err(Error::UnsupportedEndpoint);
            }
            let t = approximation_t(p1, p2)?;
            return Ok(IdCase::Cross { inv_t: t.inv_f64() });
        }
        Ok(IdCase::Flat { exact: p1 == p2 })
    }

    /// Value of the finite formula at real dimension `n` and rank `k ≥ 1`.
    pub(crate) fn value(self, n: f64, k: f64) -> f64 {
        if k > n {
            return 0.0;
        }
        match self {
            IdCase::Flat { .. } => 1.0,
            IdCase::Cross { inv_t } => {
                if k <= n.powf(2.0 * inv_t) {
                    1.0
                } else {
                    n.powf(inv_t) / k.sqrt()
                }
            }
            IdCase::Shrink { exponent } => (n - k + 1.0).powf(exponent),
        }
    }
}

/// `a_k(id : ℓ_{p₁}^N → ℓ_{p₂}^N)`.
///
/// For `p₂ < p₁` the value `(N−k+1)^{1/p₂−1/p₁}` is exact. Otherwise it is the
/// standard upper bound with constant 1, equivalent when `k ≤ N/4`. Ranks
/// beyond `N` give 0 in every case.
pub fn approx_finite_id(p1: &Exponent, p2: &Exponent, n: u64, k: u64) -> Result<FiniteIdApprox> {
    if n == 0 || k == 0 {
        return Err(Error::Precondition("N and k must be at least 1".into()));
    }
    let case = IdCase::classify(p1, p2)?;
    let value = case.value(n as f64, k as f64);
    let status = if k > n {
        BoundStatus::Exact
    } else {
        match case {
            IdCase::Shrink { .. } | IdCase::Flat { exact: true } => BoundStatus::Exact,
            _ if 4 * k <= n => BoundStatus::EquivalentRange,
            _ => BoundStatus::UpperWithC1,
        }
    };
    Ok(FiniteIdApprox { value, status })
}
