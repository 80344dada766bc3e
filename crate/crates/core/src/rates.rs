//! Closed-form decay envelopes `a_k ≍ k^{−α}(log₂ k)^{β}` for embeddings of
//! block-radial Besov and Sobolev spaces.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::params::{approximation_t, derive_exponents, is_compact_embedding, BlockIndex, EmbeddingParams, Exponent};
use crate::rational::{fmt_rat, int, max_rat, rat, to_f64, Rat};

/// Which branch of the rate formula is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    /// `p₁ ≤ p₂ ≤ 2` or `2 ≤ p₁ ≤ p₂`
    A,
    /// `p₁ < 2 < p₂`, above the crossover
    B,
    /// `p₁ < 2 < p₂`, below the crossover
    C,
    /// `p₂ < p₁` (diagonal operators only)
    D,
}

impl Regime {
    pub fn describe(self) -> &'static str {
        match self {
            Regime::A => "both-sides-of-2",
            Regime::B => "cross-2-high",
            Regime::C => "cross-2-low",
            Regime::D => "target-below-source",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

/// `a_k ≍ k^{−alpha_out} (log₂ k)^{beta_out}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateLaw {
    pub alpha_out: Rat,
    pub beta_out: Rat,
    pub regime: Regime,
}

impl RateLaw {
    pub fn alpha_f64(&self) -> f64 {
        to_f64(&self.alpha_out)
    }

    pub fn beta_f64(&self) -> f64 {
        to_f64(&self.beta_out)
    }

    /// Envelope value at rank `k`, without constant.
    pub fn eval(&self, k: f64) -> f64 {
        k.powf(-self.alpha_f64()) * k.log2().powf(self.beta_f64())
    }
}

impl fmt::Display for RateLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k^(-{})", fmt_rat(&self.alpha_out))?;
        if !self.beta_out.is_zero() {
            write!(f, " log^({}) k", fmt_rat(&self.beta_out))?;
        }
        Ok(())
    }
}

impl Serialize for RateLaw {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("RateLaw", 5)?;
        st.serialize_field("alpha_out", &fmt_rat(&self.alpha_out))?;
        st.serialize_field("beta_out", &fmt_rat(&self.beta_out))?;
        st.serialize_field("alpha_out_f64", &self.alpha_f64())?;
        st.serialize_field("beta_out_f64", &self.beta_f64())?;
        st.serialize_field("regime", &self.regime)?;
        st.end()
    }
}

/// True when `p₁ < 2 < p₂`.
pub(crate) fn crosses_two(p1: &Exponent, p2: &Exponent) -> bool {
    let half = rat(1, 2);
    p1.inv() > &half && p2.inv() < &half
}

/// Rate of `a_k(id : R_γB^{s₁}_{p₁,q₁} → R_γB^{s₂}_{p₂,q₂})`.
///
/// Requires a compact embedding with `1 < p₁ < p₂ ≤ ∞`, off the crossover
/// `γ₁/p = 1/min{p₁, p₂'}`.
pub fn embedding_rate(gamma: &BlockIndex, params: &EmbeddingParams) -> Result<RateLaw> {
    if params.p1.inv() >= &Rat::one() {
        return Err(Error::Precondition("p1 must exceed 1".into()));
    }
    if params.p1 >= params.p2 {
        return Err(Error::Precondition("p1 < p2 is required".into()));
    }
    if !is_compact_embedding(params, gamma) {
        return Err(Error::Precondition("the embedding is not compact".into()));
    }
    let derived = derive_exponents(params, gamma);
    let g1m1 = int(gamma.gamma1() as i64 - 1);
    let base_alpha = &g1m1 * &derived.inv_p;
    let beta_out = int(gamma.n() as i64 - 1) * &base_alpha;
    if !crosses_two(&params.p1, &params.p2) {
        return Ok(RateLaw { alpha_out: base_alpha, beta_out, regime: Regime::A });
    }
    // γ₁/p against 1/min{p₁, p₂'} = max{1/p₁, 1 − 1/p₂}
    let lhs = int(gamma.gamma1() as i64) * &derived.inv_p;
    let rhs = max_rat(params.p1.inv(), derived.p2_dual.inv());
    let inv_t = derived.t.inv().clone();
    if lhs > rhs {
        let alpha_out = base_alpha + rat(1, 2) - inv_t;
        Ok(RateLaw { alpha_out, beta_out, regime: Regime::B })
    } else if lhs < rhs {
        // t(γ₁−1)/(2p)
        let alpha_out = base_alpha / (int(2) * inv_t);
        Ok(RateLaw { alpha_out, beta_out, regime: Regime::C })
    } else {
        Err(Error::RegimeBoundary(format!("gamma1/p = 1/min(p1, p2') = {}", fmt_rat(&lhs))))
    }
}

/// Rate of `a_k(D_σ : ℓ_{p₁} → ℓ_{p₂})` for `σ_k ≍ k^{−α}(log₂ k)^β`.
pub fn rate_envelope_diag(alpha: &Rat, beta: &Rat, p1: &Exponent, p2: &Exponent) -> Result<RateLaw> {
    if p1.inv() == &Rat::one() && p2.is_infinite() {
        return Err(Error::UnsupportedEndpoint);
    }
    let floor = p2.inv() - p1.inv();
    if !alpha.is_positive() || alpha <= &floor {
        return Err(Error::Precondition(format!(
            "alpha = {} must exceed max(0, 1/p2 - 1/p1)",
            fmt_rat(alpha)
        )));
    }
    if beta.is_negative() {
        return Err(Error::Precondition("beta must be nonnegative".into()));
    }
    let beta_out = beta.clone();
    if p2 < p1 {
        let alpha_out = alpha - floor;
        return Ok(RateLaw { alpha_out, beta_out, regime: Regime::D });
    }
    if !crosses_two(p1, p2) {
        return Ok(RateLaw { alpha_out: alpha.clone(), beta_out, regime: Regime::A });
    }
    let t = approximation_t(p1, p2)?;
    let inv_t = t.inv();
    if alpha > inv_t {
        Ok(RateLaw { alpha_out: alpha - inv_t + rat(1, 2), beta_out, regime: Regime::B })
    } else if alpha < inv_t {
        Ok(RateLaw { alpha_out: alpha / (int(2) * inv_t), beta_out, regime: Regime::C })
    } else {
        Err(Error::RegimeBoundary(format!("alpha = 1/t = {}", fmt_rat(inv_t))))
    }
}

/// Regime of a diagonal operator without computing the envelope.
pub fn diag_regime(alpha: &Rat, p1: &Exponent, p2: &Exponent) -> Result<Regime> {
    if p2 < p1 {
        return Ok(Regime::D);
    }
    if !crosses_two(p1, p2) {
        return Ok(Regime::A);
    }
    let t = approximation_t(p1, p2)?;
    match alpha.cmp(t.inv()) {
        std::cmp::Ordering::Greater => Ok(Regime::B),
        std::cmp::Ordering::Less => Ok(Regime::C),
        std::cmp::Ordering::Equal => Err(Error::RegimeBoundary(format!("alpha = 1/t = {}", fmt_rat(t.inv())))),
    }
}
