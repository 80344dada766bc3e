//! Scalar parameters, block indices and the exponents derived from them.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_rat, int, max_rat, parse_rational, rat, to_f64, Rat};

/// An integrability (or fine) index `p ∈ (0, ∞]`, stored through its
/// reciprocal so that `1/∞ = 0` is an ordinary value.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Exponent {
    inv: Rat,
}

impl Exponent {
    pub fn new(p: Rat) -> Result<Self> {
        if !p.is_positive() {
            return Err(Error::InvalidExponent(fmt_rat(&p)));
        }
        Ok(Exponent { inv: p.recip() })
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Result<Self> {
        Self::new(rat(numer, denom))
    }

    pub fn infinity() -> Self {
        Exponent { inv: Rat::zero() }
    }

    /// Builds the exponent whose reciprocal is `inv` (`inv = 0` gives `∞`).
    pub fn from_inv(inv: Rat) -> Result<Self> {
        if inv.is_negative() {
            return Err(Error::InvalidExponent(format!("1/{}", fmt_rat(&inv))));
        }
        Ok(Exponent { inv })
    }

    /// `1/p`, exact.
    pub fn inv(&self) -> &Rat {
        &self.inv
    }

    pub fn inv_f64(&self) -> f64 {
        to_f64(&self.inv)
    }

    pub fn is_infinite(&self) -> bool {
        self.inv.is_zero()
    }

    /// `p` itself, `None` for `∞`.
    pub fn value(&self) -> Option<Rat> {
        (!self.is_infinite()).then(|| self.inv.recip())
    }

    pub fn to_f64(&self) -> f64 {
        match self.value() {
            Some(v) => to_f64(&v),
            None => f64::INFINITY,
        }
    }

    /// True when `p ≥ 1`.
    pub fn is_banach(&self) -> bool {
        self.inv <= Rat::one()
    }

    /// Hölder conjugate `p'` with `1/p + 1/p' = 1`. Requires `p ≥ 1`.
    pub fn conjugate(&self) -> Result<Exponent> {
        if !self.is_banach() {
            return Err(Error::InvalidExponent(format!("{self} has no conjugate (p < 1)")));
        }
        Ok(Exponent { inv: Rat::one() - &self.inv })
    }

    pub fn two() -> Self {
        Exponent { inv: rat(1, 2) }
    }

    pub fn one() -> Self {
        Exponent { inv: Rat::one() }
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        // larger reciprocal means smaller exponent
        other.inv.cmp(&self.inv)
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => f.write_str(&fmt_rat(&v)),
            None => f.write_str("inf"),
        }
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Exponent({self})")
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" | "∞" => Ok(Exponent::infinity()),
            other => Exponent::new(parse_rational(other)?),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The block structure `γ = (γ₁ ≤ … ≤ γ_m)` of a block-radial space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BlockIndex {
    gammas: Vec<u32>,
}

impl BlockIndex {
    pub fn new(gammas: Vec<u32>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::InvalidBlockIndex("at least one block is required".into()));
        }
        if let Some(g) = gammas.iter().find(|&&g| g < 2) {
            return Err(Error::InvalidBlockIndex(format!("block dimension {g} < 2")));
        }
        if gammas.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidBlockIndex(format!("{gammas:?} is not nondecreasing")));
        }
        Ok(BlockIndex { gammas })
    }

    pub fn gammas(&self) -> &[u32] {
        &self.gammas
    }

    /// Number of blocks.
    pub fn m(&self) -> usize {
        self.gammas.len()
    }

    /// Total dimension `d = Σ γᵢ`.
    pub fn d(&self) -> u32 {
        self.gammas.iter().sum()
    }

    /// Smallest block `γ₁`.
    pub fn gamma1(&self) -> u32 {
        self.gammas[0]
    }

    /// Multiplicity of the smallest block.
    pub fn n(&self) -> usize {
        self.gammas.iter().take_while(|&&g| g == self.gammas[0]).count()
    }

    /// The radial case `γ = (d)`.
    pub fn radial(d: u32) -> Result<Self> {
        Self::new(vec![d])
    }
}

impl fmt::Display for BlockIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.gammas.iter().map(|g| g.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl<'de> Deserialize<'de> for BlockIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            gammas: Vec<u32>,
        }
        let raw = Raw::deserialize(d)?;
        BlockIndex::new(raw.gammas).map_err(serde::de::Error::custom)
    }
}

/// Smoothness and integrability parameters of an embedding
/// `B^{s₁}_{p₁,q₁} → B^{s₂}_{p₂,q₂}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    #[serde(with = "rat_serde")]
    pub s1: Rat,
    #[serde(with = "rat_serde")]
    pub s2: Rat,
    pub p1: Exponent,
    pub p2: Exponent,
    pub q1: Exponent,
    pub q2: Exponent,
}

impl EmbeddingParams {
    /// Validates `p₁, p₂ ∈ [1, ∞]`. The fine indices only need to be positive,
    /// which [`Exponent`] already guarantees.
    pub fn new(s1: Rat, s2: Rat, p1: Exponent, p2: Exponent, q1: Exponent, q2: Exponent) -> Result<Self> {
        for p in [&p1, &p2] {
            if !p.is_banach() {
                return Err(Error::InvalidExponent(format!("p = {p} must lie in [1, inf]")));
            }
        }
        Ok(EmbeddingParams { s1, s2, p1, p2, q1, q2 })
    }

    /// Shorthand with `q₁ = q₂ = 2`.
    pub fn with_default_q(s1: Rat, s2: Rat, p1: Exponent, p2: Exponent) -> Result<Self> {
        Self::new(s1, s2, p1, p2, Exponent::two(), Exponent::two())
    }

    /// `1/p₁ − 1/p₂`.
    pub fn inv_p(&self) -> Rat {
        self.p1.inv() - self.p2.inv()
    }
}

/// Exponents derived from `(EmbeddingParams, BlockIndex)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedExponents {
    /// `δ = s₁ − s₂ − d(1/p₁ − 1/p₂)`
    pub delta: Rat,
    /// `1/p = 1/p₁ − 1/p₂`
    pub inv_p: Rat,
    /// `t = min{p₁', p₂}`
    pub t: Exponent,
    pub p1_dual: Exponent,
    pub p2_dual: Exponent,
    /// `σᵢ = sᵢ + m/2 − m/pᵢ`
    pub sigma1: Rat,
    pub sigma2: Rat,
}

/// `t = min{p₁', p₂}`, i.e. `1/t = max{1 − 1/p₁, 1/p₂}`.
pub fn approximation_t(p1: &Exponent, p2: &Exponent) -> Result<Exponent> {
    let p1_dual = p1.conjugate()?;
    Exponent::from_inv(max_rat(p1_dual.inv(), p2.inv()))
}

pub fn derive_exponents(params: &EmbeddingParams, gamma: &BlockIndex) -> DerivedExponents {
    let d = int(gamma.d() as i64);
    let m = int(gamma.m() as i64);
    let inv_p = params.inv_p();
    let delta = &params.s1 - &params.s2 - &d * &inv_p;
    // EmbeddingParams guarantees p ≥ 1, so conjugates exist
    let p1_dual = params.p1.conjugate().expect("p1 >= 1");
    let p2_dual = params.p2.conjugate().expect("p2 >= 1");
    let t = Exponent::from_inv(max_rat(p1_dual.inv(), params.p2.inv())).expect("nonnegative");
    let half_m = &m / int(2);
    let sigma1 = &params.s1 + &half_m - &m * params.p1.inv();
    let sigma2 = &params.s2 + &half_m - &m * params.p2.inv();
    DerivedExponents { delta, inv_p, t, p1_dual, p2_dual, sigma1, sigma2 }
}

/// `s₁ − s₂ > d(1/p₁ − 1/p₂) > 0`; the block condition `min γᵢ ≥ 2` is
/// enforced by [`BlockIndex`] itself.
pub fn is_compact_embedding(params: &EmbeddingParams, gamma: &BlockIndex) -> bool {
    let gap = int(gamma.d() as i64) * params.inv_p();
    let smooth = &params.s1 - &params.s2;
    gap.is_positive() && smooth > gap
}

pub(crate) mod rat_serde {
    use super::*;

    pub fn serialize<S: serde::Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
