//! Finite-support norms of `b^σ_{p,q}(w_γ)`, of the layered spaces
//! `ℓ_q(2^{νσ} ℓ_p(𝒳, w))`, and the reindexing by `τ`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{derive_exponents, BlockIndex, EmbeddingParams, Exponent};
use crate::rational::to_f64;
use crate::weights::{cube_weight_f64, wtilde_root, CubeWeightTable, WeightSequenceParams};

/// Coefficients `λ_{ν,key}` with finite support; zeros are not stored.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LevelSequence<K: Ord> {
    entries: BTreeMap<(u32, K), f64>,
}

/// Keys are lattice points `k ∈ ℤ^m`.
pub type LatticeSequence = LevelSequence<Vec<i64>>;
/// Keys are flat indices `ℓ ∈ ℕ₀`.
pub type FlatSequence = LevelSequence<u64>;

impl<K: Ord + Clone> LevelSequence<K> {
    pub fn new() -> Self {
        LevelSequence { entries: BTreeMap::new() }
    }

    /// Sets `λ_{ν,key}`; a zero value removes the entry.
    pub fn insert(&mut self, nu: u32, key: K, value: f64) {
        if value == 0.0 {
            self.entries.remove(&(nu, key));
        } else {
            self.entries.insert((nu, key), value);
        }
    }

    pub fn get(&self, nu: u32, key: &K) -> f64 {
        self.entries.get(&(nu, key.clone())).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &K, f64)> {
        self.entries.iter().map(|((nu, k), v)| (*nu, k, *v))
    }

    /// Every coefficient multiplied by `f(ν)`.
    pub fn scale_levels(&self, f: impl Fn(u32) -> f64) -> Self {
        let mut out = Self::new();
        for (nu, k, v) in self.iter() {
            out.insert(nu, k.clone(), v * f(nu));
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        self.scale_levels(|_| c)
    }

    /// `λ + μ`
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (nu, k, v) in other.iter() {
            let cur = out.get(nu, k);
            out.insert(nu, k.clone(), cur + v);
        }
        out
    }
}

impl<K: Ord + Clone> FromIterator<(u32, K, f64)> for LevelSequence<K> {
    fn from_iter<I: IntoIterator<Item = (u32, K, f64)>>(iter: I) -> Self {
        let mut out = Self::new();
        for (nu, k, v) in iter {
            out.insert(nu, k, v);
        }
        out
    }
}

/// `(Σ_ν 2^{νσq} (Σ_x |λ_{ν,x} s_{ν,x}|^p)^{q/p})^{1/q}` where `s` is the
/// per-entry scale; suprema replace sums at `∞`.
fn mixed_norm<K: Ord>(
    entries: impl Iterator<Item = (u32, K, f64)>,
    sigma: f64,
    p: &Exponent,
    q: &Exponent,
) -> f64 {
    let mut levels: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for (nu, _, scaled) in entries {
        levels.entry(nu).or_default().push(scaled.abs());
    }
    let outer: Vec<f64> = levels
        .into_iter()
        .map(|(nu, inner)| 2f64.powf(nu as f64 * sigma) * lp_norm(&inner, p))
        .collect();
    lp_norm(&outer, q)
}

/// `‖x‖_p` computed as `M (Σ (|xᵢ|/M)^p)^{1/p}` with `M = max |xᵢ|`, and as
/// a plain sum at `p = 1`.
pub(crate) fn lp_norm(xs: &[f64], p: &Exponent) -> f64 {
    if *p == Exponent::one() {
        return xs.iter().map(|x| x.abs()).sum();
    }
    let m = xs.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    if p.is_infinite() || m == 0.0 || !m.is_finite() {
        return m;
    }
    let pf = p.to_f64();
    let s: f64 = xs.iter().map(|&x| (x.abs() / m).powf(pf)).sum();
    m * s.powf(1.0 / pf)
}

/// `‖λ | b^σ_{p,q}(w_γ)‖` with inner terms `|λ_{ν,k}|^p 2^{mν} w_γ(Q_{ν,k})`.
pub fn besov_seq_norm(lambda: &LatticeSequence, sigma: f64, p: &Exponent, q: &Exponent, gamma: &BlockIndex) -> Result<f64> {
    let m = gamma.m() as f64;
    let mut scaled = Vec::with_capacity(lambda.len());
    for (nu, k, v) in lambda.iter() {
        let w = cube_weight_f64(gamma, nu, k)? * 2f64.powf(m * nu as f64);
        scaled.push((nu, (), v * w.powf(p.inv_f64())));
    }
    Ok(mixed_norm(scaled.into_iter(), sigma, p, q))
}

/// `‖λ | ℓ_q(2^{νσ} ℓ_p(𝒳, w))‖` with inner terms `|λ_{ν,x}|^p w_{ν,x}`.
pub fn layered_norm<K: Ord + Clone>(
    lambda: &LevelSequence<K>,
    sigma: f64,
    p: &Exponent,
    q: &Exponent,
    weights: impl Fn(u32, &K) -> Option<f64>,
) -> Result<f64> {
    let mut scaled = Vec::with_capacity(lambda.len());
    for (nu, k, v) in lambda.iter() {
        let w = weights(nu, k).ok_or(Error::MissingWeight { level: nu })?;
        scaled.push((nu, (), v * w.powf(p.inv_f64())));
    }
    Ok(mixed_norm(scaled.into_iter(), sigma, p, q))
}

/// The two sides of the reindexing and their ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReindexComparison {
    /// `ℓ_{q₂}(2^{ν(s₂−s₁)} ℓ_{p₂}(ℤ^m, w_γ(Q_{ν,k})^{1−p₂/p₁}))`
    pub lattice_norm: f64,
    /// `ℓ_{q₂}(2^{−νδ} ℓ_{p₂}(ℕ₀, w̃))` at `ℓ = τ(k)`
    pub reindexed_norm: f64,
    pub ratio: f64,
}

/// Compares the lattice-indexed norm of `λ` with the norm after flattening
/// `k ↦ τ(k)`. Every key must lie in the reliable part of `table`.
pub fn reindex_equivalence(
    lambda: &LatticeSequence,
    params: &EmbeddingParams,
    gamma: &BlockIndex,
    table: &CubeWeightTable,
) -> Result<ReindexComparison> {
    if lambda.is_empty() {
        return Err(Error::Precondition("the zero sequence has no ratio".into()));
    }
    if table.gamma() != gamma {
        return Err(Error::Precondition("table was built for a different block index".into()));
    }
    let reliable = table.reliable_len();
    let mut ranks = BTreeMap::new();
    for (nu, k, _) in lambda.iter() {
        match table.rank(k) {
            Some(r) if r < reliable => {
                ranks.insert(k.clone(), r as u64);
            }
            _ => return Err(Error::SupportOutsideTable { level: nu }),
        }
    }
    let derived = derive_exponents(params, gamma);
    let sigma = to_f64(&(&params.s2 - &params.s1));
    let delta = to_f64(&derived.delta);
    // w^{1/p₂} with w = W^{1−p₂/p₁} is W^{1/p₂−1/p₁}, finite at p₂ = ∞
    let shift = to_f64(&(params.p2.inv() - params.p1.inv()));
    let mut lattice = Vec::with_capacity(lambda.len());
    let mut flat = Vec::with_capacity(lambda.len());
    let ws = WeightSequenceParams::new(gamma, &params.p1, &params.p2);
    for (nu, k, v) in lambda.iter() {
        let w = cube_weight_f64(gamma, nu, k)?;
        lattice.push((nu, (), v * w.powf(shift)));
        flat.push((nu, (), v * wtilde_root(&ws, ranks[k])));
    }
    let lattice_norm = mixed_norm(lattice.into_iter(), sigma, &params.p2, &params.q2);
    let reindexed_norm = mixed_norm(flat.into_iter(), -delta, &params.p2, &params.q2);
    Ok(ReindexComparison { lattice_norm, reindexed_norm, ratio: lattice_norm / reindexed_norm })
}

pub fn reindex_equivalence_ratio(
    lambda: &LatticeSequence,
    params: &EmbeddingParams,
    gamma: &BlockIndex,
    table: &CubeWeightTable,
) -> Result<f64> {
    Ok(reindex_equivalence(lambda, params, gamma, table)?.ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::weights::enumerate_tau;

    fn e(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    fn g22() -> BlockIndex {
        BlockIndex::new(vec![2, 2]).unwrap()
    }

    #[test]
    fn besov_single_coefficient() {
        let lam: LatticeSequence = [(0, vec![0, 0], 1.0)].into_iter().collect();
        let v = besov_seq_norm(&lam, 3.0, &e("2"), &e("2"), &g22()).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        assert_eq!(besov_seq_norm(&LatticeSequence::new(), 1.0, &e("2"), &e("2"), &g22()).unwrap(), 0.0);
    }

    #[test]
    fn layered_examples() {
        let one = |_: u32, _: &u64| Some(1.0);
        let lam: FlatSequence = [(0, 5u64, -3.5)].into_iter().collect();
        assert_eq!(layered_norm(&lam, 0.0, &e("3"), &e("7/2"), one).unwrap(), 3.5);
        let lam: FlatSequence = [(0, 0u64, 1.0), (1, 0u64, 1.0)].into_iter().collect();
        let v = layered_norm(&lam, 1.0, &e("2"), &e("2"), one).unwrap();
        assert!((v - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(layered_norm(&lam, 1.0, &e("2"), &e("inf"), one).unwrap(), 2.0);
        assert!(matches!(
            layered_norm(&lam, 1.0, &e("2"), &e("2"), |nu, _| (nu == 0).then_some(1.0)),
            Err(Error::MissingWeight { level: 1 })
        ));
    }

    #[test]
    fn single_entry_reindex_ratio() {
        let table = enumerate_tau(&g22(), 8).unwrap();
        let params = EmbeddingParams::with_default_q(int(3), int(0), e("4/3"), e("4")).unwrap();
        let lam: LatticeSequence = [(0, vec![0, 0], 2.0)].into_iter().collect();
        // (1/16)^{1/4 − 3/4} / w̃₀^{1/4} = 4
        let r = reindex_equivalence_ratio(&lam, &params, &g22(), &table).unwrap();
        assert!((r - 4.0).abs() < 1e-12);
        assert!(reindex_equivalence_ratio(&LatticeSequence::new(), &params, &g22(), &table).is_err());
        let far: LatticeSequence = [(0, vec![8, 8], 1.0)].into_iter().collect();
        assert!(matches!(
            reindex_equivalence_ratio(&far, &params, &g22(), &table),
            Err(Error::SupportOutsideTable { level: 0 })
        ));
    }
}
