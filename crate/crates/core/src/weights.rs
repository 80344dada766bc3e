//! Block-radial cube weights `w_γ(Q_{ν,k}) = ∫_{Q_{ν,k}} ∏ |rᵢ|^{γᵢ−1} dr`,
//! the weight ordering of lattice cubes and the reindexed weight sequence.
//!
//! Every factor of the cube integral has the closed form
//!
//! ```text
//! ∫_{2^{-ν}(k−½)}^{2^{-ν}(k+½)} |t|^{γ−1} dt = N_γ(k) / (γ · 2^{γ(ν+1)}),
//! N_γ(k) = sign(2k+1)|2k+1|^γ − sign(2k−1)|2k−1|^γ,
//! ```
//!
//! so all weights at a fixed level share one denominator and the ordering of
//! cubes reduces to comparing the integer products `∏ N_{γᵢ}(kᵢ)`.

use std::io::Write;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{BlockIndex, Exponent};
use crate::rational::{fmt_rat, from_f64, int, to_f64, Rat};

/// `N_γ(k)` as an exact integer.
pub fn axis_numerator(gamma_i: u32, k: i64) -> BigInt {
    let hi = BigInt::from(2 * k + 1);
    let lo = BigInt::from(2 * k - 1);
    let signed_pow = |x: &BigInt| {
        let p = num_traits::pow(x.abs(), gamma_i as usize);
        if x.is_negative() { -p } else { p }
    };
    signed_pow(&hi) - signed_pow(&lo)
}

/// `N_γ(k)` in floating point, summed from the binomial expansion
/// `2 Σ_{j odd} C(γ,j) (2|k|)^{γ−j}` so no cancellation occurs.
pub fn axis_numerator_f64(gamma_i: u32, k: i64) -> f64 {
    if k == 0 {
        return 2.0;
    }
    let x = 2.0 * (k.unsigned_abs() as f64);
    let g = gamma_i as i32;
    let mut binom = 1.0f64;
    let mut sum = 0.0;
    for j in 1..=g {
        binom = binom * (g - j + 1) as f64 / j as f64;
        if j % 2 == 1 {
            sum += binom * x.powi(g - j);
        }
    }
    2.0 * sum
}

fn axis_numerator_u128(gamma_i: u32, k: i64) -> Option<u128> {
    axis_numerator(gamma_i, k).to_u128()
}

/// Common denominator `∏ γᵢ 2^{γᵢ(ν+1)}` of all level-`ν` cube weights.
pub fn level_denominator(gamma: &BlockIndex, nu: u32) -> BigInt {
    gamma
        .gammas()
        .iter()
        .map(|&g| BigInt::from(g) << (g as usize * (nu as usize + 1)))
        .product()
}

fn check_dim(gamma: &BlockIndex, k: &[i64]) -> Result<()> {
    if k.len() != gamma.m() {
        return Err(Error::DimensionMismatch { expected: gamma.m(), got: k.len() });
    }
    Ok(())
}

/// Exact `w_γ(Q_{ν,k})`.
pub fn cube_weight(gamma: &BlockIndex, nu: u32, k: &[i64]) -> Result<Rat> {
    check_dim(gamma, k)?;
    let numer: BigInt = gamma.gammas().iter().zip(k).map(|(&g, &ki)| axis_numerator(g, ki)).product();
    Ok(Rat::new(numer, level_denominator(gamma, nu)))
}

/// Floating-point `w_γ(Q_{ν,k})`, agreeing with [`cube_weight`] to ~1e−15
/// relative error.
pub fn cube_weight_f64(gamma: &BlockIndex, nu: u32, k: &[i64]) -> Result<f64> {
    check_dim(gamma, k)?;
    Ok(gamma
        .gammas()
        .iter()
        .zip(k)
        .map(|(&g, &ki)| {
            let scale = 2f64.powi(-((g * (nu + 1)) as i32));
            axis_numerator_f64(g, ki) * scale / g as f64
        })
        .product())
}

/// Limits for [`enumerate_tau`].
#[derive(Clone, Copy, Debug)]
pub struct EnumerationLimits {
    pub max_points: u128,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits { max_points: 1 << 25 }
    }
}

/// All lattice points of the box `|k|_∞ ≤ K`, sorted by increasing
/// `w_γ(Q_{0,k})` with lexicographic tie-break; the position in the sorted
/// order is the rank `τ(k)`.
#[derive(Clone, Debug)]
pub struct CubeWeightTable {
    gamma: BlockIndex,
    box_radius: u32,
    side: u64,
    /// `N_{γᵢ}(k)` for `k = −K..=K`, per axis
    axis: Vec<Vec<u128>>,
    denom: BigInt,
    order: Vec<u32>,
    rank_of: Vec<u32>,
}

pub fn enumerate_tau(gamma: &BlockIndex, box_radius: u32) -> Result<CubeWeightTable> {
    enumerate_tau_with(gamma, box_radius, EnumerationLimits::default())
}

pub fn enumerate_tau_with(gamma: &BlockIndex, box_radius: u32, limits: EnumerationLimits) -> Result<CubeWeightTable> {
    if box_radius < 1 {
        return Err(Error::Precondition("box radius must be at least 1".into()));
    }
    let side = 2 * box_radius as u64 + 1;
    let requested = (side as u128)
        .checked_pow(gamma.m() as u32)
        .unwrap_or(u128::MAX);
    let cap = limits.max_points.min(u32::MAX as u128);
    if requested > cap {
        return Err(Error::PointBudget { requested, cap });
    }
    let k_max = box_radius as i64;
    let largest: BigInt = gamma.gammas().iter().map(|&g| axis_numerator(g, k_max)).product();
    if largest.to_u128().is_none() {
        return Err(Error::WeightOverflow);
    }
    let axis: Vec<Vec<u128>> = gamma
        .gammas()
        .iter()
        .map(|&g| (-k_max..=k_max).map(|k| axis_numerator_u128(g, k).expect("checked above")).collect())
        .collect();

    let count = requested as u32;
    let numer_of = |idx: u32| -> u128 {
        let mut rest = idx as u64;
        let mut prod = 1u128;
        for a in axis.iter().rev() {
            prod *= a[(rest % side) as usize];
            rest /= side;
        }
        prod
    };
    let mut order: Vec<u32> = (0..count).collect();
    // the box index is lexicographic in k, so (weight, index) realises the tie-break
    order.par_sort_unstable_by_key(|&idx| (numer_of(idx), idx));
    let mut rank_of = vec![0u32; count as usize];
    for (rank, &idx) in order.iter().enumerate() {
        rank_of[idx as usize] = rank as u32;
    }
    Ok(CubeWeightTable {
        gamma: gamma.clone(),
        box_radius,
        side,
        axis,
        denom: level_denominator(gamma, 0),
        order,
        rank_of,
    })
}

impl CubeWeightTable {
    pub fn gamma(&self) -> &BlockIndex {
        &self.gamma
    }

    pub fn box_radius(&self) -> u32 {
        self.box_radius
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    fn decode(&self, idx: u32) -> Vec<i64> {
        let mut rest = idx as u64;
        let mut k = vec![0i64; self.gamma.m()];
        for slot in k.iter_mut().rev() {
            *slot = (rest % self.side) as i64 - self.box_radius as i64;
            rest /= self.side;
        }
        k
    }

    fn encode(&self, k: &[i64]) -> Option<u32> {
        let r = self.box_radius as i64;
        let mut idx = 0u64;
        for &ki in k {
            if ki.abs() > r {
                return None;
            }
            idx = idx * self.side + (ki + r) as u64;
        }
        Some(idx as u32)
    }

    fn numer_at(&self, idx: u32) -> u128 {
        let mut rest = idx as u64;
        let mut prod = 1u128;
        for a in self.axis.iter().rev() {
            prod *= a[(rest % self.side) as usize];
            rest /= self.side;
        }
        prod
    }

    /// Lattice point with rank `rank`.
    pub fn point(&self, rank: usize) -> Vec<i64> {
        self.decode(self.order[rank])
    }

    /// `τ(k)`, or `None` outside the box.
    pub fn rank(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.gamma.m() {
            return None;
        }
        self.encode(k).map(|idx| self.rank_of[idx as usize] as usize)
    }

    /// Integer numerator of the weight at `rank` (common denominator
    /// [`CubeWeightTable::denominator`]).
    pub fn numerator(&self, rank: usize) -> u128 {
        self.numer_at(self.order[rank])
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denom
    }

    pub fn weight(&self, rank: usize) -> Rat {
        Rat::new(BigInt::from(self.numerator(rank)), self.denom.clone())
    }

    pub fn weight_f64(&self, rank: usize) -> f64 {
        self.numerator(rank) as f64 / self.denom.to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, Vec<i64>, u128)> + '_ {
        self.order
            .iter()
            .enumerate()
            .map(|(rank, &idx)| (rank, self.decode(idx), self.numer_at(idx)))
    }

    /// Smallest weight numerator on the box boundary `|k|_∞ = K`.
    fn boundary_numerator(&self) -> u128 {
        let r = self.box_radius as usize;
        (0..self.gamma.m())
            .map(|i| {
                self.axis
                    .iter()
                    .enumerate()
                    .map(|(j, a)| if i == j { a[2 * r] } else { a[r] })
                    .product::<u128>()
            })
            .min()
            .expect("m >= 1")
    }

    /// Smallest weight on the box boundary. Every lattice point whose weight
    /// is strictly below it lies inside the box.
    pub fn boundary_weight(&self) -> Rat {
        Rat::new(BigInt::from(self.boundary_numerator()), self.denom.clone())
    }

    /// Number of leading ranks that coincide with the ranks of the infinite
    /// lattice ordering (weights strictly below the boundary weight).
    pub fn reliable_len(&self) -> usize {
        let b = self.boundary_numerator();
        self.order.partition_point(|&idx| self.numer_at(idx) < b)
    }

    /// Number of entries with numerator at most `limit`.
    fn count_numer_at_most(&self, limit: u128) -> usize {
        self.order.partition_point(|&idx| self.numer_at(idx) <= limit)
    }

    /// Writes `rank,k,weight` rows; `k` joins coordinates with `;`, weights
    /// carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["rank", "k", "weight"]).map_err(io)?;
        for (rank, k, _) in self.entries() {
            let coords: Vec<String> = k.iter().map(|c| c.to_string()).collect();
            w.write_record([rank.to_string(), coords.join(";"), format_sig17(self.weight_f64(rank))])
                .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Decimal rendering with 17 significant digits.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

/// `floor(threshold · denom)` as an integer limit on weight numerators;
/// `None` when the threshold is negative.
fn numerator_limit(threshold: &Rat, denom: &BigInt) -> Option<u128> {
    let scaled = threshold * Rat::from_integer(denom.clone());
    if scaled.is_negative() {
        return None;
    }
    Some(scaled.floor().to_integer().to_u128().unwrap_or(u128::MAX))
}

/// `count[j] = #{k in table : w(Q_{0,k}) ≤ thresholds[j]}`.
///
/// Thresholds must be ascending and strictly below the boundary weight, so
/// that each level set is contained in the box.
pub fn counting_profile(table: &CubeWeightTable, thresholds: &[f64]) -> Result<Vec<u64>> {
    if thresholds.iter().any(|t| t.is_nan()) || thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::UnsortedThresholds);
    }
    let boundary = table.boundary_weight();
    let mut out = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let exact = if t.is_finite() { Some(from_f64(t)?) } else { None };
        match exact {
            Some(e) if e < boundary => {
                let count = numerator_limit(&e, table.denominator())
                    .map_or(0, |lim| table.count_numer_at_most(lim));
                out.push(count as u64);
            }
            _ => {
                return Err(Error::ThresholdOutOfRange { threshold: t, boundary: to_f64(&boundary) });
            }
        }
    }
    Ok(out)
}

/// Exact `#{k ∈ ℤ^m : w_γ(Q_{0,k}) ≤ threshold}` over the whole lattice,
/// without truncation. Level sets are finite because every axis factor
/// grows with `|kᵢ|` and is at least `N_γ(0) = 2`.
pub fn count_lattice_at_most(gamma: &BlockIndex, threshold: &Rat) -> Result<u128> {
    match numerator_limit(threshold, &level_denominator(gamma, 0)) {
        Some(limit) => count_numerators(gamma.gammas(), limit),
        None => Ok(0),
    }
}

/// Exact `#{k ∈ ℤ^m : w_γ(Q_{0,k}) < threshold}`.
pub fn count_lattice_below(gamma: &BlockIndex, threshold: &Rat) -> Result<u128> {
    let scaled = threshold * Rat::from_integer(level_denominator(gamma, 0));
    if !scaled.is_positive() {
        return Ok(0);
    }
    let ceil = scaled.ceil().to_integer();
    let limit = (ceil - BigInt::one()).to_u128().unwrap_or(u128::MAX);
    count_numerators(gamma.gammas(), limit)
}

fn count_numerators(gammas: &[u32], limit: u128) -> Result<u128> {
    let (&g, rest) = gammas.split_first().expect("nonempty");
    if rest.is_empty() {
        return Ok(count_axis(g, limit));
    }
    let rest_min = 1u128 << rest.len(); // N(0) = 2 on every remaining axis
    let mut total = 0u128;
    for k in 0i64.. {
        let nk = match axis_numerator_u128(g, k) {
            Some(v) => v,
            None => break,
        };
        if nk.checked_mul(rest_min).is_none_or(|v| v > limit) {
            break;
        }
        let inner = count_numerators(rest, limit / nk)?;
        total += if k == 0 { inner } else { 2 * inner };
    }
    Ok(total)
}

/// `#{k ∈ ℤ : N_γ(k) ≤ limit}`.
fn count_axis(g: u32, limit: u128) -> u128 {
    let fits = |k: i64| axis_numerator_u128(g, k).is_some_and(|v| v <= limit);
    if !fits(0) {
        return 0;
    }
    let mut hi = 1i64;
    while fits(hi) {
        hi *= 2;
    }
    // fits(lo) && !fits(hi)
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) { lo = mid } else { hi = mid }
    }
    1 + 2 * lo as u128
}

/// Exponent of the reindexed weight `w̃`; `−∞` when `p₂ = ∞ > p₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightExponent {
    Finite(Rat),
    NegInfinity,
}

/// Parameters of `w̃^{(γ)}_ℓ = max(1, ℓ log₂^{1−n} ℓ)^{(γ₁−1)(1−p₂/p₁)}` and of
/// the diagonal sequence `(w̃_ℓ)^{1/p₂}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSequenceParams {
    pub gamma: BlockIndex,
    pub p1: Exponent,
    pub p2: Exponent,
    /// `(γ₁−1)(1 − p₂/p₁)`
    pub exponent_e: WeightExponent,
    /// `(γ₁−1)(1/p₂ − 1/p₁)`
    pub exponent_s: Rat,
}

impl WeightSequenceParams {
    pub fn new(gamma: &BlockIndex, p1: &Exponent, p2: &Exponent) -> Self {
        let g1 = int(gamma.gamma1() as i64 - 1);
        let exponent_s = &g1 * (p2.inv() - p1.inv());
        let exponent_e = if p1 == p2 {
            WeightExponent::Finite(Rat::zero())
        } else {
            match (p1.value(), p2.value()) {
                (_, None) => WeightExponent::NegInfinity,
                (None, Some(_)) => WeightExponent::Finite(g1.clone()),
                (Some(a), Some(b)) => WeightExponent::Finite(&g1 * (Rat::one() - b / a)),
            }
        };
        WeightSequenceParams { gamma: gamma.clone(), p1: p1.clone(), p2: p2.clone(), exponent_e, exponent_s }
    }
}

/// `max(1, ℓ · log₂(ℓ)^{1−n})`, with `ℓ ∈ {0, 1}` clamped to 1.
pub fn log_corrected_base(ell: u64, n: usize) -> f64 {
    if ell < 2 {
        return 1.0;
    }
    let l = ell as f64;
    (l * l.log2().powi(1 - n as i32)).max(1.0)
}

pub fn wtilde(params: &WeightSequenceParams, ell: u64) -> f64 {
    let base = log_corrected_base(ell, params.gamma.n());
    match &params.exponent_e {
        WeightExponent::Finite(e) => base.powf(to_f64(e)),
        WeightExponent::NegInfinity => {
            if base > 1.0 { 0.0 } else { 1.0 }
        }
    }
}

/// `σ_ℓ = (w̃_ℓ)^{1/p₂}`, read as `base^{(γ₁−1)(1/p₂−1/p₁)}` so that
/// `p₂ = ∞` needs no special case.
pub fn wtilde_root(params: &WeightSequenceParams, ell: u64) -> f64 {
    log_corrected_base(ell, params.gamma.n()).powf(to_f64(&params.exponent_s))
}

/// Summary of a table, for reports.
#[derive(Clone, Debug, Serialize)]
pub struct TableSummary {
    pub gamma: Vec<u32>,
    pub box_radius: u32,
    pub points: usize,
    pub reliable_points: usize,
    pub boundary_weight: String,
}

impl CubeWeightTable {
    pub fn summary(&self) -> TableSummary {
        TableSummary {
            gamma: self.gamma.gammas().to_vec(),
            box_radius: self.box_radius,
            points: self.len(),
            reliable_points: self.reliable_len(),
            boundary_weight: fmt_rat(&self.boundary_weight()),
        }
    }
}
