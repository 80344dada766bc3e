//! Diagonal operators `D_σ : ℓ_{p₁} → ℓ_{p₂}` with `σ_k ≍ k^{−α}(log₂ k)^β`.

mod allocation;
mod finite;

use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;

pub use allocation::{AllocationMethod, BlockChoice, BlockFamily, RankAllocation};
pub use finite::{approx_finite_id, BoundStatus, FiniteIdApprox};

use crate::error::{Error, Result};
use crate::params::{approximation_t, Exponent};
use crate::rates::{crosses_two, diag_regime, Regime};
use crate::rational::{fmt_rat, to_f64, Rat};
use crate::series::power_log_tail_integral;
use allocation::{allocate_greedy, BlockOptions, DpTable};
use finite::IdCase;

/// Ranks up to this size are allocated by dynamic programming.
pub const DP_RANK_LIMIT: u64 = 1 << 14;

/// `σ_k = min(1, k^{−α}(log₂ k)^β)` once `k ≥ e^{β/α}`, and `σ_k = 1` before.
///
/// `k^{−α}(log₂ k)^β` increases up to `k = e^{β/α}` and decreases after it,
/// so the clamp keeps the sequence nonincreasing and bounded by 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecaySequence {
    #[serde(with = "crate::params::rat_serde")]
    pub alpha: Rat,
    #[serde(with = "crate::params::rat_serde")]
    pub beta: Rat,
}

impl DecaySequence {
    pub fn new(alpha: Rat, beta: Rat) -> Result<Self> {
        if !alpha.is_positive() {
            return Err(Error::Precondition(format!("alpha = {} must be positive", fmt_rat(&alpha))));
        }
        if beta.is_negative() {
            return Err(Error::Precondition(format!("beta = {} must be nonnegative", fmt_rat(&beta))));
        }
        let seq = DecaySequence { alpha, beta };
        if seq.beta_f64() > 25.0 * seq.alpha_f64() {
            return Err(Error::Precondition("beta/alpha above 25 puts the peak beyond 1e10".into()));
        }
        Ok(seq)
    }

    pub fn alpha_f64(&self) -> f64 {
        to_f64(&self.alpha)
    }

    pub fn beta_f64(&self) -> f64 {
        to_f64(&self.beta)
    }

    /// Index where the raw expression peaks, `e^{β/α}`.
    pub fn cutoff(&self) -> f64 {
        (self.beta_f64() / self.alpha_f64()).exp()
    }

    /// `σ_k` for a real index `x ≥ 1`; block starts can exceed `u64`.
    pub fn sigma_at(&self, x: f64) -> f64 {
        let (a, b) = (self.alpha_f64(), self.beta_f64());
        if x < self.cutoff() {
            return 1.0;
        }
        let raw = if b == 0.0 { x.powf(-a) } else { x.powf(-a) * x.log2().powf(b) };
        raw.min(1.0)
    }

    pub fn sigma(&self, k: u64) -> f64 {
        self.sigma_at(k as f64)
    }

    /// `σ_1, …, σ_n`
    pub fn truncate(&self, n: usize) -> Vec<f64> {
        (1..=n as u64).map(|k| self.sigma(k)).collect()
    }

    /// `(Σ_{j≥s} σ_j^r)` for `αr > 1`, bounded above by a partial sum plus
    /// an integral over the monotone part.
    fn power_tail_sum(&self, r: f64, s: f64) -> f64 {
        let (a, b) = (self.alpha_f64(), self.beta_f64());
        let mut j = s.ceil().max(1.0);
        let mut acc = 0.0;
        // past the peak and below the clamp the integrand is decreasing
        let mut monotone_from = None;
        loop {
            if monotone_from.is_none() && j >= self.cutoff() + 1.0 && self.sigma_at(j) < 1.0 && j >= 2.0 {
                monotone_from = Some(j);
            }
            if monotone_from.is_some_and(|m| j >= m + 256.0 || j > 1e15) {
                break;
            }
            acc += self.sigma_at(j).powf(r);
            j += 1.0;
        }
        acc + self.sigma_at(j).powf(r) + power_log_tail_integral(a * r, b * r, j)
    }
}

/// `a_k(D_σ : ℓ_p → ℓ_p) = σ_k`.
pub fn approx_diag_same_p(seq: &DecaySequence, k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Precondition("rank must be at least 1".into()));
    }
    Ok(seq.sigma(k))
}

/// `a_k` of a finite diagonal on `ℓ_p^N`: the `k`-th largest `|σ_j|`, and 0
/// once `k > N`.
pub fn approx_diag_same_p_finite(entries: &[f64], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Precondition("rank must be at least 1".into()));
    }
    let mut sorted: Vec<f64> = entries.iter().map(|x| x.abs()).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(sorted.get(k - 1).copied().unwrap_or(0.0))
}

/// Whether a bound holds as stated or only up to an unknown constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConstantStatus {
    Exact,
    UpToConstant,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxNumberBound {
    pub k_grid: Vec<u64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower_status: ConstantStatus,
    pub upper_status: ConstantStatus,
    pub regime: Regime,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum AllocationStrategy {
    /// Dynamic programming up to [`DP_RANK_LIMIT`], greedy beyond.
    #[default]
    Auto,
    DynamicProgram,
    Greedy,
}

fn check_pair(seq: &DecaySequence, p1: &Exponent, p2: &Exponent) -> Result<IdCase> {
    let case = IdCase::classify(p1, p2)?;
    let floor = p2.inv() - p1.inv();
    if seq.alpha <= floor {
        return Err(Error::Precondition(format!(
            "alpha = {} must exceed 1/p2 - 1/p1 = {}",
            fmt_rat(&seq.alpha),
            fmt_rat(&floor)
        )));
    }
    Ok(case)
}

/// `1/r = 1/p₂ − 1/p₁` when `p₂ < p₁`.
fn shrink_r(p1: &Exponent, p2: &Exponent) -> Option<f64> {
    (p2 < p1).then(|| 1.0 / to_f64(&(p2.inv() - p1.inv())))
}

/// `‖D_σ∘Q_s‖` for the coordinates `j ≥ s`.
fn tail_norm(seq: &DecaySequence, r: Option<f64>, s: f64) -> f64 {
    match r {
        None => seq.sigma_at(s),
        Some(r) => seq.power_tail_sum(r, s).powf(1.0 / r),
    }
}

/// `‖D_σ : ℓ_{p₁} → ℓ_{p₂}‖`: `σ₁` when `p₁ ≤ p₂`, `‖σ‖_r` otherwise.
pub fn diagonal_norm(seq: &DecaySequence, p1: &Exponent, p2: &Exponent) -> Result<f64> {
    check_pair(seq, p1, p2)?;
    Ok(tail_norm(seq, shrink_r(p1, p2), 1.0))
}

fn block_family(seq: &DecaySequence, p1: &Exponent, p2: &Exponent) -> Result<BlockFamily> {
    if crosses_two(p1, p2) {
        let t = approximation_t(p1, p2)?;
        if &seq.alpha < t.inv() {
            return Ok(BlockFamily::Stretched { half_t: 0.5 * t.to_f64() });
        }
    }
    Ok(BlockFamily::Dyadic)
}

const MAX_BLOCKS: usize = 900;

/// Ranks beyond `2^53` are not exactly representable in the `f64` block
/// arithmetic.
pub const MAX_RANK: u64 = 1 << 53;

/// Upper bound for `a_K(D_σ : ℓ_{p₁} → ℓ_{p₂})` from block splitting.
pub fn block_split_upper(seq: &DecaySequence, p1: &Exponent, p2: &Exponent, k: u64) -> Result<(f64, RankAllocation)> {
    block_split_upper_with(seq, p1, p2, k, AllocationStrategy::Auto)
}

pub fn block_split_upper_with(
    seq: &DecaySequence,
    p1: &Exponent,
    p2: &Exponent,
    k: u64,
    strategy: AllocationStrategy,
) -> Result<(f64, RankAllocation)> {
    let case = check_pair(seq, p1, p2)?;
    if k == 0 {
        return Err(Error::Precondition("rank must be at least 1".into()));
    }
    let family = block_family(seq, p1, p2)?;
    let r = shrink_r(p1, p2);
    let norm = tail_norm(seq, r, 1.0);
    if k > MAX_RANK {
        return Err(Error::RankOutOfRange { rank: k, dimension: MAX_RANK });
    }
    if k == 1 {
        return Ok((norm, RankAllocation::norm_only(family, 1, norm)));
    }
    let budget = k - 1;
    let method = match strategy {
        AllocationStrategy::Auto if k <= DP_RANK_LIMIT => AllocationMethod::DynamicProgram,
        AllocationStrategy::Auto | AllocationStrategy::Greedy => AllocationMethod::Greedy,
        AllocationStrategy::DynamicProgram => AllocationMethod::DynamicProgram,
    };

    // Blocks that cannot use any rank are merged with everything after them
    // into one tail piece, whose norm is at most the sum of their norms.
    let blocks: Vec<BlockOptions> = family
        .blocks(MAX_BLOCKS)
        .into_iter()
        .map(|(start, size)| BlockOptions::new(case, start, size, seq.sigma_at(start), budget))
        .take_while(|b| b.options.len() > 1)
        .collect();
    let tail_at = |m: usize| -> (f64, f64) {
        let start = blocks.get(m).map_or_else(
            || blocks.last().map_or(1.0, |b| b.start + b.size),
            |b| b.start,
        );
        (start, tail_norm(seq, r, start))
    };
    // the number of blocks kept before the tail is optimised as well
    let (m, sum, picks) = match method {
        AllocationMethod::Greedy => (0..=blocks.len())
            .map(|m| {
                let (v, p) = allocate_greedy(&blocks[..m], budget);
                (m, v, p)
            })
            .min_by(|a, b| (a.1 + tail_at(a.0).1).total_cmp(&(b.1 + tail_at(b.0).1)))
            .expect("nonempty range"),
        _ => {
            let dp = DpTable::run(&blocks, budget);
            let m = (0..=blocks.len())
                .min_by(|&a, &b| (dp.prefix_best[a] + tail_at(a).1).total_cmp(&(dp.prefix_best[b] + tail_at(b).1)))
                .expect("nonempty range");
            (m, dp.prefix_best[m], dp.picks(m))
        }
    };
    let (tail_start, tail) = tail_at(m);
    let chosen: Vec<BlockChoice> = blocks[..m]
        .iter()
        .zip(&picks)
        .map(|(b, &j)| BlockChoice { start: b.start, size: b.size, rank: b.options[j].0 + 1, bound: b.options[j].1 })
        .collect();
    let used_rank = chosen.iter().map(|c| c.rank - 1).sum::<u64>() + 1;
    let total = sum + tail;
    // zeroing the first K − 1 coordinates is always available
    let truncation = tail_norm(seq, r, k as f64);
    let alloc = RankAllocation {
        family,
        method,
        blocks: chosen,
        tail_start,
        tail_bound: tail,
        target_rank: k,
        used_rank,
        total,
        truncation,
    };
    Ok((total.min(truncation).min(norm), alloc))
}

/// Lower estimate `σ_N · a_K(id : ℓ_{p₁}^N → ℓ_{p₂}^N)`, valid up to a constant.
///
/// `N = 4K`, except below the crossover (`p₁ < 2 < p₂`, `α < 1/t`) where
/// `N = ⌊(4K)^{t/2}⌋`.
pub fn section_lower_bound(seq: &DecaySequence, p1: &Exponent, p2: &Exponent, k: u64) -> Result<(f64, ConstantStatus)> {
    let case = check_pair(seq, p1, p2)?;
    if k == 0 {
        return Err(Error::Precondition("rank must be at least 1".into()));
    }
    let four_k = 4.0 * k as f64;
    let n = match block_family(seq, p1, p2)? {
        BlockFamily::Stretched { half_t } => four_k.powf(half_t).floor(),
        BlockFamily::Dyadic => four_k,
    };
    if k as f64 > n / 4.0 {
        return Err(Error::RankOutOfRange { rank: k, dimension: n as u64 });
    }
    Ok((seq.sigma_at(n) * case.value(n, k as f64), ConstantStatus::UpToConstant))
}

/// Upper and lower arrays over a rank grid, each made nonincreasing.
pub fn approx_number_bounds(seq: &DecaySequence, p1: &Exponent, p2: &Exponent, k_grid: &[u64]) -> Result<ApproxNumberBound> {
    if k_grid.is_empty() || k_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("rank grid must be nonempty and strictly ascending".into()));
    }
    let regime = diag_regime(&seq.alpha, p1, p2)?;
    let rows: Vec<(f64, f64)> = k_grid
        .par_iter()
        .map(|&k| Ok((block_split_upper(seq, p1, p2, k)?.0, section_lower_bound(seq, p1, p2, k)?.0)))
        .collect::<Result<_>>()?;
    let mut upper: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let mut lower: Vec<f64> = rows.iter().map(|r| r.1).collect();
    // a_K is nonincreasing, so a bound at K transfers to every larger rank
    for i in 1..upper.len() {
        upper[i] = upper[i].min(upper[i - 1]);
    }
    for i in (0..lower.len().saturating_sub(1)).rev() {
        lower[i] = lower[i].max(lower[i + 1]);
    }
    let upper_status = match regime {
        Regime::A | Regime::D => ConstantStatus::Exact,
        Regime::B | Regime::C => ConstantStatus::UpToConstant,
    };
    Ok(ApproxNumberBound {
        k_grid: k_grid.to_vec(),
        lower,
        upper,
        lower_status: ConstantStatus::UpToConstant,
        upper_status,
        regime,
    })
}

/// `[2^a, 2^{a+1}, …, 2^b]`
pub fn dyadic_grid(min_exp: u32, max_exp: u32) -> Vec<u64> {
    (min_exp..=max_exp).map(|e| 1u64 << e).collect()
}
