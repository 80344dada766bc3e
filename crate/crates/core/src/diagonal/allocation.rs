//! Block splitting of a diagonal operator and the rank allocation that turns
//! per-block bounds into a bound for the whole operator.
//!
//! `D_σ = Σᵢ D_σ∘Pᵢ + Q_M`, and additivity with `ρ = 1` gives
//! `a_{Σ(kᵢ−1)+1}(D_σ) ≤ Σ a_{kᵢ}(D_σ∘Pᵢ) + ‖Q_M‖`. Each block is bounded by
//! `σ_{start} · a_{kᵢ}(id : ℓ_{p₁}^{Nᵢ} → ℓ_{p₂}^{Nᵢ})`.

use serde::Serialize;

use super::finite::IdCase;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum BlockFamily {
    /// `[2^{i−1}, 2^i)`
    Dyadic,
    /// `[⌊2^{t(i−1)/2}⌋, ⌊2^{ti/2}⌋)`
    Stretched { half_t: f64 },
}

impl BlockFamily {
    /// Left end of block `i ≥ 1` (the right end is `edge(i + 1)`).
    fn edge(self, i: u32) -> f64 {
        match self {
            BlockFamily::Dyadic => 2f64.powi(i as i32 - 1),
            BlockFamily::Stretched { half_t } => 2f64.powf(half_t * (i as f64 - 1.0)).floor(),
        }
    }

    /// Nonempty blocks `(start, size)` for `i = 1..` until `count` are produced
    /// or the edges leave the finite `f64` range.
    pub fn blocks(self, count: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(count);
        let mut i = 1;
        while out.len() < count {
            let (lo, hi) = (self.edge(i), self.edge(i + 1));
            if !hi.is_finite() || hi > 1e300 {
                break;
            }
            if hi > lo {
                out.push((lo, hi - lo));
            }
            i += 1;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AllocationMethod {
    /// No blocks: the operator norm alone.
    NormOnly,
    DynamicProgram,
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockChoice {
    pub start: f64,
    pub size: f64,
    /// Rank `kᵢ ≥ 1` spent on the block.
    pub rank: u64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankAllocation {
    pub family: BlockFamily,
    pub method: AllocationMethod,
    pub blocks: Vec<BlockChoice>,
    pub tail_start: f64,
    pub tail_bound: f64,
    pub target_rank: u64,
    /// `Σ(kᵢ − 1) + 1`
    pub used_rank: u64,
    /// `Σ bounds + tail`, before capping by the operator norm.
    pub total: f64,
    /// `‖D_σ∘Q_K‖`, the bound from zeroing the first `K − 1` coordinates.
    pub truncation: f64,
}

impl RankAllocation {
    pub(crate) fn norm_only(family: BlockFamily, target_rank: u64, norm: f64) -> Self {
        RankAllocation {
            family,
            method: AllocationMethod::NormOnly,
            blocks: Vec::new(),
            tail_start: 1.0,
            tail_bound: norm,
            target_rank,
            used_rank: 1,
            total: norm,
            truncation: norm,
        }
    }
}

/// One block with its admissible `(cost, value)` options; cost is `k − 1`.
#[derive(Clone, Debug)]
pub(crate) struct BlockOptions {
    pub start: f64,
    pub size: f64,
    pub options: Vec<(u64, f64)>,
}

impl BlockOptions {
    pub(crate) fn new(case: IdCase, start: f64, size: f64, sigma_start: f64, budget: u64) -> Self {
        let mut ranks: Vec<u64> = vec![1];
        let n = size;
        let max_rank = budget + 1;
        let fits = |k: f64| k <= max_rank as f64;
        match case {
            IdCase::Flat { .. } => {}
            IdCase::Cross { inv_t } => {
                let first = n.powf(2.0 * inv_t).floor() + 1.0;
                if first <= n && fits(first) {
                    let last = n.min(max_rank as f64);
                    ranks.extend(geometric_grid(first as u64, last as u64));
                }
            }
            IdCase::Shrink { .. } => {
                // value depends on j = N − k + 1, from N down to 1; blocks
                // much larger than the budget gain at most a factor (3/4)^e
                let j_min = (n - budget as f64).max(1.0);
                if j_min < n && n <= 4.0 * max_rank as f64 {
                    let grid = geometric_grid(j_min as u64, n as u64);
                    ranks.extend(grid.into_iter().map(|j| (n - j as f64 + 1.0) as u64).filter(|&k| k > 1));
                }
            }
        }
        if fits(n + 1.0) {
            ranks.push(n as u64 + 1);
        }
        ranks.sort_unstable();
        ranks.dedup();
        let options = ranks
            .into_iter()
            .map(|k| (k - 1, sigma_start * case.value(n, k as f64)))
            .collect();
        BlockOptions { start, size, options }
    }

    fn free_value(&self) -> f64 {
        self.options[0].1
    }
}

/// Integers from `lo` to `hi` (inclusive) spaced by a factor of about
/// `2^{1/8}`, always containing both ends.
fn geometric_grid(lo: u64, hi: u64) -> Vec<u64> {
    let mut out = vec![lo];
    let mut x = lo as f64;
    loop {
        x *= 2f64.powf(0.125);
        let k = x.round() as u64;
        if k >= hi {
            break;
        }
        if k > *out.last().unwrap() {
            out.push(k);
        }
    }
    if hi > lo {
        out.push(hi);
    }
    out
}

/// Knapsack over `budget + 1` states, keeping the optimum of every prefix.
pub(crate) struct DpTable {
    /// `prefix_best[m]`: minimal sum over `blocks[..m]`
    pub prefix_best: Vec<f64>,
    choice: Vec<Vec<u16>>,
    costs: Vec<Vec<u64>>,
    budget: usize,
}

impl DpTable {
    pub(crate) fn run(blocks: &[BlockOptions], budget: u64) -> Self {
        let states = budget as usize + 1;
        let mut best = vec![0.0f64; states];
        let mut prefix_best = vec![0.0];
        let mut choice = Vec::with_capacity(blocks.len());
        for b in blocks {
            let mut next = vec![f64::INFINITY; states];
            let mut pick = vec![0u16; states];
            for (j, &(cost, val)) in b.options.iter().enumerate() {
                let cost = cost as usize;
                for s in cost..states {
                    let v = best[s - cost] + val;
                    if v < next[s] {
                        next[s] = v;
                        pick[s] = j as u16;
                    }
                }
            }
            best = next;
            prefix_best.push(best[states - 1]);
            choice.push(pick);
        }
        let costs = blocks.iter().map(|b| b.options.iter().map(|o| o.0).collect()).collect();
        DpTable { prefix_best, choice, costs, budget: budget as usize }
    }

    /// Option indices attaining `prefix_best[m]`.
    pub(crate) fn picks(&self, m: usize) -> Vec<usize> {
        let mut picks = vec![0usize; m];
        let mut s = self.budget;
        for i in (0..m).rev() {
            let j = self.choice[i][s] as usize;
            picks[i] = j;
            s -= self.costs[i][j] as usize;
        }
        picks
    }
}

/// Lagrangian relaxation followed by a greedy fill of the leftover budget.
pub(crate) fn allocate_greedy(blocks: &[BlockOptions], budget: u64) -> (f64, Vec<usize>) {
    let pick_for = |lambda: f64| -> Vec<usize> {
        blocks
            .iter()
            .map(|b| {
                let mut best = (f64::INFINITY, 0);
                for (j, &(cost, val)) in b.options.iter().enumerate() {
                    let score = val + lambda * cost as f64;
                    if score < best.0 {
                        best = (score, j);
                    }
                }
                best.1
            })
            .collect()
    };
    let cost_of = |picks: &[usize]| -> u64 { picks.iter().zip(blocks).map(|(&j, b)| b.options[j].0).sum() };

    let mut hi = blocks.iter().map(|b| b.free_value()).fold(1e-300, f64::max) * 2.0;
    let mut lo = hi * 1e-30;
    if cost_of(&pick_for(lo)) <= budget {
        hi = lo;
    } else {
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if cost_of(&pick_for(mid)) <= budget { hi = mid } else { lo = mid }
        }
    }
    let mut picks = pick_for(hi);
    let mut left = budget - cost_of(&picks);
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, b) in blocks.iter().enumerate() {
            let (cur_cost, cur_val) = b.options[picks[i]];
            for (j, &(cost, val)) in b.options.iter().enumerate() {
                if cost > cur_cost && cost - cur_cost <= left && val < cur_val {
                    let gain = cur_val - val;
                    if best.is_none_or(|(g, _, _)| gain > g) {
                        best = Some((gain, i, j));
                    }
                }
            }
        }
        match best {
            Some((_, i, j)) => {
                left -= blocks[i].options[j].0 - blocks[i].options[picks[i]].0;
                picks[i] = j;
            }
            None => break,
        }
    }
    let total = picks.iter().zip(blocks).map(|(&j, b)| b.options[j].1).sum();
    (total, picks)
}
