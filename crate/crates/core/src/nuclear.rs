//! Nuclear norms of diagonal operators `D_τ : ℓ_{r₁} → ℓ_{r₂}` through the
//! Tong exponent, and the nuclearity criterion for embeddings.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{rat_serde, BlockIndex, EmbeddingParams, Exponent};
use crate::rational::{int, to_f64, Rat};
use crate::seqspace::lp_norm;
use crate::series::{power_log_tail_integral, Bracket};
use crate::weights::log_corrected_base;

/// `t(r₁, r₂)`: `1/t = 1` when `r₂ ≤ r₁`, `1/t = 1 − 1/r₁ + 1/r₂` otherwise.
/// It is infinite only for `(r₁, r₂) = (1, ∞)`.
pub fn tong_exponent(r1: &Exponent, r2: &Exponent) -> Result<Exponent> {
    for r in [r1, r2] {
        if !r.is_banach() {
            return Err(Error::InvalidExponent(format!("r = {r} must lie in [1, inf]")));
        }
    }
    let inv = if r2 <= r1 { Rat::one() } else { Rat::one() - r1.inv() + r2.inv() };
    Exponent::from_inv(inv)
}

/// Diagonal entries `τ`, either finitely many or an infinite family whose
/// tail is known in closed form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum TauSequence {
    Finite(Vec<f64>),
    /// `τ_j = first · ratio^{j−1}`, `0 < ratio ≤ 1`
    Geometric { first: f64, ratio: f64 },
    /// `τ_j = scale · j^{−α} max(1, log₂ j)^β`, `α > 0`, `β ≥ 0`
    PowerLog { scale: f64, alpha: f64, beta: f64 },
}

impl TauSequence {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            TauSequence::Finite(v) => v.iter().all(|x| x.is_finite()),
            TauSequence::Geometric { first, ratio } => *first > 0.0 && *ratio > 0.0 && *ratio <= 1.0,
            TauSequence::PowerLog { scale, alpha, beta } => *scale > 0.0 && *alpha > 0.0 && *beta >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("invalid diagonal {self:?}")))
        }
    }

    fn power_log_term(scale: f64, alpha: f64, beta: f64, j: f64) -> f64 {
        scale * j.powf(-alpha) * j.log2().max(1.0).powf(beta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum NuclearNorm {
    Exact { value: f64 },
    /// Partial sum plus the integral-test bounds for the tail.
    Bracketed { bracket: Bracket },
    /// `t = ∞` and `τ` does not tend to 0: bounded, yet not nuclear.
    SupWithoutDecay { sup: f64 },
    Infinite { certificate: String },
}

impl NuclearNorm {
    pub fn is_nuclear(&self) -> bool {
        matches!(self, NuclearNorm::Exact { .. } | NuclearNorm::Bracketed { .. })
    }

    /// The exact value, or the midpoint of the bracket.
    pub fn estimate(&self) -> Option<f64> {
        match self {
            NuclearNorm::Exact { value } => Some(*value),
            NuclearNorm::Bracketed { bracket } => Some(bracket.midpoint()),
            _ => None,
        }
    }
}

/// `v(D_τ : ℓ_{r₁} → ℓ_{r₂}) = ‖τ | ℓ_{t(r₁,r₂)}‖`, with `c₀` in place of
/// `ℓ_∞` when `t = ∞`.
pub fn tong_nuclear_norm(tau: &TauSequence, r1: &Exponent, r2: &Exponent) -> Result<NuclearNorm> {
    tau.validate()?;
    let t = tong_exponent(r1, r2)?;
    let tf = t.to_f64();
    Ok(match *tau {
        TauSequence::Finite(ref v) => NuclearNorm::Exact { value: lp_norm(v, &t) },
        TauSequence::Geometric { first, ratio } => {
            if ratio == 1.0 {
                if t.is_infinite() {
                    NuclearNorm::SupWithoutDecay { sup: first }
                } else {
                    NuclearNorm::Infinite { certificate: format!("constant entries {first} are not in l_{t}") }
                }
            } else if t.is_infinite() {
                NuclearNorm::Exact { value: first }
            } else {
                NuclearNorm::Exact { value: first / (1.0 - ratio.powf(tf)).powf(1.0 / tf) }
            }
        }
        TauSequence::PowerLog { scale, alpha, beta } => {
            // increasing up to e^{β/α}, nonincreasing afterwards
            let peak = (beta / alpha).exp();
            if t.is_infinite() {
                let head = peak.floor().max(1.0);
                let sup = [head, head + 1.0]
                    .iter()
                    .map(|&j| TauSequence::power_log_term(scale, alpha, beta, j))
                    .fold(0.0, f64::max);
                NuclearNorm::Exact { value: sup }
            } else if alpha * tf <= 1.0 {
                NuclearNorm::Infinite {
                    certificate: format!("terms decay like j^-{} (log j)^{} with exponent {} <= 1", alpha * tf, beta * tf, alpha * tf),
                }
            } else {
                NuclearNorm::Bracketed { bracket: power_log_bracket(scale, alpha, beta, tf, peak) }
            }
        }
    })
}

/// Brackets `(Σ τ_j^t)^{1/t}` by summing until the integral bounds agree to
/// about twelve digits.
fn power_log_bracket(scale: f64, alpha: f64, beta: f64, t: f64, peak: f64) -> Bracket {
    let (a, b, c) = (alpha * t, beta * t, scale.powf(t));
    let mut sum = 0.0f64;
    let mut j = 1.0f64;
    let mut end = (peak.ceil() + 2.0).max(1024.0);
    loop {
        while j <= end {
            sum += TauSequence::power_log_term(scale, alpha, beta, j).powf(t);
            j += 1.0;
        }
        // Σ_{j>J} f(j) lies between ∫_{J+1}^∞ f and ∫_J^∞ f
        let lo = c * power_log_tail_integral(a, b, end + 1.0);
        let hi = c * power_log_tail_integral(a, b, end);
        if hi - lo <= 1e-13 * (sum + lo) || end >= 1e8 {
            return Bracket { lower: sum + lo, upper: sum + hi }.root(t);
        }
        end *= 4.0;
    }
}

/// `v(T) = Σᵢ ‖T eᵢ | ℓ_{r₂}‖` for `T` defined on `ℓ_∞^n`, given its columns.
pub fn linfty_source_nuclear_norm(columns: &[Vec<f64>], r2: &Exponent) -> f64 {
    columns.iter().map(|c| lp_norm(c, r2)).sum()
}

/// The three quantities compared by the nuclearity criterion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NuclearityWitness {
    pub nuclear: bool,
    /// `(s₁ − s₂)/d`
    #[serde(with = "rat_serde")]
    pub smoothness_ratio: Rat,
    /// `1/p₁ − 1/p₂`
    #[serde(with = "rat_serde")]
    pub inv_p: Rat,
    /// `1/γ₁`
    #[serde(with = "rat_serde")]
    pub inv_gamma1: Rat,
}

/// Nuclear iff `(s₁ − s₂)/d > 1/p₁ − 1/p₂ > 1/γ₁`, compared exactly.
pub fn is_nuclear_embedding(gamma: &BlockIndex, params: &EmbeddingParams) -> NuclearityWitness {
    let smoothness_ratio = (&params.s1 - &params.s2) / int(gamma.d() as i64);
    let inv_p = params.inv_p();
    let inv_gamma1 = Rat::one() / int(gamma.gamma1() as i64);
    let nuclear = smoothness_ratio > inv_p && inv_p > inv_gamma1;
    NuclearityWitness { nuclear, smoothness_ratio, inv_p, inv_gamma1 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesVerdict {
    Convergent,
    Divergent,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesDiagnostic {
    pub tong_t: Exponent,
    /// `e = (γ₁−1)(1/p₂−1/p₁) t`; absent when `t = ∞`.
    #[serde(with = "opt_rat")]
    pub exponent: Option<Rat>,
    /// `(ℓ, Σ_{2 ≤ j ≤ ℓ} term_j)` at powers of two and at `L`; running
    /// suprema instead of sums when `t = ∞`.
    pub partial_sums: Vec<(u64, f64)>,
    pub verdict: SeriesVerdict,
    /// Set when `e = −1`: the terms are `ℓ^{−1} log^{κ} ℓ` and `κ` decides.
    #[serde(with = "opt_rat")]
    pub boundary_log_exponent: Option<Rat>,
    /// Bracket for the full series, when convergent and the tail is monotone.
    pub total: Option<Bracket>,
}

/// Partial sums of `Σ_{ℓ≥2} (ℓ log₂^{1−n} ℓ)^e` and the exact exponent test.
pub fn nuclearity_series_diagnostic(gamma: &BlockIndex, p1: &Exponent, p2: &Exponent, terms: u64) -> Result<SeriesDiagnostic> {
    if p1 >= p2 {
        return Err(Error::Precondition(format!("the series needs p1 < p2, got {p1} and {p2}")));
    }
    if terms < 2 {
        return Err(Error::Precondition("the series starts at l = 2".into()));
    }
    let n = gamma.n();
    let g1 = int(gamma.gamma1() as i64 - 1);
    let t = tong_exponent(p1, p2)?;
    let checkpoints = |f: &dyn Fn(f64, f64) -> f64, e: f64, start: f64| -> Vec<(u64, f64)> {
        let mut out = Vec::new();
        let mut acc = start;
        let mut next = 2u64;
        for l in 2..=terms {
            acc = f(acc, log_corrected_base(l, n).powf(e));
            if l == next || l == terms {
                out.push((l, acc));
                next = next.saturating_mul(2);
            }
        }
        out
    };

    let Some(t_val) = t.value() else {
        // terms (ℓ log^{1−n} ℓ)^{1−γ₁}: equal to 1 at the clamp ℓ ≤ 1 and
        // tending to 0 since γ₁ > 1
        let sups = checkpoints(&|a, b| f64::max(a, b), to_f64(&-&g1), 1.0);
        return Ok(SeriesDiagnostic {
            tong_t: t,
            exponent: None,
            partial_sums: sups,
            verdict: SeriesVerdict::Convergent,
            boundary_log_exponent: None,
            total: None,
        });
    };
    let e = &g1 * (p2.inv() - p1.inv()) * t_val;
    let ef = to_f64(&e);
    let partial_sums = checkpoints(&|a, b| a + b, ef, 0.0);
    let minus_one = -Rat::one();
    let (verdict, boundary) = if e < minus_one {
        (SeriesVerdict::Convergent, None)
    } else if e == minus_one {
        // ℓ^{−1} (log₂ ℓ)^{n−1} diverges for every n ≥ 1
        (SeriesVerdict::Divergent, Some(int(n as i64 - 1)))
    } else {
        (SeriesVerdict::Divergent, None)
    };
    let total = (verdict == SeriesVerdict::Convergent)
        .then(|| {
            let a = -ef;
            let b = (n as f64 - 1.0) * a;
            let l = terms as f64;
            let monotone = l >= (b / a).exp() && log_corrected_base(terms, n) > 1.0;
            monotone.then(|| {
                let s = partial_sums.last().map(|x| x.1).unwrap_or(0.0);
                Bracket { lower: s + power_log_tail_integral(a, b, l + 1.0), upper: s + power_log_tail_integral(a, b, l) }
            })
        })
        .flatten();
    Ok(SeriesDiagnostic { tong_t: t, exponent: Some(e), partial_sums, verdict, boundary_log_exponent: boundary, total })
}

/// Sign of `δ = s₁ − s₂ − d(1/p₁ − 1/p₂)`.
pub fn delta_positive(gamma: &BlockIndex, params: &EmbeddingParams) -> bool {
    let delta = &params.s1 - &params.s2 - int(gamma.d() as i64) * params.inv_p();
    delta.is_positive() && !delta.is_zero()
}

mod opt_rat {
    use crate::rational::{fmt_rat, Rat};

    pub fn serialize<S: serde::Serializer>(r: &Option<Rat>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&fmt_rat(r)),
            None => s.serialize_none(),
        }
    }
}
