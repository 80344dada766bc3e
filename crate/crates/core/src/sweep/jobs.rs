use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::{PointRecord, Report, SweepConfig};
use crate::diagonal::{approx_number_bounds, DecaySequence};
use crate::error::{Error, Result};
use crate::fit::{fit_rate_law, RateFit};
use crate::nuclear::{delta_positive, is_nuclear_embedding, nuclearity_series_diagnostic, SeriesVerdict};
use crate::params::{derive_exponents, is_compact_embedding, BlockIndex, EmbeddingParams};
use crate::rates::{embedding_rate, rate_envelope_diag, RateLaw};
use crate::rational::{fmt_rat, int, Rat};
use crate::seqspace::{reindex_equivalence_ratio, LatticeSequence};
use crate::weights::{count_lattice_at_most, counting_profile, enumerate_tau, CubeWeightTable};

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize to JSON")
}

fn embedding_point(gamma: &BlockIndex, p: &EmbeddingParams) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("gamma".into(), json!(gamma.to_string()));
    m.insert("s1".into(), json!(fmt_rat(&p.s1)));
    m.insert("s2".into(), json!(fmt_rat(&p.s2)));
    for (k, e) in [("p1", &p.p1), ("p2", &p.p2), ("q1", &p.q1), ("q2", &p.q2)] {
        m.insert(k.into(), json!(e.to_string()));
    }
    m
}

/// Cartesian product in the order gamma, s1, s2, p1, p2, q1, q2.
fn embedding_points(config: &SweepConfig) -> Vec<(BlockIndex, Result<EmbeddingParams>, Map<String, Value>)> {
    let g = &config.grid;
    let mut out = Vec::new();
    for gamma in &config.gammas {
        for s1 in &g.s1 {
            for s2 in &g.s2 {
                for p1 in &g.p1 {
                    for p2 in &g.p2 {
                        for q1 in &g.q1 {
                            for q2 in &g.q2 {
                                let params = EmbeddingParams::new(s1.clone(), s2.clone(), p1.clone(), p2.clone(), q1.clone(), q2.clone());
                                let probe = EmbeddingParams { s1: s1.clone(), s2: s2.clone(), p1: p1.clone(), p2: p2.clone(), q1: q1.clone(), q2: q2.clone() };
                                out.push((gamma.clone(), params, embedding_point(gamma, &probe)));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn fit_value(fit: &RateFit, law: &RateLaw, config: &SweepConfig) -> Value {
    let mut v = to_value(fit);
    v["alpha_within_tolerance"] = json!((fit.alpha_hat - law.alpha_f64()).abs() <= config.tolerance.alpha);
    v["beta_within_tolerance"] = json!((fit.beta_hat - law.beta_f64()).abs() <= config.tolerance.beta);
    v
}

fn samples(k: &[u64], v: &[f64]) -> Vec<(f64, f64)> {
    k.iter().zip(v).map(|(&k, &v)| (k as f64, v)).collect()
}

/// Rate of the diagonal operator the embedding reduces to, fitted from the
/// constructive upper bounds.
fn embedding_fit(gamma: &BlockIndex, params: &EmbeddingParams, law: &RateLaw, config: &SweepConfig) -> Result<Value> {
    let Some(grid) = config.k_grid() else { return Ok(Value::Null) };
    let alpha = int(gamma.gamma1() as i64 - 1) * params.inv_p();
    let beta = int(gamma.n() as i64 - 1) * &alpha;
    let seq = DecaySequence::new(alpha, beta)?;
    let bounds = approx_number_bounds(&seq, &params.p1, &params.p2, &grid)?;
    let fit = fit_rate_law(&samples(&grid, &bounds.upper))?;
    Ok(fit_value(&fit, law, config))
}

pub(super) fn rates(config: &SweepConfig) -> Result<Report> {
    let points = embedding_points(config);
    let records: Vec<PointRecord> = points
        .into_par_iter()
        .enumerate()
        .map(|(i, (gamma, params, point))| {
            let outcome = params.and_then(|params| {
                let compact = is_compact_embedding(&params, &gamma);
                let derived = derive_exponents(&params, &gamma);
                let mut v = json!({
                    "compact": compact,
                    "delta": fmt_rat(&derived.delta),
                    "nuclear": to_value(&is_nuclear_embedding(&gamma, &params)),
                    "rate": null,
                    "law": null,
                    "fit": null,
                });
                if compact {
                    let law = embedding_rate(&gamma, &params)?;
                    v["law"] = json!(law.to_string());
                    v["rate"] = to_value(&law);
                    v["fit"] = embedding_fit(&gamma, &params, &law, config)?;
                }
                Ok(v)
            });
            PointRecord::new(i, point, outcome)
        })
        .collect();
    let within = records
        .iter()
        .filter(|r| r.result.as_ref().is_some_and(|v| v["fit"]["alpha_within_tolerance"] == json!(true)))
        .count();
    let columns = vec![
        "gamma", "s1", "s2", "p1", "p2", "q1", "q2", "compact", "delta", "rate.regime", "rate.alpha_out", "rate.beta_out", "law",
        "nuclear.nuclear", "fit.alpha_hat", "fit.beta_hat", "fit.r2", "fit.low_confidence", "fit.alpha_within_tolerance",
        "fit.beta_within_tolerance",
    ];
    Ok(Report::new(config, columns, records, json!({ "alpha_within_tolerance": within })))
}

pub(super) fn diag(config: &SweepConfig) -> Result<Report> {
    let g = &config.grid;
    let grid = config.k_grid().expect("checked by the config");
    let mut points = Vec::new();
    for a in &g.alpha {
        for b in &g.beta {
            for p1 in &g.p1 {
                for p2 in &g.p2 {
                    points.push((a.clone(), b.clone(), p1.clone(), p2.clone()));
                }
            }
        }
    }
    let records: Vec<PointRecord> = points
        .into_par_iter()
        .enumerate()
        .map(|(i, (a, b, p1, p2))| {
            let mut point = Map::new();
            point.insert("alpha".into(), json!(fmt_rat(&a)));
            point.insert("beta".into(), json!(fmt_rat(&b)));
            point.insert("p1".into(), json!(p1.to_string()));
            point.insert("p2".into(), json!(p2.to_string()));
            let outcome = (|| {
                let law = rate_envelope_diag(&a, &b, &p1, &p2)?;
                let seq = DecaySequence::new(a.clone(), b.clone())?;
                let bounds = approx_number_bounds(&seq, &p1, &p2, &grid)?;
                let upper = fit_rate_law(&samples(&grid, &bounds.upper))?;
                let lower = fit_rate_law(&samples(&grid, &bounds.lower))?;
                Ok(json!({
                    "predicted": to_value(&law),
                    "law": law.to_string(),
                    "bounds": to_value(&bounds),
                    "fit_upper": fit_value(&upper, &law, config),
                    "fit_lower": fit_value(&lower, &law, config),
                }))
            })();
            PointRecord::new(i, point, outcome)
        })
        .collect();
    let columns = vec![
        "alpha", "beta", "p1", "p2", "predicted.regime", "predicted.alpha_out", "predicted.beta_out", "law", "bounds.upper_status",
        "fit_upper.alpha_hat", "fit_upper.beta_hat", "fit_upper.r2", "fit_upper.low_confidence", "fit_upper.alpha_within_tolerance",
        "fit_lower.alpha_hat", "fit_lower.beta_hat", "fit_lower.alpha_within_tolerance",
    ];
    Ok(Report::new(config, columns, records, Value::Null))
}

/// Least-squares slope of `y` against `x`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub(super) fn lattice(config: &SweepConfig) -> Result<Report> {
    let section = config.lattice.as_ref().expect("checked by the config");
    let exps = &section.thresholds_log2;
    let per_gamma: Vec<(Vec<Result<u128>>, Option<Result<CubeWeightTable>>)> = config
        .gammas
        .par_iter()
        .map(|gamma| {
            let counts = exps.iter().map(|&e| count_lattice_at_most(gamma, &Rat::from_integer(num_bigint::BigInt::from(1u64) << e))).collect();
            let table = section.box_radius.map(|r| enumerate_tau(gamma, r));
            (counts, table)
        })
        .collect();
    let mut records = Vec::new();
    let mut summary = Vec::new();
    for (gamma, (counts, table)) in config.gammas.iter().zip(per_gamma) {
        let n = gamma.n() as i32;
        let mut xs = Vec::new();
        let (mut raw, mut norm) = (Vec::new(), Vec::new());
        let mut ratios = Vec::new();
        for (&e, count) in exps.iter().zip(counts) {
            let mut point = Map::new();
            point.insert("gamma".into(), json!(gamma.to_string()));
            point.insert("log2_threshold".into(), json!(e));
            let outcome = count.and_then(|count| {
                let threshold = 2f64.powi(e as i32);
                let log_factor = (e.max(1) as f64).powi(n - 1);
                let ratio = count as f64 / (threshold * log_factor);
                let table_count = match &table {
                    Some(Ok(t)) => counting_profile(t, &[threshold]).ok().map(|c| c[0]),
                    Some(Err(err)) => return Err(err.clone()),
                    None => None,
                };
                if table_count.is_some_and(|c| c as u128 != count) {
                    return Err(Error::Precondition(format!("table count {table_count:?} disagrees with exact count {count}")));
                }
                if count > 0 {
                    xs.push(e as f64);
                    raw.push((count as f64).log2());
                    norm.push((count as f64 / log_factor).log2());
                    ratios.push(ratio);
                }
                Ok(json!({ "count": count.to_string(), "table_count": table_count, "normalized": ratio }))
            });
            records.push(PointRecord::new(records.len(), point, outcome));
        }
        let enough = xs.len() >= 2;
        summary.push(json!({
            "gamma": gamma.to_string(),
            "raw_slope": enough.then(|| slope(&xs, &raw)),
            "normalized_slope": enough.then(|| slope(&xs, &norm)),
            "ratio_min": ratios.iter().copied().reduce(f64::min),
            "ratio_max": ratios.iter().copied().reduce(f64::max),
            "table": match &table { Some(Ok(t)) => to_value(&t.summary()), _ => Value::Null },
        }));
    }
    let columns = vec!["gamma", "log2_threshold", "count", "table_count", "normalized"];
    Ok(Report::new(config, columns, records, Value::Array(summary)))
}

pub(super) fn nuclear(config: &SweepConfig) -> Result<Report> {
    let terms = config.nuclear.terms;
    let records: Vec<PointRecord> = embedding_points(config)
        .into_par_iter()
        .enumerate()
        .map(|(i, (gamma, params, point))| {
            let outcome = params.and_then(|params| {
                let witness = is_nuclear_embedding(&gamma, &params);
                let delta = delta_positive(&gamma, &params);
                let (series, consistent) = if params.p1 < params.p2 {
                    let d = nuclearity_series_diagnostic(&gamma, &params.p1, &params.p2, terms)?;
                    let agree = witness.nuclear == (d.verdict == SeriesVerdict::Convergent && delta);
                    let last = d.partial_sums.last().map(|s| s.1);
                    let mut v = to_value(&d);
                    v["last_partial"] = json!(last);
                    (v, agree)
                } else {
                    (Value::Null, !witness.nuclear)
                };
                if !consistent {
                    return Err(Error::Precondition("criterion and series verdict disagree".into()));
                }
                Ok(json!({
                    "witness": to_value(&witness),
                    "delta_positive": delta,
                    "series": series,
                    "consistent": consistent,
                }))
            });
            PointRecord::new(i, point, outcome)
        })
        .collect();
    let nuclear_count = records
        .iter()
        .filter(|r| r.result.as_ref().is_some_and(|v| v["witness"]["nuclear"] == json!(true)))
        .count();
    let columns = vec![
        "gamma", "s1", "s2", "p1", "p2", "witness.nuclear", "witness.smoothness_ratio", "witness.inv_p", "witness.inv_gamma1",
        "delta_positive", "series.tong_t", "series.exponent", "series.verdict", "series.boundary_log_exponent", "series.last_partial",
        "consistent",
    ];
    Ok(Report::new(config, columns, records, json!({ "nuclear": nuclear_count })))
}

/// Random finitely supported sequence on the reliable part of `table`:
/// ranks log-uniform, levels uniform, values uniform in `[−1, 1]`.
pub fn random_lattice_sequence(rng: &mut ChaCha8Rng, table: &CubeWeightTable, support: usize, max_level: u32) -> LatticeSequence {
    let reliable = table.reliable_len().max(1);
    let mut lam = LatticeSequence::new();
    while lam.len() < support.min(reliable * (max_level as usize + 1)) {
        let u: f64 = rng.gen();
        let rank = ((u * (reliable as f64).ln()).exp().floor() as usize).min(reliable - 1);
        let nu = rng.gen_range(0..=max_level);
        let v: f64 = rng.gen_range(-1.0..=1.0);
        lam.insert(nu, table.point(rank), if v == 0.0 { 1.0 } else { v });
    }
    lam
}

pub(super) fn equiv(config: &SweepConfig) -> Result<Report> {
    let section = config.equiv.as_ref().expect("checked by the config");
    let mut tables = Vec::new();
    for gamma in &config.gammas {
        for &r in &section.box_radii {
            tables.push(((gamma.clone(), r), enumerate_tau(gamma, r)));
        }
    }
    let mut records = Vec::new();
    let mut summary = Vec::new();
    for (pi, (gamma, params, mut point)) in embedding_points(config).into_iter().enumerate() {
        let mut windows = Vec::new();
        for &radius in &section.box_radii {
            let mut point = point.clone();
            point.insert("box_radius".into(), json!(radius));
            let table = tables.iter().find(|(k, _)| k.0 == gamma && k.1 == radius).map(|(_, t)| t).expect("built above");
            let outcome = match (&params, table) {
                (Err(e), _) | (_, Err(e)) => Err(e.clone()),
                (Ok(params), Ok(table)) => {
                    let ratios: Vec<f64> = (0..section.samples)
                        .into_par_iter()
                        .map(|s| {
                            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                            rng.set_stream(((pi as u64) << 32) | s as u64);
                            let lam = random_lattice_sequence(&mut rng, table, section.support, section.max_level);
                            reindex_equivalence_ratio(&lam, params, &gamma, table)
                        })
                        .collect::<Result<_>>()?;
                    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = ratios.iter().copied().fold(0.0, f64::max);
                    windows.push(max / min);
                    Ok(json!({
                        "reliable_points": table.reliable_len(),
                        "ratio_min": min,
                        "ratio_max": max,
                        "window": max / min,
                        "ratios": ratios,
                    }))
                }
            };
            records.push(PointRecord::new(records.len(), point, outcome));
        }
        point.insert("windows".into(), json!(windows));
        summary.push(Value::Object(point));
    }
    let columns = vec!["gamma", "s1", "s2", "p1", "p2", "q1", "q2", "box_radius", "reliable_points", "ratio_min", "ratio_max", "window"];
    Ok(Report::new(config, columns, records, Value::Array(summary)))
}
