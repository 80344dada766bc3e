//! Declarative sweep configuration. Every exponent and smoothness value is a
//! string parsed exactly (`"4/3"`, `"inf"`, `"0.25"`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{BlockIndex, Exponent};
use crate::rational::{parse_rational, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Job {
    Rates,
    Diag,
    Lattice,
    Nuclear,
    Equiv,
}

impl Job {
    pub fn name(self) -> &'static str {
        match self {
            Job::Rates => "rates",
            Job::Diag => "diag",
            Job::Lattice => "lattice",
            Job::Nuclear => "nuclear",
            Job::Equiv => "equiv",
        }
    }
}

impl fmt::Display for Job {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Job {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rates" => Ok(Job::Rates),
            "diag" => Ok(Job::Diag),
            "lattice" => Ok(Job::Lattice),
            "nuclear" => Ok(Job::Nuclear),
            "equiv" => Ok(Job::Equiv),
            other => Err(Error::Config(format!("unknown job `{other}`"))),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    job: Option<Job>,
    seed: Option<u64>,
    gamma: Option<Vec<Vec<u32>>>,
    #[serde(default)]
    grid: RawGrid,
    kgrid: Option<KGrid>,
    lattice: Option<LatticeSection>,
    nuclear: Option<NuclearSection>,
    equiv: Option<EquivSection>,
    tolerance: Option<Tolerance>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    s1: Option<Vec<String>>,
    s2: Option<Vec<String>>,
    p1: Option<Vec<String>>,
    p2: Option<Vec<String>>,
    q1: Option<Vec<String>>,
    q2: Option<Vec<String>>,
    alpha: Option<Vec<String>>,
    beta: Option<Vec<String>>,
}

/// Dyadic rank grid `2^min_exp, …, 2^max_exp`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGrid {
    pub min_exp: u32,
    pub max_exp: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    /// Thresholds `2^e` for the counting law.
    pub thresholds_log2: Vec<u32>,
    /// When set, a table of this radius is enumerated and compared with the
    /// exact counts inside its reliable range.
    pub box_radius: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuclearSection {
    #[serde(default = "default_terms")]
    pub terms: u64,
}

fn default_terms() -> u64 {
    1 << 12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivSection {
    pub box_radii: Vec<u32>,
    pub samples: usize,
    /// Nonzero coefficients per random sequence.
    #[serde(default = "default_support")]
    pub support: usize,
    /// Levels are drawn from `0..=max_level`.
    #[serde(default = "default_max_level")]
    pub max_level: u32,
}

fn default_support() -> usize {
    8
}

fn default_max_level() -> u32 {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { alpha: 0.1, beta: 0.3 }
    }
}

/// Parameter lists; the sweep runs over their cartesian product.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamGrid {
    pub s1: Vec<Rat>,
    pub s2: Vec<Rat>,
    pub p1: Vec<Exponent>,
    pub p2: Vec<Exponent>,
    pub q1: Vec<Exponent>,
    pub q2: Vec<Exponent>,
    pub alpha: Vec<Rat>,
    pub beta: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub job: Job,
    pub seed: u64,
    pub gammas: Vec<BlockIndex>,
    pub grid: ParamGrid,
    pub kgrid: Option<KGrid>,
    pub lattice: Option<LatticeSection>,
    pub nuclear: NuclearSection,
    pub equiv: Option<EquivSection>,
    pub tolerance: Tolerance,
}

fn rats(field: &str, v: Option<Vec<String>>, default: &[&str]) -> Result<Vec<Rat>> {
    let v = v.unwrap_or_else(|| default.iter().map(|s| s.to_string()).collect());
    v.iter()
        .map(|s| parse_rational(s).map_err(|_| Error::Config(format!("grid.{field}: cannot parse `{s}` as a rational"))))
        .collect()
}

fn exps(field: &str, v: Option<Vec<String>>, default: &[&str]) -> Result<Vec<Exponent>> {
    let v = v.unwrap_or_else(|| default.iter().map(|s| s.to_string()).collect());
    v.iter()
        .map(|s| s.parse().map_err(|e| Error::Config(format!("grid.{field}: {e}"))))
        .collect()
}

fn need<T>(field: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        Err(Error::Config(format!("{field} must be a nonempty list")))
    } else {
        Ok(())
    }
}

impl SweepConfig {
    /// Parses a TOML document. `job` comes from the subcommand; a `job` key
    /// in the file must agree with it.
    pub fn from_toml(text: &str, job: Job) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(j) = raw.job {
            if j != job {
                return Err(Error::Config(format!("file declares job `{j}` but `{job}` was requested")));
            }
        }
        let gammas = raw
            .gamma
            .unwrap_or_default()
            .into_iter()
            .map(|g| BlockIndex::new(g).map_err(|e| Error::Config(format!("gamma: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let g = raw.grid;
        let grid = ParamGrid {
            s1: rats("s1", g.s1, &[])?,
            s2: rats("s2", g.s2, &["0"])?,
            p1: exps("p1", g.p1, &[])?,
            p2: exps("p2", g.p2, &[])?,
            q1: exps("q1", g.q1, &["2"])?,
            q2: exps("q2", g.q2, &["2"])?,
            alpha: rats("alpha", g.alpha, &[])?,
            beta: rats("beta", g.beta, &["0"])?,
        };
        let tolerance = raw.tolerance.unwrap_or_default();
        if !(tolerance.alpha > 0.0 && tolerance.beta > 0.0) {
            return Err(Error::Config("tolerance.alpha and tolerance.beta must be positive".into()));
        }
        if let Some(k) = &raw.kgrid {
            if k.min_exp < 2 || k.min_exp >= k.max_exp || k.max_exp > 52 {
                return Err(Error::Config("kgrid needs 2 <= min_exp < max_exp <= 52".into()));
            }
        }
        let config = SweepConfig {
            job,
            seed: raw.seed.unwrap_or(0),
            gammas,
            grid,
            kgrid: raw.kgrid,
            lattice: raw.lattice,
            nuclear: raw.nuclear.unwrap_or(NuclearSection { terms: default_terms() }),
            equiv: raw.equiv,
            tolerance,
        };
        config.check_job()?;
        Ok(config)
    }

    fn check_job(&self) -> Result<()> {
        let g = &self.grid;
        let embedding = || -> Result<()> {
            need("gamma", &self.gammas)?;
            need("grid.s1", &g.s1)?;
            need("grid.s2", &g.s2)?;
            need("grid.p1", &g.p1)?;
            need("grid.p2", &g.p2)?;
            need("grid.q1", &g.q1)?;
            need("grid.q2", &g.q2)
        };
        match self.job {
            Job::Rates | Job::Nuclear => embedding()?,
            Job::Diag => {
                need("grid.alpha", &g.alpha)?;
                need("grid.beta", &g.beta)?;
                need("grid.p1", &g.p1)?;
                need("grid.p2", &g.p2)?;
                if self.kgrid.is_none() {
                    return Err(Error::Config("the diag job needs a [kgrid] section".into()));
                }
            }
            Job::Lattice => {
                need("gamma", &self.gammas)?;
                let l = self.lattice.as_ref().ok_or_else(|| Error::Config("the lattice job needs a [lattice] section".into()))?;
                need("lattice.thresholds_log2", &l.thresholds_log2)?;
                if l.thresholds_log2.windows(2).any(|w| w[0] >= w[1]) || l.thresholds_log2.iter().any(|&e| e > 60) {
                    return Err(Error::Config("lattice.thresholds_log2 must ascend strictly and stay <= 60".into()));
                }
            }
            Job::Equiv => {
                embedding()?;
                let e = self.equiv.as_ref().ok_or_else(|| Error::Config("the equiv job needs an [equiv] section".into()))?;
                need("equiv.box_radii", &e.box_radii)?;
                if e.samples == 0 || e.support == 0 {
                    return Err(Error::Config("equiv.samples and equiv.support must be positive".into()));
                }
            }
        }
        Ok(())
    }

    pub fn k_grid(&self) -> Option<Vec<u64>> {
        self.kgrid.as_ref().map(|k| crate::diagonal::dyadic_grid(k.min_exp, k.max_exp))
    }
}
