//! Configuration-driven sweeps over parameter grids, with CSV and JSON
//! reports that are byte-identical for identical inputs.

mod config;
mod jobs;

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

pub use jobs::random_lattice_sequence;
pub use config::{EquivSection, Job, KGrid, LatticeSection, NuclearSection, ParamGrid, SweepConfig, Tolerance};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "snumlab/1";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointError {
    pub precondition: bool,
    pub message: String,
}

impl From<&Error> for PointError {
    fn from(e: &Error) -> Self {
        PointError { precondition: e.is_precondition(), message: e.to_string() }
    }
}

/// One grid point: its coordinates, and either a result or an error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub point: Map<String, Value>,
    pub result: Option<Value>,
    pub error: Option<PointError>,
}

impl PointRecord {
    pub(crate) fn new(index: usize, point: Map<String, Value>, outcome: Result<Value>) -> Self {
        match outcome {
            Ok(v) => PointRecord { index, point, result: Some(v), error: None },
            Err(e) => PointRecord { index, point, result: None, error: Some((&e).into()) },
        }
    }

    /// Scalars of `point` and `result`, nested keys joined by `.`.
    fn flat(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        flatten("", &Value::Object(self.point.clone()), &mut out);
        if let Some(r) = &self.result {
            flatten("", r, &mut out);
        }
        if let Some(e) = &self.error {
            out.insert("error".into(), e.message.clone());
        }
        out
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, String>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(_) => {}
        Value::Null => {}
        Value::String(s) => {
            out.insert(prefix.to_string(), s.clone());
        }
        other => {
            out.insert(prefix.to_string(), other.to_string());
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepStatus {
    Success,
    /// Every point violated a hypothesis of the underlying result.
    PreconditionViolation,
    PartialFailure,
}

impl SweepStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            SweepStatus::Success => 0,
            SweepStatus::PreconditionViolation => 3,
            SweepStatus::PartialFailure => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub job: Job,
    pub seed: u64,
    pub points: usize,
    pub failures: usize,
    pub summary: Value,
    pub records: Vec<PointRecord>,
    #[serde(skip)]
    columns: Vec<&'static str>,
}

impl Report {
    pub(crate) fn new(config: &SweepConfig, columns: Vec<&'static str>, records: Vec<PointRecord>, summary: Value) -> Self {
        let failures = records.iter().filter(|r| r.error.is_some()).count();
        Report { schema: SCHEMA, job: config.job, seed: config.seed, points: records.len(), failures, summary, records, columns }
    }

    pub fn status(&self) -> SweepStatus {
        if self.failures == 0 {
            SweepStatus::Success
        } else if self.failures == self.points && self.records.iter().all(|r| r.error.as_ref().is_some_and(|e| e.precondition)) {
            SweepStatus::PreconditionViolation
        } else {
            SweepStatus::PartialFailure
        }
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    /// One row per grid point; `schema` and `seed` lead every row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        let mut header = vec!["schema", "seed", "index"];
        header.extend(self.columns.iter().copied());
        header.push("error");
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.records {
            let flat = r.flat();
            let mut row = vec![SCHEMA.to_string(), self.seed.to_string(), r.index.to_string()];
            row.extend(self.columns.iter().map(|c| flat.get(*c).cloned().unwrap_or_default()));
            row.push(flat.get("error").cloned().unwrap_or_default());
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self).map_err(|e| Error::Io(e.to_string()))?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Evaluates every grid point of `config`; points are computed in parallel
/// and reported in grid order.
pub fn run_sweep(config: &SweepConfig) -> Result<Report> {
    match config.job {
        Job::Rates => jobs::rates(config),
        Job::Diag => jobs::diag(config),
        Job::Lattice => jobs::lattice(config),
        Job::Nuclear => jobs::nuclear(config),
        Job::Equiv => jobs::equiv(config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gives_one_row() {
        let text = "gamma = [[2, 2]]\n[grid]\ns1 = [\"3\"]\np1 = [\"4/3\"]\np2 = [\"4\"]\n";
        let config = SweepConfig::from_toml(text, Job::Rates).unwrap();
        let report = run_sweep(&config).unwrap();
        assert_eq!(report.points, 1);
        assert_eq!(report.status(), SweepStatus::Success);
        let csv = report.to_csv_string().unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("snumlab/1,0,0,"));
        let mut json = Vec::new();
        report.write_json(&mut json).unwrap();
        let v: Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(v["records"].as_array().unwrap().len(), 1);
        assert_eq!(v["records"][0]["result"]["rate"]["alpha_out"], "3/4");
    }

    #[test]
    fn equal_exponents_give_null_rates() {
        let text = "gamma = [[2, 2]]\n[grid]\ns1 = [\"3\"]\np1 = [\"2\"]\np2 = [\"2\"]\n";
        let report = run_sweep(&SweepConfig::from_toml(text, Job::Rates).unwrap()).unwrap();
        let r = &report.records[0];
        assert!(r.error.is_none());
        let res = r.result.as_ref().unwrap();
        assert_eq!(res["compact"], Value::Bool(false));
        assert!(res["rate"].is_null());
    }

    #[test]
    fn boundary_points_are_precondition_failures() {
        // γ₁(1/p₁ − 1/p₂) = 2(3/4 − 3/8) = 3/4 = max(1/p₁, 1 − 1/p₂)
        let text = "gamma = [[2, 2]]\n[grid]\ns1 = [\"5\"]\np1 = [\"4/3\"]\np2 = [\"8/3\"]\n";
        let report = run_sweep(&SweepConfig::from_toml(text, Job::Rates).unwrap()).unwrap();
        assert_eq!(report.status(), SweepStatus::PreconditionViolation);
        assert_eq!(report.status().exit_code(), 3);
    }
}
