//! Report bundle: per-suite JSON and CSV, a summary, and a metadata file
//! holding everything run-dependent (timestamps, durations, threads).

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Result;

/// JSON number, or a string for ±∞ and NaN.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else if x.is_nan() {
        Value::String("nan".into())
    } else if x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| num(*x)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, Value>,
}

impl CriterionOutcome {
    pub fn new(id: u32, title: &str) -> Self {
        Self { id, title: title.into(), passed: true, metrics: BTreeMap::new() }
    }

    /// Records a metric.
    pub fn put(&mut self, key: &str, v: Value) -> &mut Self {
        self.metrics.insert(key.into(), v);
        self
    }

    /// Records a boolean check and folds it into the verdict.
    pub fn check(&mut self, key: &str, ok: bool) -> &mut Self {
        self.passed &= ok;
        self.metrics.insert(format!("check.{key}"), Value::Bool(ok));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }
    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub criteria: Vec<CriterionOutcome>,
    pub tables: Vec<Table>,
    /// Seconds per criterion; kept out of the payload.
    #[serde(skip)]
    pub seconds: BTreeMap<u32, f64>,
}

impl SuiteReport {
    pub fn new(suite: &str) -> Self {
        Self { suite: suite.into(), seed: 0, criteria: Vec::new(), tables: Vec::new(), seconds: BTreeMap::new() }
    }

    /// Runs `f` as criterion `id` and records its outcome and duration.
    pub fn criterion<F>(&mut self, id: u32, title: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut CriterionOutcome, &mut Vec<Table>) -> Result<()>,
    {
        let t0 = Instant::now();
        let mut c = CriterionOutcome::new(id, title);
        f(&mut c, &mut self.tables)?;
        self.seconds.insert(id, t0.elapsed().as_secs_f64());
        self.criteria.push(c);
        Ok(())
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Bundle {
    pub suites: Vec<SuiteReport>,
    pub seconds: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryLine {
    pub suite: String,
    pub id: u32,
    pub title: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub seed: u64,
    pub criteria: Vec<SummaryLine>,
    pub passed: bool,
}

impl Bundle {
    pub fn summary(&self, seed: u64) -> Summary {
        let criteria: Vec<SummaryLine> = self
            .suites
            .iter()
            .flat_map(|s| s.criteria.iter().map(move |c| SummaryLine { suite: s.suite.clone(), id: c.id, title: c.title.clone(), passed: c.passed }))
            .collect();
        let passed = criteria.iter().all(|c| c.passed);
        Summary { seed, criteria, passed }
    }

    pub fn failing(&self) -> Vec<u32> {
        self.suites.iter().flat_map(|s| s.criteria.iter().filter(|c| !c.passed).map(|c| c.id)).collect()
    }

    /// Deterministic payload files: `<suite>.json`, `<suite>_<table>.csv`,
    /// `summary.json`, and `config.json` when given.
    pub fn payload(&self, seed: u64, config: Option<&crate::ExperimentConfig>) -> Result<Vec<(String, Vec<u8>)>> {
        let mut out = Vec::new();
        for s in &self.suites {
            let mut j = serde_json::to_vec_pretty(s)?;
            j.push(b'\n');
            out.push((format!("{}.json", s.suite), j));
            for t in &s.tables {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&t.columns)?;
                for r in &t.rows {
                    w.write_record(r.iter().map(cell))?;
                }
                let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
                out.push((format!("{}_{}.csv", s.suite, t.name), bytes));
            }
        }
        let mut j = serde_json::to_vec_pretty(&self.summary(seed))?;
        j.push(b'\n');
        out.push(("summary.json".into(), j));
        if let Some(c) = config {
            let mut j = serde_json::to_vec_pretty(c)?;
            j.push(b'\n');
            out.push(("config.json".into(), j));
        }
        Ok(out)
    }

    /// Writes the payload and `metadata.json` into `dir`.
    pub fn write(&self, dir: &Path, config: &crate::ExperimentConfig, started_unix: u64, threads: Option<usize>) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, bytes) in self.payload(config.seed, Some(config))? {
            std::fs::write(dir.join(name), bytes)?;
        }
        let finished = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut per_criterion = BTreeMap::new();
        for s in &self.suites {
            for (id, secs) in &s.seconds {
                per_criterion.insert(id.to_string(), *secs);
            }
        }
        let meta = serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "started_unix": started_unix,
            "finished_unix": finished,
            "threads": threads.unwrap_or_else(rayon::current_num_threads),
            "suite_seconds": self.seconds.iter().map(|(n, s)| (n.clone(), *s)).collect::<BTreeMap<_, _>>(),
            "criterion_seconds": per_criterion,
        });
        std::fs::write(dir.join("metadata.json"), serde_json::to_vec_pretty(&meta)?)?;
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Reads `summary.json` from a report directory.
pub fn read_summary(dir: &Path) -> Result<Summary> {
    Ok(serde_json::from_slice(&std::fs::read(dir.join("summary.json"))?)?)
}
