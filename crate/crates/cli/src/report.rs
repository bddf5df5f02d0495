use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

use schatten_semigroup::SCHEMA_VERSION;

/// One inequality check. `pass` is decided by the library routine that ran
/// the check; `tolerance` is the slack that routine allowed.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub check: String,
    pub value: f64,
    pub relation: &'static str,
    pub bound: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Verdict {
    pub fn le(check: impl Into<String>, value: f64, bound: f64, tolerance: f64, pass: bool) -> Self {
        Verdict { check: check.into(), value, relation: "<=", bound, tolerance, pass }
    }

    pub fn ge(check: impl Into<String>, value: f64, bound: f64, tolerance: f64, pass: bool) -> Self {
        Verdict { check: check.into(), value, relation: ">=", bound, tolerance, pass }
    }
}

/// A CSV table written next to the JSON report as `<stem>_<name>.csv`.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Table { name, header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// `{:e}` keeps every digit and is stable across platforms.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub experiment: String,
    pub name: String,
    pub seed: u64,
    pub parameters: Value,
    pub passed: bool,
    pub verdicts: Vec<Verdict>,
    pub results: Value,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(experiment: &str, name: &str, seed: u64, parameters: Value) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            name: name.to_string(),
            seed,
            parameters,
            passed: true,
            verdicts: Vec::new(),
            results: Value::Null,
            tables: Vec::new(),
        }
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.passed &= v.pass;
        self.verdicts.push(v);
    }

    pub fn failures(&self) -> usize {
        self.verdicts.iter().filter(|v| !v.pass).count()
    }

    pub fn to_json(&self) -> Result<String> {
        let v = serde_json::to_value(self)?;
        check_finite(&v, "$")?;
        let mut s = serde_json::to_string_pretty(&v)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes `<dir>/<name>.json` and one CSV per table; returns the JSON path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let path = dir.join(format!("{}.json", self.name));
        fs::write(&path, self.to_json()?).with_context(|| format!("cannot write {}", path.display()))?;
        for t in &self.tables {
            let p = dir.join(format!("{}_{}.csv", self.name, t.name));
            let mut w = csv::Writer::from_path(&p).with_context(|| format!("cannot write {}", p.display()))?;
            w.write_record(&t.header)?;
            for r in &t.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Ok(path)
    }
}

/// Non-finite floats serialise as `null`; reports must not contain any.
fn check_finite(v: &Value, at: &str) -> Result<()> {
    match v {
        Value::Null => bail!("non-finite or missing number in report at {at}"),
        Value::Array(a) => a.iter().enumerate().try_for_each(|(i, x)| check_finite(x, &format!("{at}[{i}]"))),
        Value::Object(m) => m.iter().try_for_each(|(k, x)| check_finite(x, &format!("{at}.{k}"))),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn nan_is_rejected() {
        let mut r = Report::new("duhamel", "x", 0, json!({}));
        r.results = json!({ "a": [1.0, f64::NAN] });
        let err = r.to_json().unwrap_err().to_string();
        assert!(err.contains("$.results.a[1]"), "{err}");
    }

    #[test]
    fn failing_verdict_marks_report() {
        let mut r = Report::new("duhamel", "x", 0, json!({}));
        r.results = json!({});
        r.verdict(Verdict::le("a", 1.0, 2.0, 0.0, true));
        r.verdict(Verdict::le("b", 3.0, 2.0, 0.0, false));
        assert!(!r.passed);
        assert_eq!(r.failures(), 1);
    }
}
