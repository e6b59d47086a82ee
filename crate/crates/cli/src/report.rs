//! Versioned run reports and their CSV side files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    /// `value <= threshold`
    Le,
    /// `value >= threshold`
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    /// `None` when the quantity could not be measured (serialised as `null`).
    pub value: Option<f64>,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl Verdict {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value: finite(value),
            threshold,
            comparison: Comparison::Le,
            pass: value.is_finite() && value <= threshold,
            detail: None,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value: finite(value),
            threshold,
            comparison: Comparison::Ge,
            pass: value.is_finite() && value >= threshold,
            detail: None,
        }
    }

    /// Exact check: the value is a mismatch count and must be zero.
    pub fn exact(name: impl Into<String>, mismatches: usize) -> Self {
        Self::at_most(name, mismatches as f64, 0.0)
    }

    /// A failed step that produced no measurement.
    pub fn failed(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: None,
            threshold: 0.0,
            comparison: Comparison::Le,
            pass: false,
            detail: Some(detail.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// Tabular data for external plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub kind: String,
    pub name: String,
    pub verdicts: Vec<Verdict>,
    /// Exact values and other non-numeric results.
    pub facts: BTreeMap<String, String>,
    pub series: Vec<Series>,
}

impl ScenarioReport {
    pub fn new(kind: &str, name: &str) -> Self {
        Self { kind: kind.into(), name: name.into(), verdicts: Vec::new(), facts: BTreeMap::new(), series: Vec::new() }
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn fact(&mut self, key: impl Into<String>, value: impl ToString) {
        self.facts.insert(key.into(), value.to_string());
    }

    pub fn series(&mut self, s: Series) {
        self.series.push(s);
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn find(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: f64,
    pub scenarios_ms: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
    pub scenarios: Vec<ScenarioReport>,
    /// Wall-clock data; the only field allowed to differ between identical runs.
    pub timing: Timing,
}

impl RunReport {
    pub fn new(command: &str, seed: u64, config: RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config,
            scenarios: Vec::new(),
            timing: Timing::default(),
        }
    }

    pub fn push(&mut self, s: ScenarioReport, ms: f64) {
        self.timing.scenarios_ms.insert(format!("{}/{}", s.kind, s.name), ms);
        self.scenarios.push(s);
    }

    pub fn verdicts(&self) -> impl Iterator<Item = &Verdict> {
        self.scenarios.iter().flat_map(|s| s.verdicts.iter())
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts().all(|v| v.pass)
    }

    /// Process exit status: 0 iff every verdict passes.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// JSON with the timing block blanked, for reproducibility comparisons.
    pub fn to_json_without_timing(&self) -> String {
        let mut copy = self.clone();
        copy.timing = Timing::default();
        copy.to_json()
    }

    pub fn file_stem(&self) -> String {
        format!("{}_seed{}", self.command, self.seed)
    }

    /// Writes the report and one CSV per series (`<scenario kind>-<name>/<series>_seed<S>.csv`).
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let json = dir.join(format!("{}.json", self.file_stem()));
        fs::write(&json, self.to_json())?;
        written.push(json);
        written.extend(emit_plot_data(self, dir)?);
        Ok(written)
    }
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn scenario_dir(dir: &Path, s: &ScenarioReport) -> PathBuf {
    dir.join(format!("{}-{}", sanitize(&s.kind), sanitize(&s.name)))
}

pub fn emit_plot_data(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for s in &report.scenarios {
        if s.series.is_empty() {
            continue;
        }
        let sub = scenario_dir(dir, s);
        fs::create_dir_all(&sub)?;
        for series in &s.series {
            let path = sub.join(format!("{}_seed{}.csv", sanitize(&series.name), report.seed));
            let mut f = std::io::BufWriter::new(fs::File::create(&path)?);
            series.write_csv(&mut f)?;
            f.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        assert!(Verdict::at_most("a", 1.0, 1.0).pass);
        assert!(!Verdict::at_most("a", f64::NAN, 1.0).pass);
        assert!(!Verdict::at_least("b", 1.8, 1.9).pass);
        assert!(Verdict::exact("c", 0).pass);
        assert!(!Verdict::failed("d", "boom").pass);
    }

    #[test]
    fn exit_code_follows_verdicts() {
        let mut r = RunReport::new("all", 0, RunConfig::default());
        assert_eq!(r.exit_code(), 0);
        let mut s = ScenarioReport::new("x", "y");
        s.verdict(Verdict::at_most("ok", 0.0, 1.0));
        r.push(s.clone(), 1.0);
        assert_eq!(r.exit_code(), 0);
        s.verdict(Verdict::at_most("bad", 2.0, 1.0));
        r.push(s, 1.0);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn csv_layout() {
        let mut s = Series::new("history", &["iter", "residual"]);
        s.push(vec![0.0, 0.5]);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "iter,residual\n0e0,5e-1\n");
    }
}
