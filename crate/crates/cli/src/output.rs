use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use geostatic::flatdist::ExtractedConstants;
use geostatic::horizon::Constants;
use serde::Serialize;
use serde_json::Value;

/// Outcome of the checks a command ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    CheckFailed,
    GateFailed,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::CheckFailed
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Verdict::Pass => 0,
            Verdict::CheckFailed => 1,
            Verdict::GateFailed => 2,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().context("flushing CSV")
    }
}

/// Shortest round-trip decimal; empty for missing values.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct Report {
    pub summary: Value,
    pub table: Option<Table>,
    pub svg: Option<String>,
    /// Additional files as (name, contents).
    pub extra: Vec<(String, String)>,
    pub verdict: Verdict,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub parameters: BTreeMap<&'static str, Value>,
}

impl Report {
    pub fn new(summary: Value, verdict: Verdict) -> Self {
        Report {
            summary,
            table: None,
            svg: None,
            extra: Vec::new(),
            verdict,
            tolerances: BTreeMap::new(),
            parameters: BTreeMap::new(),
        }
    }

    pub fn table(mut self, t: Table) -> Self {
        self.table = Some(t);
        self
    }

    pub fn tolerance(mut self, name: &'static str, value: f64) -> Self {
        self.tolerances.insert(name, value);
        self
    }

    pub fn parameter(mut self, name: &'static str, value: impl Serialize) -> Self {
        self.parameters.insert(name, serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsSource {
    /// "explicit", "default" or "auto".
    pub mode: &'static str,
    pub kappa: f64,
    pub i0: f64,
}

/// Every resolved input of one run, written next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub version: &'static str,
    pub config: Option<String>,
    pub seed: u64,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub out: Option<String>,
    pub constants_source: ConstantsSource,
    pub constants: Constants,
    pub extracted_constants: ExtractedConstants,
    pub parameters: BTreeMap<&'static str, Value>,
    pub outputs: Vec<String>,
    pub verdict: Verdict,
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes the report files into `dir` and returns their names.
pub fn write_files(dir: &Path, command: &str, report: &Report) -> Result<Vec<String>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files: Vec<(String, Vec<u8>)> = vec![("summary.json".into(), to_json(&report.summary)?.into_bytes())];
    if let Some(t) = &report.table {
        files.push((format!("{command}.csv"), t.to_csv()?));
    }
    if let Some(svg) = &report.svg {
        files.push((format!("{command}.svg"), svg.clone().into_bytes()));
    }
    for (name, body) in &report.extra {
        files.push((name.clone(), body.clone().into_bytes()));
    }
    let mut names = Vec::new();
    for (name, body) in files {
        let path = dir.join(&name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        names.push(name);
    }
    Ok(names)
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let path = dir.join("manifest.json");
    fs::write(&path, to_json(manifest)?).with_context(|| format!("writing {}", path.display()))
}
