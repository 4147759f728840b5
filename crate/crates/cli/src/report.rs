//! Machine-readable outputs: report.json (schema 1), trace CSVs with
//! 17-significant-digit floats and LF line endings, and meta.json holding
//! the non-deterministic wall-time so report.json stays byte-reproducible.

use serde::Serialize;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        anchor: impl Into<String>,
        value: f64,
        bound: impl Into<String>,
        pass: bool,
    ) -> Self {
        Check {
            name: name.into(),
            anchor: anchor.into(),
            // JSON cannot hold non-finite numbers
            value: if value.is_finite() { value } else { f64::MAX },
            bound: bound.into(),
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub domain: String,
    pub dim: u32,
    pub extent: f64,
    pub n: usize,
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub experiment: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub environment: Environment,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn new(
        experiment: &str,
        seed: Option<u64>,
        environment: Environment,
        checks: Vec<Check>,
    ) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Report {
            schema: 1,
            experiment: experiment.to_string(),
            seed,
            environment,
            checks,
            pass,
        }
    }
}

/// A plot-ready table; every cell is a float printed with 17 significant
/// digits.
#[derive(Debug, Clone)]
pub struct CsvTable {
    /// Base name without extension; written as `trace_<name>.csv`.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        CsvTable {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits: enough to round-trip any f64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_outputs(
    out_dir: &Path,
    report: &Report,
    tables: &[CsvTable],
    wall_time_s: f64,
) -> std::io::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let json = serde_json::to_string_pretty(report).expect("report serialization");
    std::fs::write(out_dir.join("report.json"), json + "\n")?;
    let meta = format!("{{\n  \"wall_time_s\": {wall_time_s}\n}}\n");
    std::fs::write(out_dir.join("meta.json"), meta)?;
    for t in tables {
        let mut f = std::fs::File::create(out_dir.join(format!("trace_{}.csv", t.name)))?;
        f.write_all(t.to_csv().as_bytes())?;
    }
    Ok(())
}
