use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, status: Status, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub seconds: f64,
    pub threads: usize,
}

/// Everything a command produces. Timing is only present when requested so
/// that exact-mode reports stay byte-for-byte reproducible.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub model: Option<String>,
    pub parameters: BTreeMap<String, Value>,
    pub results: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
    /// Rows for `--format csv`.
    #[serde(skip)]
    pub csv: CsvTable,
}

#[derive(Clone, Debug, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub trailer: Vec<String>,
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> Self {
        RunReport {
            command: command.into(),
            model: None,
            parameters: BTreeMap::new(),
            results: BTreeMap::new(),
            checks: Vec::new(),
            status: Status::Pass,
            timing: None,
            csv: CsvTable::default(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.parameters.insert(key.into(), serde_json::to_value(value).expect("serializable"));
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.into(), serde_json::to_value(value).expect("serializable"));
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Fail beats indeterminate beats pass.
    pub fn finish(&mut self) {
        self.status = if self.checks.iter().any(|c| c.status == Status::Fail) {
            Status::Fail
        } else if self.checks.iter().any(|c| c.status == Status::Indeterminate) {
            Status::Indeterminate
        } else {
            Status::Pass
        };
    }

    /// Falls back to the list of checks when the command set no table.
    fn csv_table(&self) -> CsvTable {
        if !self.csv.header.is_empty() {
            return self.csv.clone();
        }
        CsvTable {
            header: vec!["check".into(), "status".into(), "detail".into()],
            rows: self
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        serde_json::to_value(c.status).expect("serializable").as_str().unwrap_or("").into(),
                        c.detail.clone(),
                    ]
                })
                .collect(),
            trailer: Vec::new(),
        }
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(self)?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => {
                let table = self.csv_table();
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&table.header)?;
                for row in &table.rows {
                    w.write_record(row)?;
                }
                let mut out = w.into_inner().context("flushing csv")?;
                for line in &table.trailer {
                    writeln!(out, "# {line}")?;
                }
                Ok(out)
            }
        }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<()> {
        let bytes = self.render(format)?;
        match out {
            Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                lock.write_all(&bytes)?;
                lock.flush()?;
                Ok(())
            }
        }
    }
}
