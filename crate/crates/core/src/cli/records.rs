//! Append-only result records and CSV tables.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const RECORD_SCHEMA: &str = "semilinear-mc/result/v1";
pub const RESULTS_FILE: &str = "results.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema: String,
    pub config_digest: String,
    pub subcommand: String,
    pub timestamp: String,
    pub version: String,
    pub payload: Value,
}

impl ResultRecord {
    pub fn new(config_digest: &str, subcommand: &str, payload: Value) -> Self {
        ResultRecord {
            schema: RECORD_SCHEMA.to_string(),
            config_digest: config_digest.to_string(),
            subcommand: subcommand.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            payload,
        }
    }
}

pub fn append_record(path: &Path, record: &ResultRecord) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(file, "{}", serde_json::to_string(record)?)?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ResultRecord>> {
    let file = File::open(path).map_err(|e| Error::input(format!("cannot open {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ResultRecord = serde_json::from_str(&line).map_err(|e| Error::input(format!("{}:{}: {e}", path.display(), i + 1)))?;
        if rec.schema != RECORD_SCHEMA {
            return Err(Error::input(format!("{}:{}: unknown record schema `{}`", path.display(), i + 1, rec.schema)));
        }
        out.push(rec);
    }
    Ok(out)
}

/// A rectangular table rendered as CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_error)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Internal(format!("csv: {e}"))
}
