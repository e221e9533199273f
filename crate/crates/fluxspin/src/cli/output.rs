//! Deterministic CSV and JSON-manifest serialization. The same config and
//! seed must produce byte-identical files, so floats are written with the
//! shortest round-trip formatting and all maps iterate in sorted order.

use std::fs::File;
use std::io::{BufWriter, Result as IoResult, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

/// Write a CSV with the mandatory header row. Columns must share one
/// length; the first column is conventionally `t_in_coupling_periods` for
/// time series.
pub fn write_csv(path: &Path, headers: &[&str], columns: &[&[f64]]) -> IoResult<()> {
    assert_eq!(headers.len(), columns.len(), "one header per column");
    let rows = columns.first().map_or(0, |c| c.len());
    for c in columns {
        assert_eq!(c.len(), rows, "CSV columns must have equal length");
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", headers.join(","))?;
    for r in 0..rows {
        let mut line = String::new();
        for (k, c) in columns.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&format!("{}", c[r]));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()
}

/// Run manifest: fully resolved config, seed, code version, scalar
/// results, produced files, warnings. Everything a rerun needs.
pub struct Manifest {
    command: String,
    config_text: String,
    seed: u64,
    workers: Option<usize>,
    results: Map<String, Value>,
    files: Vec<String>,
    warnings: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config_text: String, seed: u64, workers: Option<usize>) -> Self {
        Self {
            command: command.to_string(),
            config_text,
            seed,
            workers,
            results: Map::new(),
            files: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn push_scalar(&mut self, name: &str, value: f64) {
        self.results.insert(name.to_string(), json!(value));
    }

    pub fn push_value(&mut self, name: &str, value: Value) {
        self.results.insert(name.to_string(), value);
    }

    pub fn push_file(&mut self, name: &str) {
        self.files.push(name.to_string());
    }

    pub fn push_warning(&mut self, text: &str) {
        self.warnings.push(text.to_string());
    }

    pub fn write(&self, dir: &Path) -> IoResult<PathBuf> {
        // The config is embedded both as the canonical text (directly
        // reusable with --config) and as a key → value object.
        let mut config_obj = Map::new();
        for line in self.config_text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                config_obj.insert(k.trim().to_string(), json!(v.trim()));
            }
        }
        let doc = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "workers": self.workers,
            "config": config_obj,
            "config_text": self.config_text,
            "results": Value::Object(self.results.clone()),
            "csv_files": self.files,
            "warnings": self.warnings,
        });
        let path = dir.join("run.json");
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
        w.flush()?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_deterministic() {
        let dir = std::env::temp_dir().join("fluxspin_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let t = vec![0.0, 0.1, 0.2];
        let y = vec![1.0, 0.5, 1.0 / 3.0];
        let p1 = dir.join("a.csv");
        let p2 = dir.join("b.csv");
        write_csv(&p1, &["t_in_coupling_periods", "p1"], &[&t, &y]).unwrap();
        write_csv(&p2, &["t_in_coupling_periods", "p1"], &[&t, &y]).unwrap();
        let a = std::fs::read(&p1).unwrap();
        let b = std::fs::read(&p2).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("t_in_coupling_periods,p1\n"));
        assert!(text.contains("0.3333333333333333"));
    }
}
