//! CSV / JSON result files and per-point summaries.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::OutputFormat;
use crate::error::{BenchError, Result};
use crate::runner::Row;

/// Bumped whenever a column is added, removed or renamed.
pub const SCHEMA_VERSION: u32 = 1;

pub fn version_line(kind: &str) -> String {
    format!("# qkmm-bench {kind} v{SCHEMA_VERSION} ({})", env!("CARGO_PKG_VERSION"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| BenchError::io(parent, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| BenchError::io(path, e))?))
}

/// Writes `rows` as `<stem>.csv` (versioned comment line first) or `<stem>.json`.
pub fn write_records<T: Serialize>(dir: &Path, stem: &str, kind: &str, rows: &[T], format: OutputFormat) -> Result<PathBuf> {
    let out = |e: &dyn std::fmt::Display| BenchError::Output(e.to_string());
    match format {
        OutputFormat::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            let mut file = create(&path)?;
            writeln!(file, "{}", version_line(kind)).map_err(|e| BenchError::io(&path, e))?;
            let mut writer = csv::Writer::from_writer(file);
            for row in rows {
                writer.serialize(row).map_err(|e| out(&e))?;
            }
            writer.flush().map_err(|e| BenchError::io(&path, e))?;
            Ok(path)
        }
        OutputFormat::Json => {
            let path = dir.join(format!("{stem}.json"));
            let doc = json!({
                "schema": format!("qkmm-bench {kind} v{SCHEMA_VERSION}"),
                "rows": rows,
            });
            let mut file = create(&path)?;
            serde_json::to_writer_pretty(&mut file, &doc).map_err(|e| out(&e))?;
            writeln!(file).map_err(|e| BenchError::io(&path, e))?;
            Ok(path)
        }
    }
}

const SUMMARY_FIELDS: [&str; 9] = [
    "fidelity",
    "matrix_fidelity",
    "mean_error",
    "max_error",
    "pass_rate",
    "gates_model",
    "gates_measured",
    "per_product_gates",
    "wall_s",
];

fn field(row: &Row, name: &str) -> f64 {
    match name {
        "fidelity" => row.fidelity,
        "matrix_fidelity" => row.matrix_fidelity,
        "mean_error" => row.mean_error,
        "max_error" => row.max_error,
        "pass_rate" => row.pass_rate,
        "gates_model" => row.gates_model as f64,
        "gates_measured" => row.gates_measured as f64,
        "per_product_gates" => row.per_product_gates,
        "wall_s" => row.wall_s,
        _ => f64::NAN,
    }
}

/// Sample mean and standard deviation (n − 1 denominator, 0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Groups rows by (method, sources, dim, parallel) in first-seen order.
pub fn summarize(rows: &[Row]) -> Vec<Value> {
    let mut keys: Vec<(String, String, usize, usize)> = Vec::new();
    for r in rows {
        let key = (r.method.clone(), r.sources.clone(), r.dim, r.parallel);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(method, sources, dim, parallel)| {
            let group: Vec<&Row> = rows
                .iter()
                .filter(|r| r.method == method && r.sources == sources && r.dim == dim && r.parallel == parallel)
                .collect();
            let mut mean = serde_json::Map::new();
            let mut std = serde_json::Map::new();
            for name in SUMMARY_FIELDS {
                let values: Vec<f64> = group.iter().map(|r| field(r, name)).collect();
                let (m, s) = mean_std(&values);
                mean.insert(name.into(), json!(m));
                std.insert(name.into(), json!(s));
            }
            json!({
                "method": method,
                "sources": sources,
                "dim": dim,
                "parallel": parallel,
                "trials": group.len(),
                "qubits": group[0].qubits,
                "mean": mean,
                "std": std,
            })
        })
        .collect()
}

pub fn write_summary(dir: &Path, stem: &str, command: &str, config: &impl Serialize, rows: &[Row]) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}_summary.json"));
    let doc = json!({
        "schema": format!("qkmm-bench summary v{SCHEMA_VERSION}"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "points": summarize(rows),
    });
    let mut file = create(&path)?;
    serde_json::to_writer_pretty(&mut file, &doc).map_err(|e| BenchError::Output(e.to_string()))?;
    writeln!(file).map_err(|e| BenchError::io(&path, e))?;
    Ok(path)
}
