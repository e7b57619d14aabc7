//! Declarative plot specs plus one matplotlib script that renders them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

pub const PLOT_DIR: &str = "plots";
pub const SCRIPT_NAME: &str = "plot_results.py";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub title: String,
    /// CSV file name inside the results directory.
    pub csv: String,
    pub x: String,
    pub y: String,
    /// Column whose distinct values become separate lines.
    pub series: String,
    pub log_x: bool,
    pub log_y: bool,
    pub output: String,
}

#[allow(clippy::too_many_arguments)]
fn spec(title: &str, csv: &str, x: &str, y: &str, series: &str, log_x: bool, log_y: bool, output: &str) -> PlotSpec {
    PlotSpec {
        title: title.into(),
        csv: csv.into(),
        x: x.into(),
        y: y.into(),
        series: series.into(),
        log_x,
        log_y,
        output: output.into(),
    }
}

/// Specs for one result CSV, chosen by its file-name prefix.
pub fn specs_for(csv: &str) -> Vec<PlotSpec> {
    let stem = csv.trim_end_matches(".csv");
    if let Some(task) = stem.strip_prefix("noise_sweep_") {
        return vec![
            spec(&format!("{task}: fidelity vs dimension"), csv, "dim", "fidelity", "sources", true, false, &format!("{stem}_fidelity.png")),
            spec(&format!("{task}: mean error vs dimension"), csv, "dim", "mean_error", "sources", true, false, &format!("{stem}_mean_error.png")),
        ];
    }
    if let Some(task) = stem.strip_prefix("compare_") {
        return vec![spec(&format!("{task}: simulation time"), csv, "dim", "wall_s", "method", true, true, &format!("{stem}_time.png"))];
    }
    if stem == "mmm_sweep" {
        return vec![spec("M-MM time per product", csv, "parallel", "per_product_s", "dim", true, true, "mmm_sweep_time.png")];
    }
    if stem == "gatecount" {
        return vec![spec("M2M gate count (cost model)", csv, "dim", "model_total", "n", true, true, "gatecount.png")];
    }
    if let Some(task) = stem.strip_prefix("run_") {
        return vec![spec(&format!("{task}: simulation time"), csv, "dim", "wall_s", "method", true, true, &format!("{stem}_time.png"))];
    }
    Vec::new()
}

/// Writes specs and the script into `<results>/plots`. Returns the files
/// written; an empty list means there was nothing to plot.
pub fn emit_plots(results: &Path) -> Result<Vec<PathBuf>> {
    let entries = match std::fs::read_dir(results) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(BenchError::io(results, e)),
    };
    let mut csvs: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|name| name.ends_with(".csv"))
        .collect();
    csvs.sort();
    let specs: Vec<PlotSpec> = csvs.iter().flat_map(|c| specs_for(c)).collect();
    if specs.is_empty() {
        return Ok(Vec::new());
    }
    let dir = results.join(PLOT_DIR);
    std::fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
    let mut written = Vec::new();
    for s in &specs {
        let path = dir.join(s.output.replace(".png", ".json"));
        let text = serde_json::to_string_pretty(s).map_err(|e| BenchError::Output(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|e| BenchError::io(&path, e))?;
        written.push(path);
    }
    let script = dir.join(SCRIPT_NAME);
    std::fs::write(&script, PLOT_SCRIPT).map_err(|e| BenchError::io(&script, e))?;
    written.push(script);
    Ok(written)
}

const PLOT_SCRIPT: &str = r##"#!/usr/bin/env python3
"""Render qkmm-bench plot specs.

usage: python plot_results.py [spec.json ...]   (default: every spec next to this script)
"""
import csv
import glob
import json
import os
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_rows(path):
    with open(path, newline="") as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines))


def render(spec_path):
    with open(spec_path) as f:
        spec = json.load(f)
    here = os.path.dirname(os.path.abspath(spec_path))
    rows = read_rows(os.path.join(here, os.pardir, spec["csv"]))
    groups = defaultdict(lambda: defaultdict(list))
    for row in rows:
        groups[row[spec["series"]]][float(row[spec["x"]])].append(float(row[spec["y"]]))
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in sorted(groups):
        xs = sorted(groups[name])
        ys = [sum(groups[name][x]) / len(groups[name][x]) for x in xs]
        ax.plot(xs, ys, marker="o", label=f"{spec['series']}={name}")
    if spec["log_x"]:
        ax.set_xscale("log", base=2)
    if spec["log_y"]:
        ax.set_yscale("log")
    ax.set_xlabel(spec["x"])
    ax.set_ylabel(spec["y"])
    ax.set_title(spec["title"])
    ax.legend()
    fig.tight_layout()
    out = os.path.join(here, spec["output"])
    fig.savefig(out, dpi=150)
    plt.close(fig)
    print(out)


def main(argv):
    specs = argv or sorted(glob.glob(os.path.join(os.path.dirname(os.path.abspath(__file__)), "*.json")))
    for path in specs:
        render(path)


if __name__ == "__main__":
    main(sys.argv[1:])
"##;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_sweep_gets_two_specs() {
        let s = specs_for("noise_sweep_v2v.csv");
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].y, "fidelity");
        assert_eq!(s[1].y, "mean_error");
    }

    #[test]
    fn compare_is_log_log_by_method() {
        let s = specs_for("compare_m2m.csv");
        assert_eq!(s.len(), 1);
        assert!(s[0].log_x && s[0].log_y);
        assert_eq!(s[0].series, "method");
    }

    #[test]
    fn unknown_files_ignored() {
        assert!(specs_for("notes.csv").is_empty());
    }
}
