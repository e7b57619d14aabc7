//! Experiment configuration: file schema (TOML or JSON) plus CLI overrides.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use qkmm_core::noise::NoiseParams;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Largest N any sweep accepts.
pub const MAX_DIM: usize = 1 << 12;
/// Widest density matrix the noisy runs will allocate.
pub const DENSITY_QUBIT_CAP: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    V2v,
    V2m,
    M2m,
    Mmm,
    Swap,
    Hadamard,
    Gatecount,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::V2v => "v2v",
            TaskKind::V2m => "v2m",
            TaskKind::M2m => "m2m",
            TaskKind::Mmm => "mmm",
            TaskKind::Swap => "swap",
            TaskKind::Hadamard => "hadamard",
            TaskKind::Gatecount => "gatecount",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MatrixSource {
    Random,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Qkmm,
    Swap,
    Hadamard,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Qkmm => "qkmm",
            Method::Swap => "swap",
            Method::Hadamard => "hadamard",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub dims: Vec<usize>,
    pub shots: u64,
    pub seed: u64,
    pub trials: usize,
    /// Use exact probabilities instead of sampled shots.
    pub exact: bool,
    pub noise: Option<NoiseParams>,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub matrix_source: MatrixSource,
    pub input_a: Option<PathBuf>,
    pub input_b: Option<PathBuf>,
    pub auto_normalize: bool,
    /// Elementwise accuracy bound.
    pub bound: f64,
    /// K values for M-MM runs.
    pub parallel_counts: Vec<usize>,
    pub as_product: bool,
    pub methods: Vec<Method>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: TaskKind::M2m,
            dims: vec![2, 4],
            shots: 1000,
            seed: 0,
            trials: 1,
            exact: false,
            noise: None,
            output_dir: PathBuf::from("results"),
            format: OutputFormat::Csv,
            matrix_source: MatrixSource::Random,
            input_a: None,
            input_b: None,
            auto_normalize: false,
            bound: 0.1,
            parallel_counts: vec![2],
            as_product: false,
            methods: vec![Method::Qkmm, Method::Swap, Method::Hadamard],
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))
}

fn is_toml(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"))
}

/// Parses TOML (by `.toml` extension) or JSON.
pub fn parse_file<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = read(path)?;
    if is_toml(path) {
        toml::from_str(&text).map_err(|e| BenchError::Usage(format!("{}: {e}", path.display())))
    } else {
        serde_json::from_str(&text).map_err(|e| BenchError::Usage(format!("{}: {e}", path.display())))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        parse_file(path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(BenchError::Usage("no dimensions given".into()));
        }
        for &d in &self.dims {
            if d < 2 || !d.is_power_of_two() || d > MAX_DIM {
                return Err(BenchError::Usage(format!(
                    "dimension {d} must be a power of two in [2, {MAX_DIM}]"
                )));
            }
        }
        if self.trials == 0 {
            return Err(BenchError::Usage("trials must be at least 1".into()));
        }
        if !self.exact && self.shots == 0 {
            return Err(BenchError::Usage("shots must be at least 1 (or pass --exact)".into()));
        }
        if self.bound.is_nan() || self.bound <= 0.0 {
            return Err(BenchError::Usage(format!("bound must be positive, got {}", self.bound)));
        }
        if self.parallel_counts.is_empty() {
            return Err(BenchError::Usage("no parallel counts given".into()));
        }
        for &k in &self.parallel_counts {
            if k == 0 || !k.is_power_of_two() {
                return Err(BenchError::Usage(format!("parallel count {k} must be a power of two")));
            }
        }
        if self.methods.is_empty() {
            return Err(BenchError::Usage("no methods given".into()));
        }
        if let Some(noise) = &self.noise {
            noise.validate().map_err(|e| BenchError::Usage(e.to_string()))?;
        }
        if self.matrix_source == MatrixSource::File && (self.input_a.is_none() || self.input_b.is_none()) {
            return Err(BenchError::Usage("file inputs need both --input-a and --input-b".into()));
        }
        Ok(())
    }
}
