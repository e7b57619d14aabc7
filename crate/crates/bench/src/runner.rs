//! Instance generation and the build / decompose / simulate / estimate pipeline.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qkmm_core::algos::{
    build_hadamard_test, build_m2m, build_mmm, build_swap_test, build_v2m, build_v2v, Normalization, QkmmCircuitBundle,
    RowNormalizedMatrix,
};
use qkmm_core::count::{count_gates, CountMode};
use qkmm_core::decompose::decompose_circuit;
use qkmm_core::encoding::NormalizedVector;
use qkmm_core::instances::{random_normalized_matrix, random_orthogonal, random_unit_vector, trial_rng};
use qkmm_core::metrics::{
    accuracy_gate, classical_dot, classical_matvec, classical_product, fidelity, matrix_overlap_fidelity,
    per_element_errors, reconstruct_magnitudes, Outcomes,
};
use qkmm_core::noise::{NoiseModel, NoiseParams, NoiseSource};
use qkmm_core::state::{marginal_prefix, qubit_zero_probability, simulate};
use qkmm_core::{sample_shots, Circuit, DensityMatrix, QkmmError};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, MatrixSource, Method, TaskKind, DENSITY_QUBIT_CAP};
use crate::error::{BenchError, Result};
use crate::inputs::{read_matrix, read_vector};

/// Mixed into the trial seed to get the shot-sampling seed.
pub const SAMPLE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// One CSV row: a single trial of one method at one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub command: String,
    pub task: String,
    pub method: String,
    pub sources: String,
    pub dim: usize,
    pub parallel: usize,
    pub trial: usize,
    pub seed: u64,
    pub shots: u64,
    pub exact: bool,
    pub qubits: usize,
    pub ancilla: usize,
    pub circuits: u64,
    pub gates_model: u64,
    pub gates_measured: u64,
    pub per_product_gates: f64,
    pub fidelity: f64,
    pub matrix_fidelity: f64,
    pub mean_error: f64,
    pub max_error: f64,
    pub pass_rate: f64,
    pub build_s: f64,
    pub decompose_s: f64,
    pub simulate_s: f64,
    pub estimate_s: f64,
    pub wall_s: f64,
    pub per_product_s: f64,
    /// Single-trial config that replays this row.
    pub echo: String,
}

#[derive(Clone, Debug)]
enum Operands {
    Vectors(NormalizedVector, NormalizedVector),
    MatVec(RowNormalizedMatrix, NormalizedVector),
    MatMat(RowNormalizedMatrix, RowNormalizedMatrix),
    Bank(RowNormalizedMatrix, Vec<DMatrix<f64>>),
}

impl Operands {
    fn dim(&self) -> usize {
        match self {
            Operands::Vectors(a, _) => a.len(),
            Operands::MatVec(a, _) | Operands::MatMat(a, _) | Operands::Bank(a, _) => a.dim(),
        }
    }

    /// Signed reference values in readout order.
    fn truth(&self, as_product: bool) -> Result<Vec<f64>> {
        Ok(match self {
            Operands::Vectors(a, b) => vec![classical_dot(a.values(), b.values())?],
            Operands::MatVec(a, x) => classical_matvec(a.values(), x.values())?,
            Operands::MatMat(a, b) => row_major(&classical_product(a.values(), b.values())?),
            Operands::Bank(a, blocks) => {
                let mut out = Vec::new();
                for b in blocks {
                    let rhs = if as_product { b.clone() } else { b.transpose() };
                    out.extend(row_major(&classical_product(a.values(), &rhs)?));
                }
                out
            }
        })
    }

    /// Vector pairs whose inner products make up the truth, in the same order.
    fn pairs(&self) -> Result<Vec<(NormalizedVector, NormalizedVector)>> {
        Ok(match self {
            Operands::Vectors(a, b) => vec![(a.clone(), b.clone())],
            Operands::MatVec(a, x) => (0..a.dim()).map(|i| (a.vector(i), x.clone())).collect(),
            Operands::MatMat(a, b) => {
                let mut out = Vec::with_capacity(a.dim() * b.dim());
                for i in 0..a.dim() {
                    for j in 0..b.dim() {
                        out.push((a.vector(i), b.vector(j)));
                    }
                }
                out
            }
            Operands::Bank(..) => {
                return Err(BenchError::Usage("swap and hadamard baselines do not cover mmm".into()));
            }
        })
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Data read once from `input_a` / `input_b`.
#[derive(Clone, Debug)]
pub struct FileInputs {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl FileInputs {
    pub fn load(cfg: &ExperimentConfig) -> Result<Option<Self>> {
        if cfg.matrix_source != MatrixSource::File {
            return Ok(None);
        }
        let (Some(pa), Some(pb)) = (&cfg.input_a, &cfg.input_b) else {
            return Err(BenchError::Usage("file inputs need both --input-a and --input-b".into()));
        };
        let as_row = |v: Vec<f64>| DMatrix::from_row_slice(1, v.len(), &v);
        let (a, b) = match cfg.task {
            TaskKind::V2v | TaskKind::Swap | TaskKind::Hadamard => (as_row(read_vector(pa)?), as_row(read_vector(pb)?)),
            TaskKind::V2m => (read_matrix(pa)?, as_row(read_vector(pb)?)),
            TaskKind::M2m => (read_matrix(pa)?, read_matrix(pb)?),
            TaskKind::Mmm | TaskKind::Gatecount => {
                return Err(BenchError::Usage(format!("task {} does not take file inputs", cfg.task.name())));
            }
        };
        Ok(Some(Self { a, b }))
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }
}

fn file_vector(m: &DMatrix<f64>, auto: bool) -> Result<NormalizedVector> {
    let values: Vec<f64> = m.row(0).iter().copied().collect();
    Ok(if auto {
        NormalizedVector::normalized(&values)?.0
    } else {
        NormalizedVector::new(values)?
    })
}

fn file_matrix(m: &DMatrix<f64>, normalization: Normalization, auto: bool) -> Result<RowNormalizedMatrix> {
    Ok(if auto {
        RowNormalizedMatrix::auto_normalized(m.clone(), normalization)?
    } else {
        RowNormalizedMatrix::new(m.clone(), normalization)?
    })
}

fn make_operands(
    task: TaskKind,
    dim: usize,
    parallel: usize,
    files: Option<&FileInputs>,
    auto: bool,
    rng: &mut impl Rng,
) -> Result<Operands> {
    if let Some(f) = files {
        let ops = match task {
            TaskKind::V2v | TaskKind::Swap | TaskKind::Hadamard => {
                Operands::Vectors(file_vector(&f.a, auto)?, file_vector(&f.b, auto)?)
            }
            TaskKind::V2m => Operands::MatVec(file_matrix(&f.a, Normalization::Rows, auto)?, file_vector(&f.b, auto)?),
            TaskKind::M2m => Operands::MatMat(
                file_matrix(&f.a, Normalization::Rows, auto)?,
                file_matrix(&f.b, Normalization::Columns, auto)?,
            ),
            _ => unreachable!("rejected when loading"),
        };
        let same = match &ops {
            Operands::Vectors(a, b) => a.len() == b.len(),
            Operands::MatVec(a, x) => a.dim() == x.len(),
            Operands::MatMat(a, b) => a.dim() == b.dim(),
            Operands::Bank(..) => true,
        };
        if !same {
            return Err(QkmmError::Validation("input dimensions do not match".into()).into());
        }
        return Ok(ops);
    }
    Ok(match task {
        TaskKind::V2v | TaskKind::Swap | TaskKind::Hadamard => {
            let a = random_unit_vector(dim, rng);
            Operands::Vectors(a, random_unit_vector(dim, rng))
        }
        TaskKind::V2m => {
            let a = random_normalized_matrix(dim, Normalization::Rows, rng);
            Operands::MatVec(a, random_unit_vector(dim, rng))
        }
        TaskKind::M2m => {
            let a = random_normalized_matrix(dim, Normalization::Rows, rng);
            Operands::MatMat(a, random_normalized_matrix(dim, Normalization::Columns, rng))
        }
        TaskKind::Mmm => {
            let a = random_normalized_matrix(dim, Normalization::Rows, rng);
            let blocks = (0..parallel).map(|_| random_orthogonal(dim, rng)).collect();
            Operands::Bank(a, blocks)
        }
        TaskKind::Gatecount => return Err(BenchError::Usage("gatecount has no instances".into())),
    })
}

#[derive(Clone, Debug)]
enum Readout {
    Bundle(QkmmCircuitBundle),
    /// Ancilla-zero probability of qubit 0; swap reads |a·b|, hadamard reads a·b.
    Ancilla { signed: bool },
}

struct Job {
    circuits: Vec<(Circuit, Readout)>,
    truth: Vec<f64>,
    signed: bool,
    products: usize,
}

fn build_job(method: Method, ops: &Operands, as_product: bool) -> Result<Job> {
    let truth = ops.truth(as_product)?;
    let (circuits, signed) = match method {
        Method::Qkmm => {
            let bundle = match ops {
                Operands::Vectors(a, b) => build_v2v(a, b)?,
                Operands::MatVec(a, x) => build_v2m(a, x)?,
                Operands::MatMat(a, b) => build_m2m(a, b)?,
                Operands::Bank(a, blocks) => {
                    let complex: Vec<DMatrix<Complex64>> =
                        blocks.iter().map(|b| b.map(|x| Complex64::new(x, 0.0))).collect();
                    build_mmm(a, &complex, as_product)?
                }
            };
            (vec![(bundle.circuit.clone(), Readout::Bundle(bundle))], false)
        }
        Method::Swap | Method::Hadamard => {
            let signed = method == Method::Hadamard;
            let mut out = Vec::new();
            for (a, b) in ops.pairs()? {
                let c = if signed {
                    build_hadamard_test(&a, &b)?
                } else {
                    build_swap_test(&a, &b)?
                };
                out.push((c, Readout::Ancilla { signed }));
            }
            (out, signed)
        }
    };
    let products = match ops {
        Operands::Bank(_, blocks) => blocks.len(),
        _ => 1,
    };
    Ok(Job {
        circuits,
        truth,
        signed,
        products,
    })
}

#[derive(Default)]
struct Phases {
    build: f64,
    decompose: f64,
    simulate: f64,
    estimate: f64,
}

struct Executed {
    estimates: Vec<f64>,
    fidelity: f64,
    qubits: usize,
    ancilla: usize,
    gates_model: u64,
    gates_measured: u64,
}

fn zero_probability_from_counts(hist: &qkmm_core::ShotHistogram) -> f64 {
    let half = 1usize << (hist.num_qubits - 1);
    let zero: u64 = hist.counts.range(..half).map(|(_, &c)| c).sum();
    zero as f64 / hist.total_shots as f64
}

fn execute(job: &Job, cfg: &ExperimentConfig, noise: Option<&NoiseModel>, sample_seed: u64, t: &mut Phases) -> Result<Executed> {
    let mut estimates = Vec::with_capacity(job.truth.len());
    let mut fidelity_sum = 0.0;
    let (mut qubits, mut ancilla, mut gates_model, mut gates_measured) = (0, 0, 0, 0);
    for (c, (circuit, readout)) in job.circuits.iter().enumerate() {
        let width = circuit.num_qubits();
        qubits = qubits.max(width);
        let measured = count_gates(circuit, CountMode::Measured);
        ancilla = ancilla.max(measured.ancilla_qubits);
        gates_measured += measured.total;
        gates_model += count_gates(circuit, CountMode::PaperModel).total;

        let mut lowered = None;
        if noise.is_some() {
            let start = Instant::now();
            let d = decompose_circuit(circuit)?;
            t.decompose += start.elapsed().as_secs_f64();
            if d.num_qubits() > DENSITY_QUBIT_CAP {
                return Err(BenchError::Usage(format!(
                    "noisy run needs {} qubits, density-matrix cap is {DENSITY_QUBIT_CAP}",
                    d.num_qubits()
                )));
            }
            lowered = Some(d);
        }

        let start = Instant::now();
        let ideal = simulate(circuit)?.probabilities();
        let actual = match (noise, &lowered) {
            (Some(model), Some(d)) => {
                let mut dm = DensityMatrix::zero(d.num_qubits())?;
                model.run(d, &mut dm)?;
                marginal_prefix(&dm.probabilities()?, width)?
            }
            _ => ideal.clone(),
        };
        fidelity_sum += fidelity(&ideal, &actual)?;
        t.simulate += start.elapsed().as_secs_f64();

        let start = Instant::now();
        let hist = if cfg.exact {
            None
        } else {
            Some(sample_shots(&actual, cfg.shots, sample_seed.wrapping_add(c as u64))?)
        };
        match readout {
            Readout::Bundle(bundle) => {
                let outcomes = match &hist {
                    Some(h) => Outcomes::Histogram(h),
                    None => Outcomes::Probabilities(&actual),
                };
                estimates.extend(reconstruct_magnitudes(outcomes, bundle)?.magnitudes);
            }
            Readout::Ancilla { signed } => {
                let p0 = match &hist {
                    Some(h) => zero_probability_from_counts(h),
                    None => qubit_zero_probability(&actual, 0)?,
                };
                estimates.push(if *signed {
                    2.0 * p0 - 1.0
                } else {
                    (2.0 * p0 - 1.0).max(0.0).sqrt()
                });
            }
        }
        t.estimate += start.elapsed().as_secs_f64();
    }
    Ok(Executed {
        estimates,
        fidelity: fidelity_sum / job.circuits.len() as f64,
        qubits,
        ancilla,
        gates_model,
        gates_measured,
    })
}

/// Label for an enabled-source set: `none`, `T1`, `T1+T2+GATE`, ...
pub fn sources_label(noise: Option<&NoiseParams>) -> String {
    match noise {
        Some(p) if !p.enabled_sources.is_empty() => p
            .enabled_sources
            .iter()
            .map(NoiseSource::to_string)
            .collect::<Vec<_>>()
            .join("+"),
        _ => "none".into(),
    }
}

/// What a sweep point runs: task, method, dimension and bank size.
#[derive(Clone, Copy, Debug)]
pub struct Point<'a> {
    pub command: &'a str,
    pub task: TaskKind,
    pub method: Method,
    pub dim: usize,
    pub parallel: usize,
}

fn echo_config(cfg: &ExperimentConfig, point: &Point<'_>, seed: u64) -> ExperimentConfig {
    let mut echo = cfg.clone();
    echo.task = point.task;
    echo.dims = vec![point.dim];
    echo.seed = seed;
    echo.trials = 1;
    echo.parallel_counts = vec![point.parallel];
    echo.methods = vec![point.method];
    echo
}

fn run_trial(
    cfg: &ExperimentConfig,
    point: &Point<'_>,
    files: Option<&FileInputs>,
    noise: Option<&NoiseModel>,
    trial: usize,
) -> Result<Row> {
    let wall = Instant::now();
    let mut phases = Phases::default();
    let mut rng = trial_rng(cfg.seed, trial as u64);
    let trial_seed = cfg.seed.wrapping_add(trial as u64);

    let start = Instant::now();
    let ops = make_operands(point.task, point.dim, point.parallel, files, cfg.auto_normalize, &mut rng)?;
    let job = build_job(point.method, &ops, cfg.as_product)?;
    phases.build = start.elapsed().as_secs_f64();

    let out = execute(&job, cfg, noise, trial_seed ^ SAMPLE_SALT, &mut phases)?;
    let errors = if job.signed {
        out.estimates.iter().zip(&job.truth).map(|(e, t)| (e - t).abs()).collect()
    } else {
        per_element_errors(&out.estimates, &job.truth)?
    };
    let zeros = vec![0.0; errors.len()];
    let gate = accuracy_gate(&errors, &zeros, cfg.bound)?;
    let mean_error = errors.iter().sum::<f64>() / errors.len().max(1) as f64;
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    let wall_s = wall.elapsed().as_secs_f64();
    let echo = serde_json::to_string(&echo_config(cfg, point, trial_seed)).map_err(|e| BenchError::Output(e.to_string()))?;
    Ok(Row {
        command: point.command.into(),
        task: point.task.name().into(),
        method: point.method.name().into(),
        sources: sources_label(cfg.noise.as_ref()),
        dim: ops.dim(),
        parallel: point.parallel,
        trial,
        seed: trial_seed,
        shots: if cfg.exact { 0 } else { cfg.shots },
        exact: cfg.exact,
        qubits: out.qubits,
        ancilla: out.ancilla,
        circuits: job.circuits.len() as u64,
        gates_model: out.gates_model,
        gates_measured: out.gates_measured,
        per_product_gates: out.gates_model as f64 / job.products as f64,
        fidelity: out.fidelity,
        matrix_fidelity: matrix_overlap_fidelity(&out.estimates, &job.truth)?,
        mean_error,
        max_error,
        pass_rate: gate.pass_rate,
        build_s: phases.build,
        decompose_s: phases.decompose,
        simulate_s: phases.simulate,
        estimate_s: phases.estimate,
        wall_s,
        per_product_s: wall_s / job.products as f64,
        echo,
    })
}

/// Runs `cfg.trials` independent trials of one point; rows come back in trial order.
pub fn run_point(cfg: &ExperimentConfig, point: Point<'_>, files: Option<&FileInputs>) -> Result<Vec<Row>> {
    if cfg.noise.is_some() && point.task == TaskKind::Mmm {
        return Err(BenchError::Usage("noisy runs do not support mmm".into()));
    }
    let model = cfg.noise.as_ref().map(NoiseModel::new).transpose()?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, &point, files, model.as_ref(), trial))
        .collect()
}
