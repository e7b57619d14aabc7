//! Kernel-style product circuits (vector·vector, matrix·vector, matrix·matrix,
//! one matrix against many unitaries) and the Swap/Hadamard test baselines.
//!
//! Every builder has a `stream_*` twin that writes gates into any
//! [`GateSink`], so gate counting at large N never materializes a circuit.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Control, Gate, GateSink, UnitaryBlock};
use crate::encoding::{compute_angles, emit_encoder, AngleTree, NormalizedVector};
use crate::error::{QkmmError, Result};

/// Largest accepted deviation of a row (or column) norm from 1.
pub const MATRIX_NORM_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Rows,
    Columns,
}

/// Square real matrix whose rows (or columns) are unit vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct RowNormalizedMatrix {
    values: DMatrix<f64>,
    normalization: Normalization,
    scale_factors: Vec<f64>,
}

impl RowNormalizedMatrix {
    /// Rejects any row/column whose norm is off by more than [`MATRIX_NORM_TOL`].
    pub fn new(values: DMatrix<f64>, normalization: Normalization) -> Result<Self> {
        Self::build(values, normalization, false)
    }

    /// Rescales every row/column to unit norm; the divided-out norms are kept
    /// in [`scale_factors`](Self::scale_factors).
    pub fn auto_normalized(values: DMatrix<f64>, normalization: Normalization) -> Result<Self> {
        Self::build(values, normalization, true)
    }

    fn build(mut values: DMatrix<f64>, normalization: Normalization, rescale: bool) -> Result<Self> {
        let dim = values.nrows();
        if dim != values.ncols() {
            return Err(QkmmError::Validation(format!(
                "matrix must be square, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if dim < 2 || !dim.is_power_of_two() {
            return Err(QkmmError::Validation(format!(
                "matrix dimension {dim} is not a power of two ≥ 2"
            )));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(QkmmError::Numeric("matrix has non-finite entries".into()));
        }
        let what = match normalization {
            Normalization::Rows => "row",
            Normalization::Columns => "column",
        };
        let mut scale_factors = Vec::with_capacity(dim);
        for i in 0..dim {
            let norm = match normalization {
                Normalization::Rows => values.row(i).norm(),
                Normalization::Columns => values.column(i).norm(),
            };
            if norm == 0.0 {
                return Err(QkmmError::Validation(format!("{what} {i} is zero")));
            }
            if !rescale && (norm - 1.0).abs() > MATRIX_NORM_TOL {
                return Err(QkmmError::Validation(format!(
                    "{what} {i} has norm {norm}, expected 1 (enable auto-normalization to rescale)"
                )));
            }
            match normalization {
                Normalization::Rows => values.row_mut(i).unscale_mut(norm),
                Normalization::Columns => values.column_mut(i).unscale_mut(norm),
            }
            scale_factors.push(norm);
        }
        Ok(Self {
            values,
            normalization,
            scale_factors,
        })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn scale_factors(&self) -> &[f64] {
        &self.scale_factors
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    /// Row `i` (or column `i`, per the normalization) as an encodable vector.
    pub fn vector(&self, i: usize) -> NormalizedVector {
        let v: Vec<f64> = match self.normalization {
            Normalization::Rows => self.values.row(i).iter().copied().collect(),
            Normalization::Columns => self.values.column(i).iter().copied().collect(),
        };
        NormalizedVector::new(v).expect("renormalized at construction")
    }

    fn angle_trees(&self) -> Vec<AngleTree> {
        (0..self.dim()).map(|i| compute_angles(&self.vector(i))).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    V2v,
    V2m,
    M2m,
    Mmm,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::V2v => "v2v",
            Task::V2m => "v2m",
            Task::M2m => "m2m",
            Task::Mmm => "mmm",
        })
    }
}

/// Which basis states carry which product entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadoutRule {
    pub description: String,
    /// Shape of the estimate: `[1]`, `[N]`, `[N, N]` or `[K, N, N]`.
    pub shape: Vec<usize>,
    /// Basis index of every cell, in row-major order of `shape`.
    pub cells: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct QkmmCircuitBundle {
    pub task: Task,
    pub circuit: Circuit,
    /// P(cell) = magnitude² · normalization_factor.
    pub normalization_factor: f64,
    pub readout: ReadoutRule,
}

impl QkmmCircuitBundle {
    pub fn register_map(&self) -> BTreeMap<String, Range<usize>> {
        self.circuit
            .registers()
            .iter()
            .map(|r| (r.name.clone(), r.qubits()))
            .collect()
    }

    pub fn num_qubits(&self) -> usize {
        self.circuit.num_qubits()
    }
}

fn check_same_len(a: &NormalizedVector, b: &NormalizedVector) -> Result<()> {
    if a.len() != b.len() {
        return Err(QkmmError::Validation(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

fn check_normalization(m: &RowNormalizedMatrix, expected: Normalization, name: &str) -> Result<()> {
    if m.normalization() != expected {
        return Err(QkmmError::Validation(format!(
            "{name} must be {expected:?}-normalized, got {:?}",
            m.normalization()
        )));
    }
    Ok(())
}

fn range(start: usize, len: usize) -> Vec<usize> {
    (start..start + len).collect()
}

fn hadamards(qubits: &[usize], sink: &mut impl GateSink) -> Result<()> {
    for &q in qubits {
        sink.add(Gate::H(q))?;
    }
    Ok(())
}

pub fn stream_v2v(a: &NormalizedVector, b: &NormalizedVector, sink: &mut impl GateSink) -> Result<()> {
    check_same_len(a, b)?;
    let data = range(0, a.num_qubits());
    emit_encoder(&compute_angles(a), &data, &[], 0, false, sink)?;
    emit_encoder(&compute_angles(b), &data, &[], 0, true, sink)
}

/// Encoder of `a` then inverse encoder of `b`; P(|0…0⟩) = (a·b)².
pub fn build_v2v(a: &NormalizedVector, b: &NormalizedVector) -> Result<QkmmCircuitBundle> {
    check_same_len(a, b)?;
    let n = a.num_qubits();
    let mut circuit = Circuit::new(n);
    circuit.add_register("data", 0, n)?;
    stream_v2v(a, b, &mut circuit)?;
    Ok(QkmmCircuitBundle {
        task: Task::V2v,
        circuit,
        normalization_factor: 1.0,
        readout: ReadoutRule {
            description: "P(data=0) = (a·b)^2".into(),
            shape: vec![1],
            cells: vec![0],
        },
    })
}

pub fn stream_v2m(a: &RowNormalizedMatrix, x: &NormalizedVector, sink: &mut impl GateSink) -> Result<()> {
    check_normalization(a, Normalization::Rows, "A")?;
    if a.dim() != x.len() {
        return Err(QkmmError::Validation(format!(
            "dimension mismatch: A is {0}x{0}, x has {1} entries",
            a.dim(),
            x.len()
        )));
    }
    let n = a.num_qubits();
    let index = range(0, n);
    let data = range(n, n);
    hadamards(&index, sink)?;
    for (i, tree) in a.angle_trees().iter().enumerate() {
        emit_encoder(tree, &data, &index, i, false, sink)?;
    }
    emit_encoder(&compute_angles(x), &data, &[], 0, true, sink)
}

/// Index register i (qubits 0..n) selects row A_i; P(|i⟩|0⟩) = ⟨A_i|x⟩²/N.
pub fn build_v2m(a: &RowNormalizedMatrix, x: &NormalizedVector) -> Result<QkmmCircuitBundle> {
    let n = a.num_qubits();
    let dim = a.dim();
    let mut circuit = Circuit::new(2 * n);
    circuit.add_register("index_i", 0, n)?;
    circuit.add_register("data", n, n)?;
    stream_v2m(a, x, &mut circuit)?;
    Ok(QkmmCircuitBundle {
        task: Task::V2m,
        circuit,
        normalization_factor: 1.0 / dim as f64,
        readout: ReadoutRule {
            description: "P(index_i=i, data=0) = (A_i·x)^2 / N".into(),
            shape: vec![dim],
            cells: (0..dim).map(|i| i * dim).collect(),
        },
    })
}

pub fn stream_m2m(a: &RowNormalizedMatrix, b: &RowNormalizedMatrix, sink: &mut impl GateSink) -> Result<()> {
    check_normalization(a, Normalization::Rows, "A")?;
    check_normalization(b, Normalization::Columns, "B")?;
    if a.dim() != b.dim() {
        return Err(QkmmError::Validation(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let n = a.num_qubits();
    let index_j = range(0, n);
    let index_i = range(n, n);
    let data = range(2 * n, n);
    hadamards(&index_j, sink)?;
    hadamards(&index_i, sink)?;
    for (i, tree) in a.angle_trees().iter().enumerate() {
        emit_encoder(tree, &data, &index_i, i, false, sink)?;
    }
    for (j, tree) in b.angle_trees().iter().enumerate() {
        emit_encoder(tree, &data, &index_j, j, true, sink)?;
    }
    Ok(())
}

/// Registers index_j (0..n), index_i (n..2n), data (2n..3n);
/// P(|j⟩|i⟩|0⟩) = (A·B)_{ij}² / N².
pub fn build_m2m(a: &RowNormalizedMatrix, b: &RowNormalizedMatrix) -> Result<QkmmCircuitBundle> {
    let n = a.num_qubits();
    let dim = a.dim();
    let mut circuit = Circuit::new(3 * n);
    circuit.add_register("index_j", 0, n)?;
    circuit.add_register("index_i", n, n)?;
    circuit.add_register("data", 2 * n, n)?;
    stream_m2m(a, b, &mut circuit)?;
    let mut cells = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            cells.push((j * dim + i) * dim);
        }
    }
    Ok(QkmmCircuitBundle {
        task: Task::M2m,
        circuit,
        normalization_factor: 1.0 / (dim * dim) as f64,
        readout: ReadoutRule {
            description: "cell [i][j]: P(index_j=j, index_i=i, data=0) = (A·B)_ij^2 / N^2".into(),
            shape: vec![dim, dim],
            cells,
        },
    })
}

fn mmm_blocks(a: &RowNormalizedMatrix, blocks: &[DMatrix<Complex64>], as_product: bool) -> Result<Vec<Arc<UnitaryBlock>>> {
    check_normalization(a, Normalization::Rows, "A")?;
    if blocks.is_empty() {
        return Err(QkmmError::Validation("at least one unitary is required".into()));
    }
    let dim = a.dim();
    let padded = blocks.len().next_power_of_two();
    let mut out = Vec::with_capacity(padded);
    for k in 0..padded {
        let block = match blocks.get(k) {
            Some(m) => {
                if m.nrows() != dim || m.ncols() != dim {
                    return Err(QkmmError::Validation(format!(
                        "B_{k} is {}x{}, expected {dim}x{dim}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                if as_product {
                    UnitaryBlock::new(format!("B{k}T"), m.transpose())?
                } else {
                    UnitaryBlock::new(format!("B{k}"), m.clone())?
                }
            }
            None => UnitaryBlock::new(format!("I{k}"), DMatrix::identity(dim, dim))?,
        };
        out.push(Arc::new(block));
    }
    Ok(out)
}

pub fn stream_mmm(
    a: &RowNormalizedMatrix,
    blocks: &[DMatrix<Complex64>],
    as_product: bool,
    sink: &mut impl GateSink,
) -> Result<()> {
    let blocks = mmm_blocks(a, blocks, as_product)?;
    let m = blocks.len().trailing_zeros() as usize;
    let n = a.num_qubits();
    let index_k = range(0, m);
    let index_j = range(m, n);
    let data = range(m + n, n);
    hadamards(&index_k, sink)?;
    hadamards(&index_j, sink)?;
    for (j, tree) in a.angle_trees().iter().enumerate() {
        emit_encoder(tree, &data, &index_j, j, false, sink)?;
    }
    for (k, block) in blocks.into_iter().enumerate() {
        let flips: Vec<usize> = index_k
            .iter()
            .enumerate()
            .filter(|(pos, _)| k >> (m - 1 - pos) & 1 == 0)
            .map(|(_, &q)| q)
            .collect();
        for &q in &flips {
            sink.add(Gate::X(q))?;
        }
        let gate = if m == 0 {
            Gate::Unitary {
                targets: data.clone(),
                block,
            }
        } else {
            Gate::McUnitary {
                controls: index_k.iter().copied().map(Control::on).collect(),
                targets: data.clone(),
                block,
            }
        };
        sink.add(gate)?;
        for &q in flips.iter().rev() {
            sink.add(Gate::X(q))?;
        }
    }
    Ok(())
}

/// One row-normalized A against K unitaries B_k (K padded to a power of two
/// with identities). Registers index_k, index_j, data; cell [k][j][i] is
/// P(k, j, i) = |(B_k·A_jᵀ)_i|² / (N·K), i.e. |A·B_kᵀ|_{ji}. With
/// `as_product` each B_k is transposed first so cell [k] holds |A·B_k|.
pub fn build_mmm(a: &RowNormalizedMatrix, blocks: &[DMatrix<Complex64>], as_product: bool) -> Result<QkmmCircuitBundle> {
    check_normalization(a, Normalization::Rows, "A")?;
    let k_real = blocks.len();
    let k_padded = k_real.max(1).next_power_of_two();
    let m = k_padded.trailing_zeros() as usize;
    let n = a.num_qubits();
    let dim = a.dim();
    let mut circuit = Circuit::new(m + 2 * n);
    if m > 0 {
        circuit.add_register("index_k", 0, m)?;
    }
    circuit.add_register("index_j", m, n)?;
    circuit.add_register("data", m + n, n)?;
    stream_mmm(a, blocks, as_product, &mut circuit)?;
    let mut cells = Vec::with_capacity(k_real * dim * dim);
    for k in 0..k_real {
        for j in 0..dim {
            for i in 0..dim {
                cells.push((k * dim + j) * dim + i);
            }
        }
    }
    let description = if as_product {
        "cell [k][j][i]: P(k, j, i) = |(A·B_k)_ji|^2 / (N·K)"
    } else {
        "cell [k][j][i]: P(k, j, i) = |row_i(B_k)·A_j|^2 / (N·K) = |(A·B_k^T)_ji|^2 / (N·K)"
    };
    Ok(QkmmCircuitBundle {
        task: Task::Mmm,
        circuit,
        normalization_factor: 1.0 / (dim * k_padded) as f64,
        readout: ReadoutRule {
            description: description.into(),
            shape: vec![k_real, dim, dim],
            cells,
        },
    })
}

pub fn stream_swap_test(a: &NormalizedVector, b: &NormalizedVector, sink: &mut impl GateSink) -> Result<()> {
    check_same_len(a, b)?;
    let n = a.num_qubits();
    let ra = range(1, n);
    let rb = range(1 + n, n);
    sink.add(Gate::H(0))?;
    emit_encoder(&compute_angles(a), &ra, &[], 0, false, sink)?;
    emit_encoder(&compute_angles(b), &rb, &[], 0, false, sink)?;
    for (&qa, &qb) in ra.iter().zip(&rb) {
        sink.add(Gate::Cnot { control: qb, target: qa })?;
        sink.add(Gate::Toffoli {
            controls: [0, qa],
            target: qb,
        })?;
        sink.add(Gate::Cnot { control: qb, target: qa })?;
    }
    sink.add(Gate::H(0))
}

/// Control qubit 0, registers a and b; P(control=0) = (1 + (a·b)²)/2.
pub fn build_swap_test(a: &NormalizedVector, b: &NormalizedVector) -> Result<Circuit> {
    check_same_len(a, b)?;
    let n = a.num_qubits();
    let mut circuit = Circuit::new(2 * n + 1);
    circuit.add_register("control", 0, 1)?;
    circuit.add_register("a", 1, n)?;
    circuit.add_register("b", 1 + n, n)?;
    stream_swap_test(a, b, &mut circuit)?;
    Ok(circuit)
}

pub fn stream_hadamard_test(a: &NormalizedVector, b: &NormalizedVector, sink: &mut impl GateSink) -> Result<()> {
    check_same_len(a, b)?;
    let data = range(1, a.num_qubits());
    sink.add(Gate::H(0))?;
    emit_encoder(&compute_angles(a), &data, &[0], 1, false, sink)?;
    emit_encoder(&compute_angles(b), &data, &[0], 1, true, sink)?;
    sink.add(Gate::H(0))
}

/// Control qubit 0 selects U_b⁻¹·U_a on the data register;
/// P(control=0) = (1 + a·b)/2, sign included.
pub fn build_hadamard_test(a: &NormalizedVector, b: &NormalizedVector) -> Result<Circuit> {
    check_same_len(a, b)?;
    let n = a.num_qubits();
    let mut circuit = Circuit::new(n + 1);
    circuit.add_register("control", 0, 1)?;
    circuit.add_register("data", 1, n)?;
    stream_hadamard_test(a, b, &mut circuit)?;
    Ok(circuit)
}
