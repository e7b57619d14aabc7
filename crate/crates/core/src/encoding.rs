//! Amplitude encoding of real unit vectors by binary-split RY trees.
//!
//! Level d of the tree rotates data qubit d once per bit pattern of the d
//! qubits above it, so a vector of length 2^n costs 2^n − 1 rotations. Inner
//! levels split the weight between the two halves of a block; the last level
//! resolves each amplitude pair including its signs. Control-on-0 is written
//! out as X conjugation around each rotation.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateSink};
use crate::error::{QkmmError, Result};

pub const NORM_TOL: f64 = 1e-9;

/// Real vector of power-of-two length (at least 2) with unit Euclidean norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedVector {
    values: Vec<f64>,
}

impl NormalizedVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let len = values.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QkmmError::Validation(format!(
                "vector length {len} is not a power of two ≥ 2 (use `padded`)"
            )));
        }
        if let Some(bad) = values.iter().find(|x| !x.is_finite()) {
            return Err(QkmmError::Numeric(format!("vector entry {bad} is not finite")));
        }
        let norm = euclidean_norm(&values);
        if norm == 0.0 {
            return Err(QkmmError::Validation("zero vector cannot be encoded".into()));
        }
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QkmmError::Validation(format!("vector norm is {norm}, expected 1")));
        }
        Ok(Self { values })
    }

    /// Zero-pads to the next power of two (at least 2), then validates.
    pub fn padded(mut values: Vec<f64>) -> Result<Self> {
        let target = values.len().max(2).next_power_of_two();
        values.resize(target, 0.0);
        Self::new(values)
    }

    /// Scales to unit norm and pads; returns the vector and the norm divided out.
    pub fn normalized(values: &[f64]) -> Result<(Self, f64)> {
        let norm = euclidean_norm(values);
        if !norm.is_finite() || norm == 0.0 {
            return Err(QkmmError::Validation(format!("cannot normalize a vector of norm {norm}")));
        }
        let scaled: Vec<f64> = values.iter().map(|x| x / norm).collect();
        Ok((Self::padded(scaled)?, norm))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn num_qubits(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }

    pub fn dot(&self, other: &NormalizedVector) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }
}

pub(crate) fn euclidean_norm(values: &[f64]) -> f64 {
    values.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Rotation angles per tree level; level d holds 2^d angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleTree {
    levels: Vec<Vec<f64>>,
}

impl AngleTree {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, d: usize) -> &[f64] {
        &self.levels[d]
    }

    pub fn rotation_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }
}

pub fn compute_angles(v: &NormalizedVector) -> AngleTree {
    let values = v.values();
    let n = v.num_qubits();
    let len = values.len();
    let mut levels = Vec::with_capacity(n);
    for d in 0..n {
        let block = len >> d;
        let half = block / 2;
        let angles = (0..1usize << d)
            .map(|j| {
                let start = j * block;
                if d + 1 == n {
                    2.0 * values[start + 1].atan2(values[start])
                } else {
                    let left = euclidean_norm(&values[start..start + half]);
                    let right = euclidean_norm(&values[start + half..start + block]);
                    2.0 * right.atan2(left)
                }
            })
            .collect();
        levels.push(angles);
    }
    AngleTree { levels }
}

/// Streams the encoder U_v (or its inverse) for `tree` on `data`, with every
/// rotation additionally controlled by `index` matching `pattern`.
pub(crate) fn emit_encoder(
    tree: &AngleTree,
    data: &[usize],
    index: &[usize],
    pattern: usize,
    inverse: bool,
    sink: &mut impl GateSink,
) -> Result<()> {
    debug_assert_eq!(tree.depth(), data.len());
    let levels: Vec<usize> = if inverse {
        (0..tree.depth()).rev().collect()
    } else {
        (0..tree.depth()).collect()
    };
    let mut controls = Vec::with_capacity(index.len() + data.len());
    let mut flips = Vec::with_capacity(index.len() + data.len());
    for d in levels {
        let count = 1usize << d;
        for step in 0..count {
            let j = if inverse { count - 1 - step } else { step };
            controls.clear();
            flips.clear();
            for (pos, &q) in index.iter().enumerate() {
                controls.push(q);
                if pattern >> (index.len() - 1 - pos) & 1 == 0 {
                    flips.push(q);
                }
            }
            for (pos, &q) in data[..d].iter().enumerate() {
                controls.push(q);
                if j >> (d - 1 - pos) & 1 == 0 {
                    flips.push(q);
                }
            }
            let angle = tree.level(d)[j];
            let angle = if inverse { -angle } else { angle };
            for &q in &flips {
                sink.add(Gate::X(q))?;
            }
            sink.add(Gate::mcry(&controls, data[d], angle))?;
            for &q in flips.iter().rev() {
                sink.add(Gate::X(q))?;
            }
        }
    }
    Ok(())
}

fn data_circuit(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    c.add_register("data", 0, n).expect("fresh circuit");
    c
}

/// U_v with U_v|0…0⟩ = |v⟩ on log2(len) qubits.
pub fn build_encoder(v: &NormalizedVector) -> Circuit {
    let n = v.num_qubits();
    let mut c = data_circuit(n);
    let data: Vec<usize> = (0..n).collect();
    emit_encoder(&compute_angles(v), &data, &[], 0, false, &mut c).expect("in-range gates");
    c
}

pub fn build_encoder_inverse(v: &NormalizedVector) -> Circuit {
    let n = v.num_qubits();
    let mut c = data_circuit(n);
    let data: Vec<usize> = (0..n).collect();
    emit_encoder(&compute_angles(v), &data, &[], 0, true, &mut c).expect("in-range gates");
    c
}

/// Encoder of `v` that fires only when the `index_width`-qubit index register
/// (qubits 0..index_width) holds `pattern`; data occupies the qubits after it.
pub fn build_controlled_encoder(v: &NormalizedVector, index_width: usize, pattern: usize) -> Result<Circuit> {
    if index_width >= usize::BITS as usize || pattern >= 1usize << index_width {
        return Err(QkmmError::Validation(format!(
            "pattern {pattern} does not fit in {index_width} index qubits"
        )));
    }
    let n = v.num_qubits();
    let mut c = Circuit::new(index_width + n);
    if index_width > 0 {
        c.add_register("index", 0, index_width)?;
    }
    c.add_register("data", index_width, n)?;
    let index: Vec<usize> = (0..index_width).collect();
    let data: Vec<usize> = (index_width..index_width + n).collect();
    emit_encoder(&compute_angles(v), &data, &index, pattern, false, &mut c)?;
    Ok(c)
}
