//! Dense statevector engine, measurement probabilities and shot sampling.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{QkmmError, Result};
use crate::kernel;

/// Hard limit for the statevector engine (2^26 amplitudes, 1 GiB).
pub const MAX_STATEVECTOR_QUBITS: usize = 26;

/// Tiny negative probabilities down to this value are clamped to zero.
pub const NEGATIVE_PROBABILITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits > MAX_STATEVECTOR_QUBITS {
            return Err(QkmmError::Configuration(format!(
                "{num_qubits} qubits exceed the statevector limit of {MAX_STATEVECTOR_QUBITS}"
            )));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(QkmmError::Index(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1 within 1e-9.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(QkmmError::Configuration(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        let norm: f64 = amplitudes.iter().map(Complex64::norm_sqr).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(QkmmError::Validation(format!("state norm² is {norm}, expected 1")));
        }
        Ok(Self {
            num_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_amplitudes(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let r = kernel::resolve(gate);
        kernel::apply(
            &mut self.amplitudes,
            self.num_qubits,
            0,
            &r.controls,
            &r.targets,
            &r.op,
        );
        Ok(())
    }

    /// Applies every gate in order. The circuit width must match the state.
    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits() != self.num_qubits {
            return Err(QkmmError::Configuration(format!(
                "circuit has {} qubits, state has {}",
                circuit.num_qubits(),
                self.num_qubits
            )));
        }
        for gate in circuit.gates() {
            let r = kernel::resolve(gate);
            kernel::apply(
                &mut self.amplitudes,
                self.num_qubits,
                0,
                &r.controls,
                &r.targets,
                &r.op,
            );
        }
        Ok(())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    pub fn max_imaginary(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.im.abs()).fold(0.0, f64::max)
    }
}

/// Runs `circuit` on |0…0⟩.
pub fn simulate(circuit: &Circuit) -> Result<StateVector> {
    let mut state = StateVector::zero(circuit.num_qubits())?;
    state.apply_circuit(circuit)?;
    Ok(state)
}

/// Sums out the trailing (least significant) qubits, keeping the first `keep`.
pub fn marginal_prefix(probabilities: &[f64], keep: usize) -> Result<Vec<f64>> {
    let dim = probabilities.len();
    if !dim.is_power_of_two() {
        return Err(QkmmError::Configuration(format!("length {dim} is not a power of two")));
    }
    let width = dim.trailing_zeros() as usize;
    if keep > width {
        return Err(QkmmError::Configuration(format!(
            "cannot keep {keep} qubits of a {width}-qubit distribution"
        )));
    }
    let chunk = 1usize << (width - keep);
    Ok(probabilities.chunks(chunk).map(|c| c.iter().sum()).collect())
}

/// Probability that `qubit` reads 0.
pub fn qubit_zero_probability(probabilities: &[f64], qubit: usize) -> Result<f64> {
    let dim = probabilities.len();
    let width = dim.trailing_zeros() as usize;
    if !dim.is_power_of_two() || qubit >= width {
        return Err(QkmmError::Index(format!(
            "qubit {qubit} out of range for a distribution of length {dim}"
        )));
    }
    let b = 1usize << (width - 1 - qubit);
    Ok(probabilities
        .iter()
        .enumerate()
        .filter(|(i, _)| i & b == 0)
        .map(|(_, p)| p)
        .sum())
}

/// Outcome counts of a sampled measurement of all qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotHistogram {
    pub num_qubits: usize,
    pub counts: BTreeMap<usize, u64>,
    pub total_shots: u64,
}

impl ShotHistogram {
    pub fn count(&self, outcome: usize) -> u64 {
        self.counts.get(&outcome).copied().unwrap_or(0)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let mut f = vec![0.0; 1 << self.num_qubits];
        for (&k, &v) in &self.counts {
            f[k] = v as f64 / self.total_shots as f64;
        }
        f
    }
}

/// Multinomial sample of `shots` outcomes, reproducible for a fixed seed.
///
/// The distribution is renormalized after tiny negative entries are clamped;
/// its sum must be within 1e-6 of one.
pub fn sample_shots(probabilities: &[f64], shots: u64, seed: u64) -> Result<ShotHistogram> {
    let dim = probabilities.len();
    if dim == 0 || !dim.is_power_of_two() {
        return Err(QkmmError::Configuration(format!(
            "distribution length {dim} is not a power of two"
        )));
    }
    if shots == 0 {
        return Err(QkmmError::Validation("shot count must be positive".into()));
    }
    let mut clean = Vec::with_capacity(dim);
    for (i, &p) in probabilities.iter().enumerate() {
        if !p.is_finite() {
            return Err(QkmmError::Numeric(format!("probability {i} is {p}")));
        }
        if p < -NEGATIVE_PROBABILITY_TOL {
            return Err(QkmmError::Numeric(format!("probability {i} is negative ({p})")));
        }
        clean.push(p.max(0.0));
    }
    let total: f64 = clean.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(QkmmError::Numeric(format!("probabilities sum to {total}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    let mut remaining_shots = shots;
    let mut remaining_mass = total;
    for (i, &p) in clean.iter().enumerate() {
        if remaining_shots == 0 {
            break;
        }
        let k = if i == dim - 1 || p >= remaining_mass {
            remaining_shots
        } else if p <= 0.0 {
            0
        } else {
            let q = (p / remaining_mass).clamp(0.0, 1.0);
            Binomial::new(remaining_shots, q)
                .map_err(|e| QkmmError::Numeric(e.to_string()))?
                .sample(&mut rng)
        };
        if k > 0 {
            counts.insert(i, k);
        }
        remaining_shots -= k;
        remaining_mass -= p;
    }
    Ok(ShotHistogram {
        num_qubits: dim.trailing_zeros() as usize,
        counts,
        total_shots: shots,
    })
}
