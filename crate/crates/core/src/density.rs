//! Dense density-matrix engine used by the noisy simulations.
//!
//! ρ is stored row-major, which makes it a vector over 2n "qubits": the first
//! n index the row, the last n the column. A unitary U on qubit set T becomes
//! U on the row copy of T and conj(U) on the column copy.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::{Circuit, Control, Gate};
use crate::error::{QkmmError, Result};
use crate::kernel::{self, LocalOp};
use crate::state::{StateVector, NEGATIVE_PROBABILITY_TOL};

/// Largest register the density-matrix engine accepts (4^12 entries).
pub const MAX_DENSITY_QUBITS: usize = 12;

const KRAUS_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    entries: Vec<Complex64>,
}

fn check_width(num_qubits: usize) -> Result<()> {
    if num_qubits > MAX_DENSITY_QUBITS {
        return Err(QkmmError::Configuration(format!(
            "{num_qubits} qubits exceed the density-matrix limit of {MAX_DENSITY_QUBITS}"
        )));
    }
    Ok(())
}

impl DensityMatrix {
    pub fn zero(num_qubits: usize) -> Result<Self> {
        check_width(num_qubits)?;
        let dim = 1usize << num_qubits;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        entries[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            entries,
        })
    }

    /// |ψ⟩⟨ψ|
    pub fn from_state(state: &StateVector) -> Result<Self> {
        check_width(state.num_qubits())?;
        let amps = state.amplitudes();
        let dim = amps.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in amps {
            for c in amps {
                entries.push(r * c.conj());
            }
        }
        Ok(Self {
            num_qubits: state.num_qubits(),
            entries,
        })
    }

    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        check_width(num_qubits)?;
        let dim = 1usize << num_qubits;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Ok(Self {
            num_qubits,
            entries,
        })
    }

    /// Validates Hermiticity, unit trace and positivity (all within 1e-9).
    pub fn from_matrix(matrix: &DMatrix<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || dim == 0 || !dim.is_power_of_two() {
            return Err(QkmmError::Configuration(format!(
                "density matrix must be square with power-of-two size, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_width(num_qubits)?;
        let hermitian_defect = (matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if hermitian_defect > 1e-9 {
            return Err(QkmmError::Validation(format!(
                "matrix is not Hermitian (defect {hermitian_defect:.3e})"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > 1e-9 || trace.im.abs() > 1e-9 {
            return Err(QkmmError::Validation(format!("trace is {trace}, expected 1")));
        }
        let min_eig = matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-9 {
            return Err(QkmmError::Validation(format!(
                "matrix has negative eigenvalue {min_eig:.3e}"
            )));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(matrix[(r, c)]);
            }
        }
        Ok(Self {
            num_qubits,
            entries,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim(), self.dim(), &self.entries)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.entry(i, i)).sum()
    }

    /// Largest |ρ_rc − conj(ρ_cr)|.
    pub fn hermiticity_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.entry(r, c) - self.entry(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Largest entrywise distance to another density matrix of the same size.
    pub fn max_distance(&self, other: &DensityMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// ρ → UρU†
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.apply_resolved(gate);
        Ok(())
    }

    fn apply_resolved(&mut self, gate: &Gate) {
        let r = kernel::resolve(gate);
        let width = 2 * self.num_qubits;
        kernel::apply(&mut self.entries, width, 0, &r.controls, &r.targets, &r.op);
        kernel::apply(
            &mut self.entries,
            width,
            self.num_qubits,
            &r.controls,
            &r.targets,
            &r.op.conj(),
        );
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits() != self.num_qubits {
            return Err(QkmmError::Configuration(format!(
                "circuit has {} qubits, density matrix has {}",
                circuit.num_qubits(),
                self.num_qubits
            )));
        }
        for gate in circuit.gates() {
            self.apply_resolved(gate);
        }
        Ok(())
    }

    /// ρ → Σ K ρ K† for a Kraus set acting on `targets` (first target = MSB of K's index).
    pub fn apply_kraus(&mut self, kraus: &[DMatrix<Complex64>], targets: &[usize]) -> Result<()> {
        let superop = superoperator(kraus, targets.len())?;
        self.apply_superoperator(&superop, targets)
    }

    /// Applies a precomputed Liouville superoperator Σ K ⊗ conj(K) whose index
    /// is (row targets, column targets).
    pub(crate) fn apply_superoperator(&mut self, superop: &[Complex64], targets: &[usize]) -> Result<()> {
        let arity = targets.len();
        if superop.len() != 1 << (4 * arity) {
            return Err(QkmmError::Configuration(format!(
                "superoperator size {} does not match {arity} targets",
                superop.len()
            )));
        }
        check_targets(targets, self.num_qubits)?;
        if arity == 0 {
            return Ok(());
        }
        let mut doubled: Vec<usize> = targets.to_vec();
        doubled.extend(targets.iter().map(|t| t + self.num_qubits));
        let op = LocalOp::Dense(superop.to_vec());
        kernel::apply(&mut self.entries, 2 * self.num_qubits, 0, &[] as &[Control], &doubled, &op);
        Ok(())
    }

    /// Diagonal of ρ with tiny negatives clamped to zero and values capped at one.
    pub fn probabilities(&self) -> Result<Vec<f64>> {
        let dim = self.dim();
        (0..dim)
            .map(|i| {
                let p = self.entry(i, i).re;
                if !p.is_finite() || p < -NEGATIVE_PROBABILITY_TOL {
                    Err(QkmmError::Numeric(format!("diagonal entry {i} is {p}")))
                } else {
                    Ok(p.clamp(0.0, 1.0))
                }
            })
            .collect()
    }
}

fn check_targets(targets: &[usize], num_qubits: usize) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= num_qubits {
            return Err(QkmmError::Index(format!(
                "target {t} out of range for {num_qubits} qubits"
            )));
        }
        if targets[..i].contains(&t) {
            return Err(QkmmError::Index(format!("target {t} repeated")));
        }
    }
    Ok(())
}

/// Checks Σ K†K = I within 1e-8.
pub fn kraus_completeness_defect(kraus: &[DMatrix<Complex64>]) -> f64 {
    let Some(first) = kraus.first() else {
        return f64::INFINITY;
    };
    let dim = first.nrows();
    let mut sum = DMatrix::<Complex64>::zeros(dim, dim);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    (sum - DMatrix::<Complex64>::identity(dim, dim))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Builds Σ K ⊗ conj(K) after validating shapes and trace preservation.
pub(crate) fn superoperator(kraus: &[DMatrix<Complex64>], arity: usize) -> Result<Vec<Complex64>> {
    let dim = 1usize << arity;
    if kraus.is_empty() {
        return Err(QkmmError::Validation("empty Kraus set".into()));
    }
    if kraus.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
        return Err(QkmmError::Configuration(format!(
            "Kraus operators must be {dim}x{dim} for {arity} targets"
        )));
    }
    let defect = kraus_completeness_defect(kraus);
    if defect.is_nan() || defect > KRAUS_TOL {
        return Err(QkmmError::Validation(format!(
            "Kraus set is not trace preserving (max |ΣK†K - I| = {defect:.3e})"
        )));
    }
    let sdim = dim * dim;
    let mut s = vec![Complex64::new(0.0, 0.0); sdim * sdim];
    for k in kraus {
        for r1 in 0..dim {
            for c1 in 0..dim {
                let row = r1 * dim + c1;
                for r0 in 0..dim {
                    let a = k[(r1, r0)];
                    if a == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for c0 in 0..dim {
                        s[row * sdim + r0 * dim + c0] += a * k[(c1, c0)].conj();
                    }
                }
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::UnitaryBlock;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mixed_qubit() -> DensityMatrix {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]);
        DensityMatrix::from_matrix(&m).unwrap()
    }

    #[test]
    fn identity_gate_leaves_dm_unchanged() {
        let mut rho = mixed_qubit();
        let before = rho.clone();
        let id = UnitaryBlock::new("id", DMatrix::identity(2, 2)).unwrap();
        rho.apply_gate(&Gate::Unitary {
            targets: vec![0],
            block: Arc::new(id),
        })
        .unwrap();
        assert!(rho.max_distance(&before) < 1e-15);
    }

    #[test]
    fn x_maps_zero_to_one() {
        let mut rho = DensityMatrix::zero(1).unwrap();
        rho.apply_gate(&Gate::X(0)).unwrap();
        let one = DensityMatrix::from_state(&StateVector::basis(1, 1).unwrap()).unwrap();
        assert!(rho.max_distance(&one) < 1e-15);
        assert_eq!(rho.probabilities().unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn hadamard_twice_is_identity() {
        let mut rho = mixed_qubit();
        let before = rho.clone();
        rho.apply_gate(&Gate::H(0)).unwrap();
        rho.apply_gate(&Gate::H(0)).unwrap();
        assert!(rho.max_distance(&before) < 1e-10);
        assert!(rho.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn trivial_kraus_set_is_identity() {
        let mut rho = mixed_qubit();
        let before = rho.clone();
        rho.apply_kraus(&[DMatrix::identity(2, 2)], &[0]).unwrap();
        assert!(rho.max_distance(&before) < 1e-15);
    }

    #[test]
    fn full_amplitude_damping_relaxes_to_ground() {
        let mut rho = mixed_qubit();
        let k0 = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let k1 = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        rho.apply_kraus(&[k0, k1], &[0]).unwrap();
        assert!(rho.max_distance(&DensityMatrix::zero(1).unwrap()) < 1e-15);
    }

    #[test]
    fn non_trace_preserving_kraus_is_rejected() {
        let mut rho = mixed_qubit();
        let k = DMatrix::from_element(2, 2, c(0.5, 0.0));
        assert!(matches!(
            rho.apply_kraus(&[k], &[0]),
            Err(QkmmError::Validation(_))
        ));
    }

    #[test]
    fn maximally_mixed_probabilities() {
        let rho = DensityMatrix::maximally_mixed(1).unwrap();
        assert_eq!(rho.probabilities().unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn width_cap_is_configuration_error() {
        assert!(matches!(
            DensityMatrix::zero(MAX_DENSITY_QUBITS + 1),
            Err(QkmmError::Configuration(_))
        ));
    }

    #[test]
    fn two_qubit_kraus_on_nonadjacent_targets() {
        // a CNOT written as a single Kraus operator acting on qubits (2, 0)
        let mut cnot = DMatrix::<Complex64>::zeros(4, 4);
        for (r, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            cnot[(r, col)] = c(1.0, 0.0);
        }
        let mut via_kraus = DensityMatrix::from_state(&StateVector::basis(3, 0b001).unwrap()).unwrap();
        via_kraus.apply_kraus(&[cnot], &[2, 0]).unwrap();
        let mut via_gate = DensityMatrix::from_state(&StateVector::basis(3, 0b001).unwrap()).unwrap();
        via_gate
            .apply_gate(&Gate::Cnot {
                control: 2,
                target: 0,
            })
            .unwrap();
        assert!(via_kraus.max_distance(&via_gate) < 1e-15);
    }
}
