//! Dense unitaries of whole circuits, for equivalence checks on small widths.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::error::{QkmmError, Result};
use crate::state::StateVector;

/// Widest circuit [`circuit_unitary`] will expand.
pub const MAX_UNITARY_QUBITS: usize = 12;

/// Column k is the circuit applied to basis state |k⟩.
pub fn circuit_unitary(circuit: &Circuit) -> Result<DMatrix<Complex64>> {
    let n = circuit.num_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(QkmmError::Configuration(format!(
            "{n} qubits is too wide for a dense unitary"
        )));
    }
    let dim = 1usize << n;
    let mut u = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let mut s = StateVector::basis(n, k)?;
        s.apply_circuit(circuit)?;
        u.set_column(k, &nalgebra::DVector::from_column_slice(s.amplitudes()));
    }
    Ok(u)
}

/// Largest deviation between `original` and `extended` when the extra trailing
/// qubits of `extended` start in |0⟩; output components with a non-zero
/// ancilla count as deviation, so a clean result also proves the ancillas
/// return to |0⟩.
pub fn ancilla_equivalence_defect(original: &Circuit, extended: &Circuit) -> Result<f64> {
    let n = original.num_qubits();
    let m = extended.num_qubits();
    if m < n || m > MAX_UNITARY_QUBITS {
        return Err(QkmmError::Configuration(format!(
            "cannot compare a {n}-qubit circuit with a {m}-qubit one"
        )));
    }
    let extra = m - n;
    let mut worst: f64 = 0.0;
    for k in 0..(1usize << n) {
        let mut a = StateVector::basis(n, k)?;
        a.apply_circuit(original)?;
        let mut b = StateVector::basis(m, k << extra)?;
        b.apply_circuit(extended)?;
        for (idx, amp) in b.amplitudes().iter().enumerate() {
            let expected = if idx & ((1 << extra) - 1) == 0 {
                a.amplitudes()[idx >> extra]
            } else {
                Complex64::new(0.0, 0.0)
            };
            worst = worst.max((amp - expected).norm());
        }
    }
    Ok(worst)
}

pub fn max_entry_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
