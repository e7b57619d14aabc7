//! Index kernels shared by the statevector and density-matrix engines.
//!
//! Both engines view their storage as a flat amplitude-like vector over
//! `width` qubits (qubit 0 = most significant bit) and apply a small matrix to
//! a set of target qubits whenever the control bits match.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::circuit::{Control, Gate};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The local operator a gate applies once its controls are satisfied.
#[derive(Clone, Debug)]
pub(crate) enum LocalOp {
    /// Pauli X: a plain swap of the two target amplitudes.
    Flip,
    /// 2x2 matrix, row-major.
    Single([Complex64; 4]),
    /// 2^t x 2^t matrix, row-major; the first target is the block's MSB.
    Dense(Vec<Complex64>),
}

impl LocalOp {
    pub(crate) fn conj(&self) -> LocalOp {
        match self {
            LocalOp::Flip => LocalOp::Flip,
            LocalOp::Single(m) => LocalOp::Single(m.map(|z| z.conj())),
            LocalOp::Dense(m) => LocalOp::Dense(m.iter().map(|z| z.conj()).collect()),
        }
    }
}

/// A gate resolved to bit masks and a local operator.
#[derive(Clone, Debug)]
pub(crate) struct Resolved {
    pub controls: Vec<Control>,
    pub targets: Vec<usize>,
    pub op: LocalOp,
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub(crate) fn ry_matrix(angle: f64) -> [Complex64; 4] {
    let (s, c) = (angle / 2.0).sin_cos();
    [real(c), real(-s), real(s), real(c)]
}

pub(crate) fn hadamard_matrix() -> [Complex64; 4] {
    let h = FRAC_1_SQRT_2;
    [real(h), real(h), real(h), real(-h)]
}

pub(crate) fn resolve(gate: &Gate) -> Resolved {
    let controls = gate.controls();
    let targets = gate.targets();
    let op = match gate {
        Gate::H(_) => LocalOp::Single(hadamard_matrix()),
        Gate::X(_) | Gate::Cnot { .. } | Gate::Toffoli { .. } => LocalOp::Flip,
        Gate::Ry { angle, .. } | Gate::Cry { angle, .. } | Gate::Mcry { angle, .. } => {
            LocalOp::Single(ry_matrix(*angle))
        }
        Gate::Unitary { block, .. } | Gate::McUnitary { block, .. } => {
            let m = block.matrix();
            let dim = m.nrows();
            let mut dense = Vec::with_capacity(dim * dim);
            for r in 0..dim {
                for c in 0..dim {
                    dense.push(m[(r, c)]);
                }
            }
            if dim == 2 {
                LocalOp::Single([dense[0], dense[1], dense[2], dense[3]])
            } else {
                LocalOp::Dense(dense)
            }
        }
    };
    Resolved {
        controls,
        targets,
        op,
    }
}

#[inline]
fn bit(width: usize, qubit: usize) -> usize {
    1usize << (width - 1 - qubit)
}

/// Applies `op` to `targets` of a `width`-qubit vector on every basis block
/// whose control bits match. `offset` shifts all qubit indices (used to hit
/// the column half of a vectorized density matrix).
pub(crate) fn apply(
    amps: &mut [Complex64],
    width: usize,
    offset: usize,
    controls: &[Control],
    targets: &[usize],
    op: &LocalOp,
) {
    debug_assert_eq!(amps.len(), 1 << width);
    let mut ctrl_mask = 0usize;
    let mut ctrl_value = 0usize;
    for c in controls {
        let b = bit(width, c.qubit + offset);
        ctrl_mask |= b;
        if c.on_one {
            ctrl_value |= b;
        }
    }
    let target_bits: Vec<usize> = targets.iter().map(|&t| bit(width, t + offset)).collect();
    let target_mask = target_bits.iter().fold(0, |acc, b| acc | b);
    let fixed = ctrl_mask | target_mask;
    let dim = amps.len();

    match op {
        LocalOp::Flip => {
            let tb = target_bits[0];
            for_each_free(dim, fixed, ctrl_value, |base| amps.swap(base, base | tb));
        }
        LocalOp::Single(m) => {
            let tb = target_bits[0];
            for_each_free(dim, fixed, ctrl_value, |base| {
                let i1 = base | tb;
                let a0 = amps[base];
                let a1 = amps[i1];
                amps[base] = m[0] * a0 + m[1] * a1;
                amps[i1] = m[2] * a0 + m[3] * a1;
            });
        }
        LocalOp::Dense(m) => {
            let block = 1usize << target_bits.len();
            let offsets: Vec<usize> = (0..block)
                .map(|b| {
                    target_bits
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| b & (1 << (target_bits.len() - 1 - k)) != 0)
                        .fold(0, |acc, (_, tb)| acc | tb)
                })
                .collect();
            let mut scratch = vec![ZERO; block];
            for_each_free(dim, fixed, ctrl_value, |base| {
                for (s, off) in scratch.iter_mut().zip(&offsets) {
                    *s = amps[base | off];
                }
                for (r, off) in offsets.iter().enumerate() {
                    let row = &m[r * block..(r + 1) * block];
                    amps[base | off] = row.iter().zip(&scratch).map(|(a, b)| a * b).sum();
                }
            });
        }
    }
}

/// Calls `f(base)` for every index whose `fixed` bits equal `value`'s.
#[inline]
fn for_each_free(dim: usize, fixed: usize, value: usize, mut f: impl FnMut(usize)) {
    let mut sub = 0usize;
    loop {
        f(sub | value);
        sub = ((sub | fixed) + 1) & !fixed;
        if sub == 0 || sub >= dim {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn for_each_free_enumerates_matching_indices() {
        let mut seen = Vec::new();
        // width 3, fix bit 2 (qubit 0) to 1 and bit 0 (qubit 2) to 0
        for_each_free(8, 0b101, 0b100, |i| seen.push(i));
        assert_eq!(seen, vec![0b100, 0b110]);
    }

    #[test]
    fn dense_matches_single_on_one_target() {
        let m = ry_matrix(0.37);
        let mut a: Vec<Complex64> = (0..8).map(|i| real(i as f64 + 1.0)).collect();
        let mut b = a.clone();
        apply(&mut a, 3, 0, &[Control::off(0)], &[1], &LocalOp::Single(m));
        apply(&mut b, 3, 0, &[Control::off(0)], &[1], &LocalOp::Dense(m.to_vec()));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-14);
        }
    }
}
