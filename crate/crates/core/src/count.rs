//! Gate accounting: measured counts after decomposition, the flat 96k cost
//! model, and the closed-form predictions for the matrix-product circuit.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind, GateSink};
use crate::decompose::{lower_mcry, ANCILLA_REGISTER};
use crate::error::{QkmmError, Result};

/// Elementary gates charged per control of a multi-controlled RY.
pub const PAPER_COST_PER_CONTROL: u64 = 96;
/// Toffoli as 6 CNOTs and 9 single-qubit gates.
pub const TOFFOLI_EQUIVALENT: u64 = 15;
/// CRY as 2 RYs and 2 CNOTs.
pub const CRY_EQUIVALENT: u64 = 4;

const KINDS: usize = 9;
const ALL_KINDS: [GateKind; KINDS] = [
    GateKind::H,
    GateKind::X,
    GateKind::Ry,
    GateKind::Cnot,
    GateKind::Cry,
    GateKind::Toffoli,
    GateKind::Mcry,
    GateKind::UnitaryBlock,
    GateKind::McUnitaryBlock,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Actual gates after lowering multi-controlled RYs.
    Measured,
    /// 96k per k-controlled RY, 1 for everything else.
    PaperModel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCountReport {
    pub mode: CountMode,
    pub counts: BTreeMap<GateKind, u64>,
    /// Gate total (`measured`) or model cost (`paper_model`).
    pub total: u64,
    /// Total in one- and two-qubit gates (Toffoli = 15, CRY = 4).
    pub one_two_qubit_equivalent: u64,
    pub num_qubits: usize,
    pub ancilla_qubits: usize,
}

impl GateCountReport {
    pub fn count(&self, kind: GateKind) -> u64 {
        self.counts.get(&kind).copied().unwrap_or(0)
    }
}

fn index(kind: GateKind) -> usize {
    kind as usize
}

fn equivalent_weight(kind: GateKind) -> u64 {
    match kind {
        GateKind::Toffoli => TOFFOLI_EQUIVALENT,
        GateKind::Cry => CRY_EQUIVALENT,
        _ => 1,
    }
}

/// Counting sink; builders can stream straight into it.
#[derive(Clone, Debug)]
pub struct GateTally {
    mode: CountMode,
    counts: [u64; KINDS],
    model_cost: u64,
    needs_ancilla: bool,
    lowered: HashMap<usize, [u64; KINDS]>,
}

impl GateTally {
    pub fn new(mode: CountMode) -> Self {
        Self {
            mode,
            counts: [0; KINDS],
            model_cost: 0,
            needs_ancilla: false,
            lowered: HashMap::new(),
        }
    }

    fn lowered_mcry(&mut self, k: usize) -> [u64; KINDS] {
        *self.lowered.entry(k).or_insert_with(|| {
            let mut gates = Vec::new();
            let controls: Vec<usize> = (0..k).collect();
            lower_mcry(&controls, k, 0.0, Some(k + 1), &mut gates).expect("ancilla provided");
            let mut counts = [0; KINDS];
            for g in &gates {
                counts[index(g.kind())] += 1;
            }
            counts
        })
    }

    pub fn report(&self, num_qubits: usize) -> GateCountReport {
        let counts: BTreeMap<GateKind, u64> = ALL_KINDS
            .iter()
            .filter(|&&k| self.counts[index(k)] > 0)
            .map(|&k| (k, self.counts[index(k)]))
            .collect();
        let (total, equivalent) = match self.mode {
            CountMode::Measured => (
                self.counts.iter().sum(),
                ALL_KINDS
                    .iter()
                    .map(|&k| self.counts[index(k)] * equivalent_weight(k))
                    .sum(),
            ),
            CountMode::PaperModel => (self.model_cost, self.model_cost),
        };
        GateCountReport {
            mode: self.mode,
            counts,
            total,
            one_two_qubit_equivalent: equivalent,
            num_qubits,
            ancilla_qubits: usize::from(self.needs_ancilla),
        }
    }
}

impl GateSink for GateTally {
    fn add(&mut self, gate: Gate) -> Result<()> {
        let controls = gate.controls();
        let off = controls.iter().filter(|c| !c.on_one).count() as u64;
        if let Gate::Mcry { .. } = gate {
            if controls.len() >= 2 {
                self.needs_ancilla = true;
            }
        }
        match self.mode {
            CountMode::PaperModel => {
                self.counts[index(gate.kind())] += 1;
                self.model_cost += match gate {
                    Gate::Mcry { .. } | Gate::Cry { .. } if !controls.is_empty() => {
                        PAPER_COST_PER_CONTROL * controls.len() as u64
                    }
                    _ => 1,
                };
            }
            CountMode::Measured => {
                self.counts[index(GateKind::X)] += 2 * off;
                match gate {
                    Gate::Mcry { .. } => {
                        let lowered = self.lowered_mcry(controls.len());
                        for (c, l) in self.counts.iter_mut().zip(lowered) {
                            *c += l;
                        }
                    }
                    other => self.counts[index(other.kind())] += 1,
                }
            }
        }
        Ok(())
    }
}

/// Counts `circuit` without materializing its decomposition. An already
/// decomposed circuit keeps its ancilla register out of `num_qubits`.
pub fn count_gates(circuit: &Circuit, mode: CountMode) -> GateCountReport {
    let mut tally = GateTally::new(mode);
    for gate in circuit.gates() {
        tally.add(gate.clone()).expect("counting never fails");
    }
    let existing = circuit.register(ANCILLA_REGISTER).map_or(0, |r| r.len);
    let mut report = tally.report(circuit.num_qubits() - existing);
    report.ancilla_qubits = report.ancilla_qubits.max(existing);
    report
}

/// Counts whatever `emit` streams.
pub fn count_stream(
    mode: CountMode,
    num_qubits: usize,
    emit: impl FnOnce(&mut GateTally) -> Result<()>,
) -> Result<GateCountReport> {
    let mut tally = GateTally::new(mode);
    emit(&mut tally)?;
    Ok(tally.report(num_qubits))
}

/// `quadratic·N² + linear·N + constant`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polynomial {
    pub quadratic: i128,
    pub linear: i128,
    pub constant: i128,
}

impl Polynomial {
    pub fn eval(&self, dim: i128) -> i128 {
        self.quadratic * dim * dim + self.linear * dim + self.constant
    }
}

/// Closed-form counts for the N×N matrix-product circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedCounts {
    pub dim: u64,
    pub n: u32,
    /// Model cost of one index-controlled amplitude encoding.
    pub a_per_encoding: i128,
    pub x_total: i128,
    pub h_total: i128,
    /// Total with the linear coefficient as published.
    pub s_printed: i128,
    /// 2N·A + 2X + H.
    pub s_recomposed: i128,
    pub printed_terms: Polynomial,
    pub recomposed_terms: Polynomial,
}

/// Largest log2 N accepted by [`predicted_counts`].
pub const MAX_PREDICTED_QUBITS: u32 = 40;

pub fn predicted_counts(dim: u64) -> Result<PredictedCounts> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(QkmmError::Validation(format!(
            "dimension {dim} is not a power of two ≥ 2"
        )));
    }
    let n = dim.trailing_zeros();
    if n > MAX_PREDICTED_QUBITS {
        return Err(QkmmError::Validation(format!("dimension 2^{n} is too large")));
    }
    let ni = n as i128;
    let d = dim as i128;
    let a = 96 * ((ni - 1) * (1i128 << (n + 1)) - ni + 2);
    let x = (ni - 1) * (1i128 << (2 * n + 1)) - (ni - 2) * (1i128 << n);
    let h = 2 * ni;
    let printed_terms = Polynomial {
        quadratic: 388 * ni - 388,
        linear: -(194 * ni + 380),
        constant: 2 * ni,
    };
    let recomposed_terms = Polynomial {
        quadratic: 388 * ni - 388,
        linear: 388 - 194 * ni,
        constant: 2 * ni,
    };
    Ok(PredictedCounts {
        dim,
        n,
        a_per_encoding: a,
        x_total: x,
        h_total: h,
        s_printed: printed_terms.eval(d),
        s_recomposed: 2 * d * a + 2 * x + h,
        printed_terms,
        recomposed_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose_circuit;

    #[test]
    fn two_hadamards() {
        let mut c = Circuit::new(1);
        c.extend([Gate::H(0), Gate::H(0)]).unwrap();
        for mode in [CountMode::Measured, CountMode::PaperModel] {
            let r = count_gates(&c, mode);
            assert_eq!(r.counts, BTreeMap::from([(GateKind::H, 2)]));
            assert_eq!(r.total, 2);
        }
    }

    #[test]
    fn five_controlled_ry_costs_480() {
        let mut c = Circuit::new(6);
        c.push(Gate::mcry(&[0, 1, 2, 3, 4], 5, 0.3)).unwrap();
        assert_eq!(count_gates(&c, CountMode::PaperModel).total, 480);
    }

    #[test]
    fn measured_matches_materialized_decomposition() {
        let mut c = Circuit::new(7);
        c.extend([
            Gate::H(0),
            Gate::mcry(&[0, 1, 2, 3, 4, 5], 6, 0.3),
            Gate::Mcry {
                controls: vec![crate::circuit::Control::off(1), crate::circuit::Control::on(2)],
                target: 0,
                angle: 0.1,
            },
            Gate::mcry(&[3], 4, 0.2),
        ])
        .unwrap();
        let streamed = count_gates(&c, CountMode::Measured);
        let decomposed = decompose_circuit(&c).unwrap();
        let direct = count_gates(&decomposed, CountMode::Measured);
        assert_eq!(streamed.counts, direct.counts);
        assert_eq!(streamed.ancilla_qubits, 1);
        assert_eq!(direct.ancilla_qubits, 1);
        assert_eq!(direct.num_qubits, 7);
    }

    #[test]
    fn worked_predictions() {
        let p = predicted_counts(2).unwrap();
        assert_eq!(p.a_per_encoding, 96);
        assert_eq!(predicted_counts(8).unwrap().h_total, 6);
        assert!(matches!(predicted_counts(6), Err(QkmmError::Validation(_))));
    }

    #[test]
    fn printed_and_recomposed_differ_by_768n() {
        for n in 1..=16u32 {
            let dim = 1u64 << n;
            let p = predicted_counts(dim).unwrap();
            assert_eq!(p.recomposed_terms.eval(dim as i128), p.s_recomposed);
            assert_eq!(p.s_recomposed - p.s_printed, 768 * dim as i128);
            assert_eq!(p.printed_terms.quadratic, p.recomposed_terms.quadratic);
        }
    }
}
