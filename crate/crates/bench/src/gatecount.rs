//! Gate-count table: closed forms next to streamed counts of real circuits.

use std::time::Instant;

use qkmm_core::algos::{stream_hadamard_test, stream_m2m, stream_swap_test, Normalization};
use qkmm_core::count::{count_stream, predicted_counts, CountMode, GateCountReport};
use qkmm_core::instances::{random_normalized_matrix, random_unit_vector, trial_rng};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateRow {
    pub dim: usize,
    pub n: u32,
    pub a_per_encoding: i64,
    pub x_total: i64,
    pub h_total: i64,
    pub s_printed: i64,
    pub s_recomposed: i64,
    pub model_total: u64,
    /// `model_total == s_recomposed`.
    pub model_matches_recomposed: bool,
    pub measured_total: u64,
    pub measured_equivalent: u64,
    pub model_per_n2_log_n: f64,
    pub hadamard_stack_model: u64,
    pub hadamard_stack_measured: u64,
    pub swap_stack_model: u64,
    pub swap_stack_measured: u64,
    pub qubits_qkmm: usize,
    pub qubits_hadamard: usize,
    pub qubits_swap: usize,
    pub ancilla: usize,
    pub wall_s: f64,
}

fn narrow(v: i128) -> Result<i64> {
    i64::try_from(v).map_err(|_| BenchError::Output(format!("{v} does not fit a 64-bit column")))
}

/// Model and measured reports for one M2M circuit of size `dim`.
pub fn m2m_counts(dim: usize, seed: u64) -> Result<(GateCountReport, GateCountReport)> {
    let mut rng = trial_rng(seed, 0);
    let a = random_normalized_matrix(dim, Normalization::Rows, &mut rng);
    let b = random_normalized_matrix(dim, Normalization::Columns, &mut rng);
    let width = 3 * a.num_qubits();
    let model = count_stream(CountMode::PaperModel, width, |t| stream_m2m(&a, &b, t))?;
    let measured = count_stream(CountMode::Measured, width, |t| stream_m2m(&a, &b, t))?;
    Ok((model, measured))
}

/// Model and measured totals for one Hadamard-Test and one Swap-Test pair circuit.
pub fn pair_counts(dim: usize, seed: u64) -> Result<[(u64, u64); 2]> {
    let mut rng = trial_rng(seed, 1);
    let a = random_unit_vector(dim, &mut rng);
    let b = random_unit_vector(dim, &mut rng);
    let n = a.num_qubits();
    let mut out = [(0, 0); 2];
    for (slot, mode) in [CountMode::PaperModel, CountMode::Measured].into_iter().enumerate() {
        let h = count_stream(mode, n + 1, |t| stream_hadamard_test(&a, &b, t))?.total;
        let s = count_stream(mode, 2 * n + 1, |t| stream_swap_test(&a, &b, t))?.total;
        if slot == 0 {
            out[0].0 = h;
            out[1].0 = s;
        } else {
            out[0].1 = h;
            out[1].1 = s;
        }
    }
    Ok(out)
}

pub fn gate_row(dim: usize, seed: u64) -> Result<GateRow> {
    let start = Instant::now();
    let p = predicted_counts(dim as u64)?;
    let (model, measured) = m2m_counts(dim, seed)?;
    let [(h_model, h_measured), (s_model, s_measured)] = pair_counts(dim, seed)?;
    let stack = (dim * dim) as u64;
    let n = p.n as usize;
    Ok(GateRow {
        dim,
        n: p.n,
        a_per_encoding: narrow(p.a_per_encoding)?,
        x_total: narrow(p.x_total)?,
        h_total: narrow(p.h_total)?,
        s_printed: narrow(p.s_printed)?,
        s_recomposed: narrow(p.s_recomposed)?,
        model_total: model.total,
        model_matches_recomposed: model.total as i128 == p.s_recomposed,
        measured_total: measured.total,
        measured_equivalent: measured.one_two_qubit_equivalent,
        model_per_n2_log_n: model.total as f64 / ((dim * dim) as f64 * p.n as f64),
        hadamard_stack_model: stack * h_model,
        hadamard_stack_measured: stack * h_measured,
        swap_stack_model: stack * s_model,
        swap_stack_measured: stack * s_measured,
        qubits_qkmm: 3 * n,
        qubits_hadamard: n + 1,
        qubits_swap: 2 * n + 1,
        ancilla: measured.ancilla_qubits,
        wall_s: start.elapsed().as_secs_f64(),
    })
}
