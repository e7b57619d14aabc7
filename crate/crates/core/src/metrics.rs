//! Magnitude reconstruction from outcome data, the classical reference
//! products, and the fidelity / error metrics.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algos::QkmmCircuitBundle;
use crate::error::{QkmmError, Result};
use crate::state::{ShotHistogram, NEGATIVE_PROBABILITY_TOL};

const DISTRIBUTION_SUM_TOL: f64 = 1e-6;
const GATE_EPSILON: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateSource {
    ExactProbabilities,
    Sampled,
}

/// Measurement data over the bundle's qubits (qubit 0 most significant).
#[derive(Clone, Copy, Debug)]
pub enum Outcomes<'a> {
    Probabilities(&'a [f64]),
    Histogram(&'a ShotHistogram),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductEstimate {
    pub shape: Vec<usize>,
    /// Row-major over `shape`.
    pub magnitudes: Vec<f64>,
    /// Total shots (0 for exact probabilities).
    pub shots: u64,
    /// Shots that landed in a readout cell.
    pub post_selected_shots: u64,
    pub normalization_factor: f64,
    pub source: EstimateSource,
}

impl ProductEstimate {
    /// The estimate as a matrix; `[K, N, N]` shapes give block `k`.
    pub fn matrix(&self, k: usize) -> DMatrix<f64> {
        let (rows, cols) = match self.shape.as_slice() {
            [len] => (1, *len),
            [r, c] => (*r, *c),
            [_, r, c] => (*r, *c),
            _ => (1, self.magnitudes.len()),
        };
        let offset = k * rows * cols;
        DMatrix::from_row_slice(rows, cols, &self.magnitudes[offset..offset + rows * cols])
    }
}

/// magnitude = √(P(cell) / normalization_factor) for every readout cell;
/// outcomes outside the cells are discarded.
pub fn reconstruct_magnitudes(outcomes: Outcomes<'_>, bundle: &QkmmCircuitBundle) -> Result<ProductEstimate> {
    let width = bundle.num_qubits();
    let space = 1usize << width;
    let norm = bundle.normalization_factor;
    let cells = &bundle.readout.cells;
    let (probabilities, shots, post_selected, source): (Vec<f64>, u64, u64, EstimateSource) = match outcomes {
        Outcomes::Probabilities(p) => {
            if p.len() != space {
                return Err(QkmmError::Validation(format!(
                    "expected {space} probabilities for {width} qubits, got {}",
                    p.len()
                )));
            }
            let mut out = Vec::with_capacity(cells.len());
            for &c in cells {
                let v = p[c];
                if !v.is_finite() || v < -NEGATIVE_PROBABILITY_TOL {
                    return Err(QkmmError::Numeric(format!("invalid probability {v} at outcome {c}")));
                }
                out.push(v.max(0.0));
            }
            (out, 0, 0, EstimateSource::ExactProbabilities)
        }
        Outcomes::Histogram(h) => {
            if h.num_qubits != width {
                return Err(QkmmError::Validation(format!(
                    "histogram covers {} qubits, bundle has {width}",
                    h.num_qubits
                )));
            }
            if h.total_shots == 0 {
                return Err(QkmmError::Validation("histogram has no shots".into()));
            }
            let counts: Vec<u64> = cells.iter().map(|&c| h.count(c)).collect();
            let post: u64 = counts.iter().sum();
            let total = h.total_shots as f64;
            (
                counts.iter().map(|&k| k as f64 / total).collect(),
                h.total_shots,
                post,
                EstimateSource::Sampled,
            )
        }
    };
    Ok(ProductEstimate {
        shape: bundle.readout.shape.clone(),
        magnitudes: probabilities.iter().map(|p| (p / norm).sqrt()).collect(),
        shots,
        post_selected_shots: post_selected,
        normalization_factor: norm,
        source,
    })
}

/// Dense A·B.
pub fn classical_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.ncols() != b.nrows() {
        return Err(QkmmError::Validation(format!(
            "cannot multiply {}x{} by {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(a * b)
}

pub fn classical_matvec(a: &DMatrix<f64>, x: &[f64]) -> Result<Vec<f64>> {
    if a.ncols() != x.len() {
        return Err(QkmmError::Validation(format!(
            "cannot apply {}x{} to a vector of length {}",
            a.nrows(),
            a.ncols(),
            x.len()
        )));
    }
    Ok((a * DVector::from_column_slice(x)).iter().copied().collect())
}

pub fn classical_dot(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(QkmmError::Validation(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x * y).sum())
}

fn check_distribution(p: &[f64], name: &str) -> Result<()> {
    if p.iter().any(|x| !x.is_finite() || *x < -NEGATIVE_PROBABILITY_TOL) {
        return Err(QkmmError::Numeric(format!("{name} has invalid entries")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_SUM_TOL {
        return Err(QkmmError::Validation(format!("{name} sums to {sum}, expected 1")));
    }
    Ok(())
}

/// Classical fidelity (Σ √(p·q))².
pub fn fidelity(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(QkmmError::Validation(format!(
            "distribution lengths differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    check_distribution(p, "ideal distribution")?;
    check_distribution(q, "noisy distribution")?;
    let bc: f64 = p.iter().zip(q).map(|(x, y)| (x.max(0.0) * y.max(0.0)).sqrt()).sum();
    Ok((bc * bc).clamp(0.0, 1.0))
}

/// Normalized Frobenius inner product of two magnitude arrays.
pub fn matrix_overlap_fidelity(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    check_shape(estimate, truth)?;
    let dot: f64 = estimate.iter().zip(truth).map(|(e, t)| e.abs() * t.abs()).sum();
    let ne = estimate.iter().map(|e| e * e).sum::<f64>().sqrt();
    let nt = truth.iter().map(|t| t * t).sum::<f64>().sqrt();
    if ne == 0.0 && nt == 0.0 {
        return Ok(1.0);
    }
    if ne == 0.0 || nt == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (ne * nt)).clamp(0.0, 1.0))
}

fn check_shape(estimate: &[f64], truth: &[f64]) -> Result<()> {
    if estimate.len() != truth.len() {
        return Err(QkmmError::Validation(format!(
            "shape mismatch: {} vs {} entries",
            estimate.len(),
            truth.len()
        )));
    }
    Ok(())
}

/// |estimate − |truth|| per element.
pub fn per_element_errors(estimate: &[f64], truth: &[f64]) -> Result<Vec<f64>> {
    check_shape(estimate, truth)?;
    Ok(estimate.iter().zip(truth).map(|(e, t)| (e - t.abs()).abs()).collect())
}

pub fn mean_error(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    let errors = per_element_errors(estimate, truth)?;
    if errors.is_empty() {
        return Ok(0.0);
    }
    Ok(errors.iter().sum::<f64>() / errors.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyGate {
    pub bound: f64,
    pub passed: Vec<bool>,
    pub pass_rate: f64,
}

/// Element passes when |estimate − |truth|| ≤ bound (inclusive).
pub fn accuracy_gate(estimate: &[f64], truth: &[f64], bound: f64) -> Result<AccuracyGate> {
    if bound.is_nan() || bound <= 0.0 {
        return Err(QkmmError::Validation(format!("bound must be positive, got {bound}")));
    }
    let passed: Vec<bool> = per_element_errors(estimate, truth)?
        .into_iter()
        .map(|e| e <= bound + GATE_EPSILON)
        .collect();
    let pass_rate = if passed.is_empty() {
        1.0
    } else {
        passed.iter().filter(|&&p| p).count() as f64 / passed.len() as f64
    };
    Ok(AccuracyGate {
        bound,
        passed,
        pass_rate,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Classical fidelity between ideal and actual outcome distributions.
    pub fidelity: f64,
    /// Overlap of estimated and true magnitude arrays.
    pub matrix_fidelity: f64,
    pub mean_error: f64,
    pub per_element_errors: Vec<f64>,
    pub config_echo: serde_json::Value,
}

impl MetricReport {
    pub fn new(
        ideal: &[f64],
        actual: &[f64],
        estimate: &ProductEstimate,
        truth: &[f64],
        config_echo: serde_json::Value,
    ) -> Result<Self> {
        Ok(Self {
            fidelity: fidelity(ideal, actual)?,
            matrix_fidelity: matrix_overlap_fidelity(&estimate.magnitudes, truth)?,
            mean_error: mean_error(&estimate.magnitudes, truth)?,
            per_element_errors: per_element_errors(&estimate.magnitudes, truth)?,
            config_echo,
        })
    }
}

/// Magnitudes the bundle would read out with perfect statistics, in cell order.
pub fn true_magnitudes_m2m(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let c = classical_product(a, b)?;
    let mut out = Vec::with_capacity(c.len());
    for i in 0..c.nrows() {
        for j in 0..c.ncols() {
            out.push(c[(i, j)].abs());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algos::{build_m2m, build_v2v, Normalization, RowNormalizedMatrix};
    use crate::encoding::NormalizedVector;
    use crate::state::simulate;

    #[test]
    fn fidelity_examples() {
        assert!((fidelity(&[0.25; 4], &[0.25; 4]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(fidelity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((fidelity(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - 0.5).abs() < 1e-12);
        assert!(fidelity(&[1.0], &[0.5, 0.5]).is_err());
        assert!(fidelity(&[0.9, 0.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn mean_error_examples() {
        let truth = [0.2, -0.5, 0.7];
        assert_eq!(mean_error(&[0.2, 0.5, 0.7], &truth).unwrap(), 0.0);
        let shifted = [0.3, 0.6, 0.8];
        assert!((mean_error(&shifted, &truth).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn accuracy_gate_is_inclusive() {
        let g = accuracy_gate(&[0.5, 0.7, 0.2], &[0.4, 0.5, 0.2], 0.1).unwrap();
        assert_eq!(g.passed, vec![true, false, true]);
        assert!((g.pass_rate - 2.0 / 3.0).abs() < 1e-12);
        assert!(accuracy_gate(&[0.0], &[0.0], 0.0).is_err());
    }

    #[test]
    fn identity_m2m_reconstructs_identity() {
        let id = DMatrix::identity(2, 2);
        let bundle = build_m2m(
            &RowNormalizedMatrix::new(id.clone(), Normalization::Rows).unwrap(),
            &RowNormalizedMatrix::new(id, Normalization::Columns).unwrap(),
        )
        .unwrap();
        let p = simulate(&bundle.circuit).unwrap().probabilities();
        let est = reconstruct_magnitudes(Outcomes::Probabilities(&p), &bundle).unwrap();
        for (m, t) in est.magnitudes.iter().zip([1.0, 0.0, 0.0, 1.0]) {
            assert!((m - t).abs() < 1e-9);
        }
        assert_eq!(est.matrix(0), DMatrix::from_row_slice(2, 2, &est.magnitudes));
    }

    #[test]
    fn v2v_reconstructs_the_dot_product() {
        let a = NormalizedVector::new(vec![0.6, 0.8, 0.0, 0.0]).unwrap();
        let b = NormalizedVector::new(vec![0.8, 0.6, 0.0, 0.0]).unwrap();
        let bundle = build_v2v(&a, &b).unwrap();
        let p = simulate(&bundle.circuit).unwrap().probabilities();
        let est = reconstruct_magnitudes(Outcomes::Probabilities(&p), &bundle).unwrap();
        assert!((est.magnitudes[0] - 0.96).abs() < 1e-9);
        assert!(reconstruct_magnitudes(Outcomes::Probabilities(&p[..2]), &bundle).is_err());
        let mut bad = p.clone();
        bad[0] = -0.1;
        assert!(matches!(
            reconstruct_magnitudes(Outcomes::Probabilities(&bad), &bundle),
            Err(QkmmError::Numeric(_))
        ));
    }

    #[test]
    fn overlap_fidelity_bounds() {
        assert_eq!(matrix_overlap_fidelity(&[0.0, 1.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!((matrix_overlap_fidelity(&[0.3, 0.4], &[0.6, 0.8]).unwrap() - 1.0).abs() < 1e-12);
    }
}
