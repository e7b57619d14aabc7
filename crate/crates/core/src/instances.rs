//! Seeded random inputs: unit vectors, normalized matrices, orthogonal blocks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algos::{Normalization, RowNormalizedMatrix};
use crate::encoding::NormalizedVector;

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial))
}

fn gaussian_unit(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Uniformly distributed point on the unit sphere in R^len (len a power of two ≥ 2).
pub fn random_unit_vector(len: usize, rng: &mut impl Rng) -> NormalizedVector {
    NormalizedVector::new(gaussian_unit(len, rng)).expect("length is a power of two")
}

pub fn random_normalized_matrix(dim: usize, normalization: Normalization, rng: &mut impl Rng) -> RowNormalizedMatrix {
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let v = gaussian_unit(dim, rng);
        for (j, x) in v.into_iter().enumerate() {
            match normalization {
                Normalization::Rows => m[(i, j)] = x,
                Normalization::Columns => m[(j, i)] = x,
            }
        }
    }
    RowNormalizedMatrix::new(m, normalization).expect("rows are unit vectors")
}

pub fn random_row_normalized(dim: usize, rng: &mut impl Rng) -> RowNormalizedMatrix {
    random_normalized_matrix(dim, Normalization::Rows, rng)
}

pub fn random_column_normalized(dim: usize, rng: &mut impl Rng) -> RowNormalizedMatrix {
    random_normalized_matrix(dim, Normalization::Columns, rng)
}

/// Haar-random orthogonal matrix (QR of a Gaussian matrix with sign fix).
pub fn random_orthogonal(dim: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Normalized Walsh–Hadamard matrix of size 2^n.
pub fn hadamard_matrix(dim: usize) -> DMatrix<f64> {
    let scale = 1.0 / (dim as f64).sqrt();
    DMatrix::from_fn(dim, dim, |i, j| {
        if (i & j).count_ones() % 2 == 0 {
            scale
        } else {
            -scale
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_instance() {
        let a = random_unit_vector(8, &mut trial_rng(7, 3));
        let b = random_unit_vector(8, &mut trial_rng(7, 3));
        assert_eq!(a, b);
        assert_ne!(a, random_unit_vector(8, &mut trial_rng(7, 4)));
    }

    #[test]
    fn generated_matrices_are_normalized() {
        let mut rng = trial_rng(1, 0);
        let a = random_row_normalized(8, &mut rng);
        let b = random_column_normalized(8, &mut rng);
        for i in 0..8 {
            assert!((a.values().row(i).norm() - 1.0).abs() < 1e-12);
            assert!((b.values().column(i).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_and_hadamard_are_orthogonal() {
        let q = random_orthogonal(8, &mut trial_rng(2, 0));
        let h = hadamard_matrix(8);
        for m in [q, h] {
            let d = &m.transpose() * &m - DMatrix::<f64>::identity(8, 8);
            assert!(d.amax() < 1e-12);
        }
    }
}
