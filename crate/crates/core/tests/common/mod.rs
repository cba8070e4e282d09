#![allow(dead_code)]

use lindblad::cli::{draw_atom, DrawRanges};
use lindblad::model::AtomModel;
use lindblad::{ComplexMatrix, C64};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn atoms(seed: u64, count: usize, ranges: &DrawRanges) -> Vec<AtomModel> {
    let mut r = rng(seed);
    (0..count).map(|_| draw_atom(&mut r, ranges)).collect()
}

pub fn to_na(m: &ComplexMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Eigenvalues from nalgebra's Schur decomposition.
pub fn oracle_eigenvalues(m: &ComplexMatrix) -> Vec<C64> {
    to_na(m)
        .eigenvalues()
        .expect("complex Schur form is triangular")
        .iter()
        .copied()
        .collect()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn oracle_hermitian(m: &ComplexMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = to_na(m).symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
