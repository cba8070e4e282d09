use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::matrix::{eigenvalues, ComplexMatrix};
use crate::numerics::StateTolerance;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("density matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("vectorized state of length {0} is not a perfect square")]
    BadLength(usize),
    #[error("density matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("density matrix trace is {0}, expected 1")]
    TraceNotOne(C64),
    #[error("density matrix has negative eigenvalue {0:.3e}")]
    NotPositive(f64),
    #[error("density matrix has non-finite entries")]
    NonFinite,
}

/// Measured deviations of a matrix from the density-matrix conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    /// `|tr rho - 1|`
    pub trace_deviation: f64,
    pub hermiticity_defect: f64,
    /// Smallest eigenvalue of the Hermitian part.
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub fn measure(rho: &ComplexMatrix) -> Self {
        Self {
            trace_deviation: (rho.trace() - C64::new(1.0, 0.0)).norm(),
            hermiticity_defect: rho.hermiticity_defect(),
            min_eigenvalue: min_hermitian_eigenvalue(rho),
        }
    }

    pub fn check(&self, tol: &StateTolerance) -> Result<(), StateError> {
        if self.hermiticity_defect > tol.hermiticity {
            return Err(StateError::NotHermitian(self.hermiticity_defect));
        }
        if self.trace_deviation > tol.trace {
            return Err(StateError::TraceNotOne(C64::new(1.0 + self.trace_deviation, 0.0)));
        }
        if self.min_eigenvalue < tol.min_eigenvalue {
            return Err(StateError::NotPositive(self.min_eigenvalue));
        }
        Ok(())
    }
}

fn min_hermitian_eigenvalue(rho: &ComplexMatrix) -> f64 {
    let herm = (rho + &rho.adjoint()).scale_re(0.5);
    if herm.rows() == 2 {
        let a = herm[(0, 0)].re;
        let d = herm[(1, 1)].re;
        let b = herm[(0, 1)].norm();
        return 0.5 * (a + d) - (0.25 * (a - d).powi(2) + b * b).sqrt();
    }
    match eigenvalues(&herm) {
        Ok(ev) => ev.iter().map(|z| z.re).fold(f64::INFINITY, f64::min),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Hermitian, unit-trace, positive-semidefinite `n x n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validate with the strict tolerances (`1e-12` on trace and Hermiticity).
    pub fn new(matrix: ComplexMatrix) -> Result<Self, StateError> {
        Self::with_tolerance(matrix, &StateTolerance::STRICT)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: &StateTolerance) -> Result<Self, StateError> {
        if !matrix.is_square() {
            return Err(StateError::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        if !matrix.is_finite() {
            return Err(StateError::NonFinite);
        }
        StateDiagnostics::measure(&matrix).check(tol)?;
        Ok(Self { matrix })
    }

    /// Rebuild from a row-major vectorization.
    pub fn from_vectorized(v: &[C64], tol: &StateTolerance) -> Result<Self, StateError> {
        Self::with_tolerance(unvectorize(v)?, tol)
    }

    /// `|k><k|` in dimension `n`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut m = ComplexMatrix::zeros(n, n);
        m[(k, k)] = C64::new(1.0, 0.0);
        Self { matrix: m }
    }

    /// `|psi><psi|` for a normalized ket.
    pub fn pure(ket: &[C64]) -> Result<Self, StateError> {
        let n = ket.len();
        Self::new(ComplexMatrix::from_fn(n, n, |i, j| ket[i] * ket[j].conj()))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n).scale_re(1.0 / n as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Row-major stacking; `(a, b, conj(b), d)` for a qubit.
    pub fn vectorize(&self) -> Vec<C64> {
        self.matrix.as_slice().to_vec()
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.matrix[(k, k)].re).collect()
    }

    /// Largest off-diagonal modulus.
    pub fn max_coherence(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.matrix[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        StateDiagnostics::measure(&self.matrix)
    }
}

/// Inverse of row-major vectorization.
pub(crate) fn unvectorize(v: &[C64]) -> Result<ComplexMatrix, StateError> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() || n == 0 {
        return Err(StateError::BadLength(v.len()));
    }
    Ok(ComplexMatrix::from_vec(n, n, v.to_vec()))
}
