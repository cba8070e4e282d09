//! The two-level atom: ladder operators, the driven Hamiltonian, and its
//! spectrum.

mod state;

pub use state::{DensityMatrix, StateDiagnostics, StateError};

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::matrix::ComplexMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{field} must be positive, got {value}")]
    NonPositiveRate { field: &'static str, value: f64 },
    #[error("{field} must be finite")]
    NonFinite { field: &'static str },
    #[error("level energies must satisfy e0 <= e1, got e0 = {e0}, e1 = {e1}")]
    EnergyOrder { e0: f64, e1: f64 },
}

/// Two-level atom with energies `e0 <= e1`, complex drive `gamma`, and
/// phenomenological rates `mu` (population moved from |0> to |1>) and
/// `nu` (population moved from |1> to |0>). Units have hbar = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomModel {
    e0: f64,
    e1: f64,
    gamma: C64,
    mu: f64,
    nu: f64,
}

impl AtomModel {
    pub fn new(e0: f64, e1: f64, gamma: C64, mu: f64, nu: f64) -> Result<Self, ModelError> {
        for (field, x) in [("e0", e0), ("e1", e1), ("mu", mu), ("nu", nu)] {
            if !x.is_finite() {
                return Err(ModelError::NonFinite { field });
            }
        }
        if !(gamma.re.is_finite() && gamma.im.is_finite()) {
            return Err(ModelError::NonFinite { field: "gamma" });
        }
        if mu <= 0.0 {
            return Err(ModelError::NonPositiveRate { field: "mu", value: mu });
        }
        if nu <= 0.0 {
            return Err(ModelError::NonPositiveRate { field: "nu", value: nu });
        }
        if e0 > e1 {
            return Err(ModelError::EnergyOrder { e0, e1 });
        }
        Ok(Self { e0, e1, gamma, mu, nu })
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }
    pub fn e1(&self) -> f64 {
        self.e1
    }
    pub fn gamma(&self) -> C64 {
        self.gamma
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `E1 - E0`.
    pub fn splitting(&self) -> f64 {
        self.e1 - self.e0
    }

    /// `(mu + nu) / 2`, the coherence decay rate and the shift between the
    /// Liouvillian eigenvalues and the roots of the relaxation cubic.
    pub fn half_rate(&self) -> f64 {
        0.5 * (self.mu + self.nu)
    }

    /// Degenerate levels, `E1 == E0`.
    pub fn is_degenerate(&self) -> bool {
        self.e0 == self.e1
    }
}

/// The four 2x2 matrices built from the ladder operators.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderOperators {
    /// `sigma_+ = [[0, 1], [0, 0]]`
    pub raising: ComplexMatrix,
    /// `sigma_- = [[0, 0], [1, 0]]`
    pub lowering: ComplexMatrix,
    /// `sigma_+ sigma_- = diag(1, 0)`
    pub raise_lower: ComplexMatrix,
    /// `sigma_- sigma_+ = diag(0, 1)`
    pub lower_raise: ComplexMatrix,
}

pub fn ladder_operators() -> LadderOperators {
    let raising = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
    let lowering = ComplexMatrix::from_real_rows(&[[0.0, 0.0], [1.0, 0.0]]);
    let raise_lower = &raising * &lowering;
    let lower_raise = &lowering * &raising;
    LadderOperators {
        raising,
        lowering,
        raise_lower,
        lower_raise,
    }
}

/// Pauli matrices `(sigma_1, sigma_2, sigma_3)`.
pub fn pauli() -> [ComplexMatrix; 3] {
    let i = C64::new(0.0, 1.0);
    let z = C64::new(0.0, 0.0);
    [
        ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]),
        ComplexMatrix::from_rows(&[[z, -i], [i, z]]),
        ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]]),
    ]
}

/// `H = [[E0, gamma], [conj(gamma), E1]]`.
pub fn hamiltonian(m: &AtomModel) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[[C64::new(m.e0, 0.0), m.gamma], [m.gamma.conj(), C64::new(m.e1, 0.0)]])
}

/// Eigen-decomposition of the driven Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpectrum {
    /// `(E0 + E1 + sqrt((E1-E0)^2 + 4|gamma|^2)) / 2`
    pub upper: f64,
    /// `(E0 + E1 - sqrt((E1-E0)^2 + 4|gamma|^2)) / 2`
    pub lower: f64,
    /// Normalized eigenvector of `lower`, first component real and positive.
    pub lower_ket: [C64; 2],
    /// Normalized eigenvector of `upper`, built orthogonal to `lower_ket`.
    pub upper_ket: [C64; 2],
}

pub fn hamiltonian_spectrum(m: &AtomModel) -> HamiltonianSpectrum {
    let root = (m.splitting().powi(2) + 4.0 * m.gamma.norm_sqr()).sqrt();
    let upper = 0.5 * (m.e0 + m.e1 + root);
    let lower = 0.5 * (m.e0 + m.e1 - root);

    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    if m.gamma == zero {
        // Uncoupled levels: the basis kets are the eigenvectors.
        return HamiltonianSpectrum {
            upper,
            lower,
            lower_ket: [one, zero],
            upper_ket: [zero, one],
        };
    }

    let g = m.gamma.norm();
    let offset = m.e0 - lower;
    let norm = (g * g + offset * offset).sqrt();
    let first = C64::new(g / norm, 0.0);
    let second = -(m.gamma.norm() / m.gamma) * (offset / norm);
    HamiltonianSpectrum {
        upper,
        lower,
        lower_ket: [first, second],
        upper_ket: [second.conj(), -first],
    }
}
