//! Shared numerical tolerances.

/// Default residual tolerance for eigen-solves, null spaces, and fixed-point
/// checks. Operations that need a different value take it explicitly.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Thresholds used when checking that a matrix is a physical density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTolerance {
    /// Maximum `|tr rho - 1|`.
    pub trace: f64,
    /// Maximum `|rho_ij - conj(rho_ji)|`.
    pub hermiticity: f64,
    /// Smallest allowed eigenvalue (a small negative number).
    pub min_eigenvalue: f64,
}

impl StateTolerance {
    /// Tight tolerances for states built directly from exact data.
    pub const STRICT: Self = Self {
        trace: 1e-12,
        hermiticity: 1e-12,
        min_eigenvalue: -1e-10,
    };

    /// Tolerances for states produced by propagation or linear solves.
    pub const PROPAGATED: Self = Self {
        trace: 1e-10,
        hermiticity: 1e-10,
        min_eigenvalue: -1e-8,
    };
}

impl Default for StateTolerance {
    fn default() -> Self {
        Self::STRICT
    }
}
