//! Asymptotic state of the master equation, three ways, and time evolution.
//!
//! The cofactor route diagonalizes `W = (O^T)^{-1} D_W O^T` with `O` the
//! eigenbasis of `W^T`. As `t -> infinity` only the zero mode survives, so
//! `Psi(inf) = (O^T)^{-1} |0))((0| O^T Psi(0)`. Because the first column of
//! `O` is the trace functional `(1,0,0,1)`, this projector has the sparse
//! form whose first and last columns both equal `(O11, O12, O13, O14) / |O|`,
//! built from the first-column cofactors of `O`.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::liouvillian::{spectrum, wt_eigenbasis, Liouvillian, LiouvillianError};
use crate::matrix::{eigenvalues, expm, null_space, vec_norm, ComplexMatrix, MatrixError};
use crate::model::{DensityMatrix, StateDiagnostics, StateError};
use crate::numerics::{StateTolerance, DEFAULT_TOL};
use crate::perturbation::PerturbationError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteadyError {
    #[error(transparent)]
    Liouvillian(#[from] LiouvillianError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Perturbation(#[from] PerturbationError),
    #[error("steady state is not unique: null space has dimension {0}")]
    NotUnique(usize),
    #[error("a nonzero eigenvalue has non-negative real part ({0})")]
    NotRelaxing(C64),
    #[error("propagation did not reach a fixed point (residual {0:.3e})")]
    NotConverged(f64),
    #[error("invalid time grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid integrator step {0}")]
    InvalidStep(f64),
}

/// Cofactor form of the asymptotic projector for a qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticProjector {
    /// First-column cofactors `O11, O12, O13, O14` of `O`.
    pub cofactors: [C64; 4],
    /// `|O|`.
    pub det_o: C64,
    /// `(O^T)^{-1} |0))((0| O^T`.
    pub projector: ComplexMatrix,
}

impl AsymptoticProjector {
    /// `|O| - (O11 + O14)`, relative to `|O|`.
    pub fn one_relation_residual(&self) -> f64 {
        (self.det_o - (self.cofactors[0] + self.cofactors[3])).norm() / self.det_o.norm()
    }

    /// The projector as written with cofactors: columns 1 and 4 equal to the
    /// cofactor vector over `|O|`, columns 2 and 3 zero.
    pub fn cofactor_form(&self) -> ComplexMatrix {
        let col: Vec<C64> = self.cofactors.iter().map(|&c| c / self.det_o).collect();
        ComplexMatrix::from_fn(4, 4, |i, j| if j == 0 || j == 3 { col[i] } else { C64::new(0.0, 0.0) })
    }

    /// `(O11, O12, O13, O14) / |O|`, the vectorized asymptotic state.
    pub fn state_vector(&self) -> Vec<C64> {
        self.cofactors.iter().map(|&c| c / self.det_o).collect()
    }
}

pub fn asymptotic_projector(l: &Liouvillian) -> Result<AsymptoticProjector, SteadyError> {
    let report = spectrum(l)?;
    if let Some(bad) = report.values()[1..].iter().find(|z| z.re >= 0.0) {
        return Err(SteadyError::NotRelaxing(*bad));
    }
    let basis = wt_eigenbasis(l)?;
    let o = &basis.o;
    let mut cofactors = [C64::new(0.0, 0.0); 4];
    for (k, c) in cofactors.iter_mut().enumerate() {
        *c = o.cofactor(k, 0)?;
    }
    let det_o = o.determinant()?;
    if det_o.norm() == 0.0 {
        return Err(MatrixError::Singular.into());
    }

    let ot = o.transpose();
    let mut e0 = vec![C64::new(0.0, 0.0); 4];
    e0[0] = C64::new(1.0, 0.0);
    let lifted = ot.solve(&e0)?;
    let functional = ot.row(0).to_vec();
    let projector = ComplexMatrix::from_fn(4, 4, |i, j| lifted[i] * functional[j]);
    Ok(AsymptoticProjector {
        cofactors,
        det_o,
        projector,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyMethod {
    /// First-column cofactors of the `W^T` eigenbasis (qubit only).
    Cofactor,
    /// Normalized null vector of `W`.
    NullSpace,
    /// `e^{t W}` applied to an initial state at a long horizon.
    Propagate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyOptions {
    /// Propagation horizon; defaults to `50 / |Re lambda_slow|`.
    pub t_max: Option<f64>,
    /// Initial state for propagation; defaults to `|0><0|`.
    pub initial: Option<DensityMatrix>,
    /// Fixed-point residual tolerance on `||W vec(rho)||`, relative to `max(1, ||W||)`.
    pub tol: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            t_max: None,
            initial: None,
            tol: DEFAULT_TOL,
        }
    }
}

pub fn steady_state(l: &Liouvillian, method: SteadyMethod) -> Result<DensityMatrix, SteadyError> {
    steady_state_with(l, method, &SteadyOptions::default())
}

pub fn steady_state_with(
    l: &Liouvillian,
    method: SteadyMethod,
    opts: &SteadyOptions,
) -> Result<DensityMatrix, SteadyError> {
    let v = steady_vector(l, method, opts)?;
    let residual = vec_norm(&l.matrix().mul_vec(&v)) / l.matrix().norm_fro().max(1.0);
    if residual > opts.tol {
        return Err(SteadyError::NotConverged(residual));
    }
    Ok(DensityMatrix::from_vectorized(&v, &StateTolerance::PROPAGATED)?)
}

/// Unvalidated vectorized steady state.
pub fn steady_vector(l: &Liouvillian, method: SteadyMethod, opts: &SteadyOptions) -> Result<Vec<C64>, SteadyError> {
    let n = l.n();
    match method {
        SteadyMethod::Cofactor => Ok(asymptotic_projector(l)?.state_vector()),
        SteadyMethod::NullSpace => {
            let basis = null_space(l.matrix());
            if basis.len() != 1 {
                return Err(SteadyError::NotUnique(basis.len()));
            }
            let v = &basis[0];
            let trace: C64 = (0..n).map(|k| v[k * (n + 1)]).sum();
            Ok(v.iter().map(|&z| z / trace).collect())
        }
        SteadyMethod::Propagate => {
            let t_max = match opts.t_max {
                Some(t) => t,
                None => 50.0 / slowest_rate(l)?,
            };
            let psi0 = opts
                .initial
                .clone()
                .unwrap_or_else(|| DensityMatrix::basis(n, 0))
                .vectorize();
            Ok(expm(l.matrix(), t_max)?.mul_vec(&psi0))
        }
    }
}

/// Smallest `|Re lambda|` over the nonzero eigenvalues of `W`.
///
/// Fails if more than one eigenvalue is zero or if any nonzero eigenvalue
/// does not decay.
pub fn slowest_rate(l: &Liouvillian) -> Result<f64, SteadyError> {
    let values: Vec<C64> = if l.atom().is_some() {
        spectrum(l)?.values()[1..].to_vec()
    } else {
        let scale = l.matrix().norm_fro().max(1.0);
        let mut ev = eigenvalues(l.matrix())?;
        ev.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        let zeros = ev.iter().filter(|z| z.norm() <= 1e-10 * scale).count();
        if zeros != 1 {
            return Err(SteadyError::NotUnique(zeros));
        }
        ev.split_off(1)
    };
    let mut slowest = f64::INFINITY;
    for z in values {
        if z.re >= 0.0 {
            return Err(SteadyError::NotRelaxing(z));
        }
        slowest = slowest.min(-z.re);
    }
    Ok(slowest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolveMethod {
    /// `Psi(t) = e^{tW} Psi(0)` at each sample.
    Expm,
    /// Fixed-step classical Runge–Kutta between samples.
    Rk4,
    /// `e^{tD} e^{tH} Psi(0)` from the split propagator.
    Perturbative,
}

impl EvolveMethod {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Expm => "expm",
            Self::Rk4 => "rk4",
            Self::Perturbative => "perturbative",
        }
    }
}

/// Time-stamped vectorized states.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n: usize,
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub method: EvolveMethod,
}

impl Trajectory {
    pub fn diagnostics(&self) -> Vec<StateDiagnostics> {
        self.states
            .iter()
            .map(|s| StateDiagnostics::measure(&ComplexMatrix::from_vec(self.n, self.n, s.clone())))
            .collect()
    }

    /// First sample violating `tol`, with its index.
    pub fn check(&self, tol: &StateTolerance) -> Result<(), (usize, StateError)> {
        for (k, d) in self.diagnostics().into_iter().enumerate() {
            d.check(tol).map_err(|e| (k, e))?;
        }
        Ok(())
    }

    /// Largest entrywise difference from another trajectory on the same grid.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| crate::matrix::vec_max_diff(a, b))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvolveOptions {
    /// RK4 step; defaults to `min(0.01, 0.1 / ||W||)`.
    pub rk4_step: Option<f64>,
}

pub fn default_rk4_step(l: &Liouvillian) -> f64 {
    let norm = l.matrix().norm_fro();
    if norm == 0.0 {
        0.01
    } else {
        0.01f64.min(0.1 / norm)
    }
}

pub fn validate_grid(grid: &[f64]) -> Result<(), SteadyError> {
    if grid.is_empty() {
        return Err(SteadyError::InvalidGrid("empty"));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(SteadyError::InvalidGrid("non-finite time"));
    }
    if grid[0] < 0.0 {
        return Err(SteadyError::InvalidGrid("negative time"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SteadyError::InvalidGrid("times must be strictly increasing"));
    }
    Ok(())
}

pub fn evolve(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    grid: &[f64],
    method: EvolveMethod,
) -> Result<Trajectory, SteadyError> {
    evolve_with(l, rho0, grid, method, &EvolveOptions::default())
}

pub fn evolve_with(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    grid: &[f64],
    method: EvolveMethod,
    opts: &EvolveOptions,
) -> Result<Trajectory, SteadyError> {
    validate_grid(grid)?;
    if rho0.dim() != l.n() {
        return Err(LiouvillianError::DimensionMismatch {
            expected: l.n(),
            found: rho0.dim(),
        }
        .into());
    }
    let psi0 = rho0.vectorize();
    let w = l.matrix();
    let states = match method {
        EvolveMethod::Expm => grid
            .iter()
            .map(|&t| Ok(expm(w, t)?.mul_vec(&psi0)))
            .collect::<Result<Vec<_>, SteadyError>>()?,
        EvolveMethod::Rk4 => {
            let h_max = opts.rk4_step.unwrap_or_else(|| default_rk4_step(l));
            if !(h_max > 0.0 && h_max.is_finite()) {
                return Err(SteadyError::InvalidStep(h_max));
            }
            let mut out = Vec::with_capacity(grid.len());
            let mut psi = psi0;
            let mut t = 0.0;
            for &target in grid {
                psi = rk4_advance(w, psi, target - t, h_max);
                t = target;
                out.push(psi.clone());
            }
            out
        }
        EvolveMethod::Perturbative => {
            let m = l.require_atom()?;
            grid.iter()
                .map(|&t| crate::perturbation::approx_evolve_vec(m, &psi0, t))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    Ok(Trajectory {
        n: l.n(),
        times: grid.to_vec(),
        states,
        method,
    })
}

/// Advance `psi` by `span` with equal RK4 steps no longer than `h_max`.
fn rk4_advance(w: &ComplexMatrix, mut psi: Vec<C64>, span: f64, h_max: f64) -> Vec<C64> {
    if span <= 0.0 {
        return psi;
    }
    let steps = (span / h_max).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let axpy = |x: &[C64], k: &[C64], a: f64| -> Vec<C64> { x.iter().zip(k).map(|(&xi, &ki)| xi + ki * a).collect() };
    for _ in 0..steps {
        let k1 = w.mul_vec(&psi);
        let k2 = w.mul_vec(&axpy(&psi, &k1, 0.5 * h));
        let k3 = w.mul_vec(&axpy(&psi, &k2, 0.5 * h));
        let k4 = w.mul_vec(&axpy(&psi, &k3, h));
        for i in 0..psi.len() {
            psi[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::build_w;
    use crate::model::AtomModel;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn generic() -> Liouvillian {
        build_w(&AtomModel::new(0.2, 1.1, c(0.4, 0.25), 0.45, 0.3).unwrap())
    }

    #[test]
    fn projector_structure() {
        let p = asymptotic_projector(&generic()).unwrap();
        assert!(p.one_relation_residual() < 1e-10);
        assert!(p.projector.max_abs_diff(&p.cofactor_form()) < 1e-12);
        for i in 0..4 {
            assert!(p.projector[(i, 1)].norm() < 1e-14);
            assert!(p.projector[(i, 2)].norm() < 1e-14);
            assert_eq!(p.projector[(i, 0)], p.projector[(i, 3)]);
        }
        let sq = &p.projector * &p.projector;
        assert!(sq.max_abs_diff(&p.projector) < 1e-9);
    }

    #[test]
    fn three_methods_agree() {
        let l = generic();
        let a = steady_state(&l, SteadyMethod::Cofactor).unwrap();
        let b = steady_state(&l, SteadyMethod::NullSpace).unwrap();
        let d = steady_state(&l, SteadyMethod::Propagate).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-9);
        assert!(a.matrix().max_abs_diff(d.matrix()) < 1e-7);
    }

    #[test]
    fn weak_drive_limit_is_thermal_mixture() {
        let l = build_w(&AtomModel::new(0.0, 1.0, c(1e-6, 0.0), 0.3, 0.1).unwrap());
        let rho = steady_state(&l, SteadyMethod::Cofactor).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[[0.25, 0.0], [0.0, 0.75]]);
        assert!(rho.matrix().max_abs_diff(&expected) < 1e-4);
    }

    #[test]
    fn balanced_rates_give_maximally_mixed() {
        let l = build_w(&AtomModel::new(0.0, 1.0, c(1e-7, 0.0), 0.5, 0.5).unwrap());
        let rho = steady_state(&l, SteadyMethod::NullSpace).unwrap();
        assert!(rho.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).matrix()) < 1e-9);
    }

    #[test]
    fn uncoupled_population_dynamics() {
        let (mu, nu) = (0.6, 0.25);
        let l = build_w(&AtomModel::new(0.0, 1.0, c(0.0, 0.0), mu, nu).unwrap());
        let grid = [0.0, 0.5, 1.0, 3.0];
        let traj = evolve(&l, &DensityMatrix::basis(2, 0), &grid, EvolveMethod::Expm).unwrap();
        for (t, s) in grid.iter().zip(&traj.states) {
            let a = (nu + mu * (-t * (mu + nu)).exp()) / (mu + nu);
            assert!((s[0].re - a).abs() < 1e-14);
        }
    }

    #[test]
    fn rk4_matches_expm() {
        let l = generic();
        let grid: Vec<f64> = (0..20).map(|k| k as f64 * 0.37).collect();
        let rho0 = DensityMatrix::basis(2, 1);
        let a = evolve(&l, &rho0, &grid, EvolveMethod::Expm).unwrap();
        let b = evolve(&l, &rho0, &grid, EvolveMethod::Rk4).unwrap();
        assert!(a.max_deviation(&b) < 1e-8);
        assert_eq!(a.states[0], rho0.vectorize());
    }

    #[test]
    fn grid_validation() {
        let l = generic();
        let rho0 = DensityMatrix::basis(2, 0);
        for bad in [&[][..], &[-1.0, 0.0][..], &[0.0, 1.0, 1.0][..], &[0.0, f64::NAN][..]] {
            assert!(matches!(
                evolve(&l, &rho0, bad, EvolveMethod::Expm),
                Err(SteadyError::InvalidGrid(_))
            ));
        }
        let opts = EvolveOptions { rk4_step: Some(0.0) };
        assert!(matches!(
            evolve_with(&l, &rho0, &[0.0, 1.0], EvolveMethod::Rk4, &opts),
            Err(SteadyError::InvalidStep(_))
        ));
    }

    #[test]
    fn propagation_horizon_too_short_is_reported() {
        let l = generic();
        let opts = SteadyOptions {
            t_max: Some(0.1),
            ..Default::default()
        };
        assert!(matches!(
            steady_state_with(&l, SteadyMethod::Propagate, &opts),
            Err(SteadyError::NotConverged(_))
        ));
    }
}
