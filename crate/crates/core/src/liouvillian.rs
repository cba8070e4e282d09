//! The vectorized Lindblad generator `W`, its spectrum via the relaxation
//! cubic, and the eigenbasis of `W^T`.
//!
//! For a qubit the state is vectorized as `(a, b, conj(b), d)` (row-major),
//! so that `d/dt (a, b, conj(b), d)^T = W (a, b, conj(b), d)^T` with
//!
//! ```text
//!     | -mu        i conj(g)   -i g        nu       |
//! W = |  i g       iD - s       0         -i g      |
//!     | -i conj(g)  0          -iD - s     i conj(g) |
//!     |  mu       -i conj(g)    i g       -nu       |
//! ```
//!
//! where `D = E1 - E0` and `s = (mu + nu)/2`. Under row-major stacking,
//! `vec(A rho B) = (A kron B^T) vec(rho)`.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::matrix::{
    eigenvector_from_eigenvalue, solve_cubic_in, vec_norm, ComplexMatrix, CubicMethod, MatrixError, Polynomial,
};
use crate::model::{hamiltonian, ladder_operators, AtomModel, DensityMatrix, StateError};
use crate::nlevel::NLevelModel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LiouvillianError {
    #[error("operation needs a two-level model, got n = {0}")]
    NotTwoLevel(usize),
    #[error("state has dimension {found}, model has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("eigenvalues {first} and {second} collide ({value_a} vs {value_b})")]
    DegenerateSpectrum {
        first: usize,
        second: usize,
        value_a: C64,
        value_b: C64,
    },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Where a Liouvillian came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    TwoLevel(AtomModel),
    NLevel(NLevelModel),
}

/// The `n^2 x n^2` generator acting on row-major vectorized states.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    n: usize,
    w: ComplexMatrix,
    source: Source,
}

impl Liouvillian {
    pub(crate) fn from_parts(n: usize, w: ComplexMatrix, source: Source) -> Self {
        debug_assert_eq!(w.shape(), (n * n, n * n));
        Self { n, w, source }
    }

    /// Atom dimension `n` (the matrix is `n^2 x n^2`).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn atom(&self) -> Option<&AtomModel> {
        match &self.source {
            Source::TwoLevel(m) => Some(m),
            Source::NLevel(_) => None,
        }
    }

    pub(crate) fn require_atom(&self) -> Result<&AtomModel, LiouvillianError> {
        self.atom().ok_or(LiouvillianError::NotTwoLevel(self.n))
    }

    /// Row vector with ones at the vectorized diagonal positions; the trace
    /// functional. It is a left null vector of every trace-preserving `W`.
    pub fn trace_row(&self) -> Vec<C64> {
        trace_row(self.n)
    }

    /// `|| trace_row * W ||`, zero for a trace-preserving generator.
    pub fn trace_leak(&self) -> f64 {
        vec_norm(&self.w.vec_mul(&self.trace_row()))
    }

    /// `W vec(rho)`, unvectorized.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix, LiouvillianError> {
        if rho.shape() != (self.n, self.n) {
            return Err(LiouvillianError::DimensionMismatch {
                expected: self.n,
                found: rho.rows(),
            });
        }
        Ok(ComplexMatrix::from_vec(self.n, self.n, self.w.mul_vec(rho.as_slice())))
    }
}

pub(crate) fn trace_row(n: usize) -> Vec<C64> {
    let mut r = vec![C64::new(0.0, 0.0); n * n];
    for k in 0..n {
        r[k * (n + 1)] = C64::new(1.0, 0.0);
    }
    r
}

/// The dissipator
/// `mu (s- rho s+ - {s+ s-, rho}/2) + nu (s+ rho s- - {s- s+, rho}/2)`.
pub fn dissipator(m: &AtomModel, rho: &DensityMatrix) -> Result<ComplexMatrix, LiouvillianError> {
    dissipator_raw(m, rho.matrix())
}

pub(crate) fn dissipator_raw(m: &AtomModel, rho: &ComplexMatrix) -> Result<ComplexMatrix, LiouvillianError> {
    if rho.shape() != (2, 2) {
        return Err(LiouvillianError::DimensionMismatch {
            expected: 2,
            found: rho.rows(),
        });
    }
    let ops = ladder_operators();
    let term = |jump: &ComplexMatrix, jump_dag: &ComplexMatrix, number: &ComplexMatrix| {
        let sandwich = &(jump * rho) * jump_dag;
        let anti = &(number * rho) + &(rho * number);
        &sandwich - &anti.scale_re(0.5)
    };
    let decay = term(&ops.lowering, &ops.raising, &ops.raise_lower);
    let pump = term(&ops.raising, &ops.lowering, &ops.lower_raise);
    Ok(&decay.scale_re(m.mu()) + &pump.scale_re(m.nu()))
}

/// Right-hand side of the master equation, `-i[H, rho] + D rho`.
pub fn master_rhs(m: &AtomModel, rho: &ComplexMatrix) -> Result<ComplexMatrix, LiouvillianError> {
    let h = hamiltonian(m);
    let coherent = h.commutator(rho).scale(C64::new(0.0, -1.0));
    Ok(&coherent + &dissipator_raw(m, rho)?)
}

/// `W` written out entrywise.
pub fn build_w(m: &AtomModel) -> Liouvillian {
    let i = C64::new(0.0, 1.0);
    let g = m.gamma();
    let gb = g.conj();
    let d = m.splitting();
    let s = m.half_rate();
    let re = |x: f64| C64::new(x, 0.0);
    let zero = re(0.0);
    let w = ComplexMatrix::from_rows(&[
        [re(-m.mu()), i * gb, -i * g, re(m.nu())],
        [i * g, C64::new(-s, d), zero, -i * g],
        [-i * gb, zero, C64::new(-s, -d), i * gb],
        [re(m.mu()), -i * gb, i * g, re(-m.nu())],
    ]);
    Liouvillian::from_parts(2, w, Source::TwoLevel(*m))
}

/// `-i (H kron 1 - 1 kron H^T)`, the vectorized commutator part.
pub fn coherent_generator(h: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(h.rows());
    (&h.kron(&id) - &id.kron(&h.transpose())).scale(C64::new(0.0, -1.0))
}

/// Vectorized `rate (L rho L^dag - {L^dag L, rho}/2)`.
pub fn lindblad_term(jump: &ComplexMatrix, rate: f64) -> ComplexMatrix {
    let n = jump.rows();
    let id = ComplexMatrix::identity(n);
    let number = &jump.adjoint() * jump;
    let sandwich = jump.kron(&jump.conj());
    let anti = &number.kron(&id) + &id.kron(&number.transpose());
    (&sandwich - &anti.scale_re(0.5)).scale_re(rate)
}

/// `W` assembled from Kronecker products; an independent route to [`build_w`].
pub fn build_w_tensor(m: &AtomModel) -> ComplexMatrix {
    let ops = ladder_operators();
    let coherent = coherent_generator(&hamiltonian(m));
    let decay = lindblad_term(&ops.lowering, m.mu());
    let pump = lindblad_term(&ops.raising, m.nu());
    &(&coherent + &decay) + &pump
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenClass {
    TrivialZero,
    RealNegative,
    ComplexPairMember,
}

/// Which way the deflated quadratic split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `Lambda_- < Lambda_+ < 0`, four real eigenvalues.
    Real,
    /// `Lambda_+- ` complex conjugate with negative real part.
    ComplexPair,
    /// Discriminant (or the quadratic's constant term) vanishes to tolerance.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifiedEigenvalue {
    pub value: C64,
    pub class: EigenClass,
}

/// Spectrum of a two-level `W` through the relaxation cubic
/// `f(L) = L^3 + a L^2 + b L + c` in the shifted variable `L = lambda + (mu+nu)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// `lambda_1 = 0`, `lambda_2 = L0 - s`, `lambda_3 = L+ - s`, `lambda_4 = L- - s`.
    pub eigenvalues: [ClassifiedEigenvalue; 4],
    /// Interval searched for the real root `L0`.
    pub lambda0_bracket: (f64, f64),
    /// `[L0, L+, L-]`.
    pub shifted_roots: [C64; 3],
    /// `[a, b, c]`.
    pub cubic: [f64; 3],
    /// `(L0 + a)^2 - 4 (L0^2 + a L0 + b)`.
    pub discriminant: f64,
    pub branch: Branch,
    pub method: CubicMethod,
}

impl SpectrumReport {
    pub fn values(&self) -> [C64; 4] {
        self.eigenvalues.map(|e| e.value)
    }
}

/// Coefficients `[a, b, c]` of the relaxation cubic.
pub fn relaxation_cubic(m: &AtomModel) -> [f64; 3] {
    let s = m.half_rate();
    let d2 = m.splitting().powi(2);
    [s, d2 + 4.0 * m.gamma().norm_sqr(), d2 * s]
}

pub fn spectrum(l: &Liouvillian) -> Result<SpectrumReport, LiouvillianError> {
    let m = l.require_atom()?;
    let [a, b, c] = relaxation_cubic(m);
    let poly = Polynomial::from_real(&[c, b, a, 1.0]);
    let bracket = (-a, 0.0);
    let roots = solve_cubic_in(&poly, bracket.0, bracket.1)?;

    let shift = m.half_rate();
    let r0 = roots.real_root;
    let quad_const = r0 * r0 + a * r0 + b;
    let linear = r0 + a;
    let scale = linear * linear + 4.0 * quad_const.abs();
    let disc = roots.quadratic_discriminant;
    let branch = if disc.abs() <= 1e-12 * scale || quad_const <= 0.0 {
        Branch::Degenerate
    } else if disc > 0.0 {
        Branch::Real
    } else {
        Branch::ComplexPair
    };

    let pair_class = if roots.plus.im == 0.0 {
        EigenClass::RealNegative
    } else {
        EigenClass::ComplexPairMember
    };
    let shifted = |z: C64| z - shift;
    let eigenvalues = [
        ClassifiedEigenvalue {
            value: C64::new(0.0, 0.0),
            class: EigenClass::TrivialZero,
        },
        ClassifiedEigenvalue {
            value: C64::new(r0 - shift, 0.0),
            class: EigenClass::RealNegative,
        },
        ClassifiedEigenvalue {
            value: shifted(roots.plus),
            class: pair_class,
        },
        ClassifiedEigenvalue {
            value: shifted(roots.minus),
            class: pair_class,
        },
    ];
    Ok(SpectrumReport {
        eigenvalues,
        lambda0_bracket: bracket,
        shifted_roots: [C64::new(r0, 0.0), roots.plus, roots.minus],
        cubic: [a, b, c],
        discriminant: disc,
        branch,
        method: roots.method,
    })
}

/// Relative separation below which two eigenvalues are treated as equal.
pub const COLLISION_TOL: f64 = 1e-8;

/// Eigenvectors of `W^T` as the columns of `O`, so that `W^T O = O D_W`.
#[derive(Debug, Clone, PartialEq)]
pub struct WtEigenbasis {
    /// Columns `|l1) = (1,0,0,1)`, `|l2)` (unit norm, largest entry real
    /// positive), `|l3)`, `|l4)` (last component scaled to 1).
    pub o: ComplexMatrix,
    pub eigenvalues: [C64; 4],
}

impl WtEigenbasis {
    pub fn diagonal(&self) -> ComplexMatrix {
        ComplexMatrix::from_diag(&self.eigenvalues)
    }
}

pub fn wt_eigenbasis(l: &Liouvillian) -> Result<WtEigenbasis, LiouvillianError> {
    let report = spectrum(l)?;
    let values = report.values();
    check_distinct(&values)?;

    let wt = l.matrix().transpose();
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut o = ComplexMatrix::zeros(4, 4);
    o.set_column(0, &[one, zero, zero, one]);

    let v2 = eigenvector_from_eigenvalue(&wt, values[1])?;
    o.set_column(1, &unit_with_real_peak(&v2));

    for k in 2..4 {
        let v = eigenvector_from_eigenvalue(&wt, values[k])?;
        let last = v[3];
        let col = if last.norm() > 1e-12 * vec_norm(&v) {
            v.iter().map(|&z| z / last).collect()
        } else {
            unit_with_real_peak(&v)
        };
        o.set_column(k, &col);
    }
    Ok(WtEigenbasis { o, eigenvalues: values })
}

pub(crate) fn check_distinct(values: &[C64]) -> Result<(), LiouvillianError> {
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if (values[i] - values[j]).norm() <= COLLISION_TOL * scale {
                return Err(LiouvillianError::DegenerateSpectrum {
                    first: i + 1,
                    second: j + 1,
                    value_a: values[i],
                    value_b: values[j],
                });
            }
        }
    }
    Ok(())
}

fn unit_with_real_peak(v: &[C64]) -> Vec<C64> {
    let peak = v
        .iter()
        .copied()
        .fold(C64::new(0.0, 0.0), |acc, z| if z.norm() > acc.norm() { z } else { acc });
    let phase = peak.conj() / peak.norm();
    let norm = vec_norm(v);
    v.iter().map(|&z| z * phase / norm).collect()
}
