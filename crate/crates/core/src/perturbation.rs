//! Split-propagator approximation `e^{t(H^ + D^)} ~ e^{tD^} e^{tH^}`.
//!
//! `W` splits into a coherent part `H^ = -i(H kron 1 - 1 kron H^T)` and a
//! dissipative part `D^`. Both exponentials have closed forms: `e^{tD^}` acts
//! as `e^{tK}` with `K = [[-mu, nu], [mu, -nu]]` on the populations and as a
//! scalar decay on the coherences, and `e^{tH^} = e^{-itH} kron e^{itH^T}`.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::liouvillian::{Liouvillian, LiouvillianError};
use crate::matrix::{expm, ComplexMatrix, MatrixError};
use crate::model::{AtomModel, DensityMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerturbationError {
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error(transparent)]
    Liouvillian(#[from] LiouvillianError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// `W = h_hat + d_hat`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitGenerator {
    pub h_hat: ComplexMatrix,
    pub d_hat: ComplexMatrix,
}

pub fn split(l: &Liouvillian) -> Result<SplitGenerator, PerturbationError> {
    let m = l.require_atom()?;
    Ok(split_model(m))
}

pub(crate) fn split_model(m: &AtomModel) -> SplitGenerator {
    let i = C64::new(0.0, 1.0);
    let g = m.gamma();
    let gb = g.conj();
    let d = m.splitting();
    let s = m.half_rate();
    let z = C64::new(0.0, 0.0);
    let re = |x: f64| C64::new(x, 0.0);
    let h_hat = ComplexMatrix::from_rows(&[
        [z, i * gb, -i * g, z],
        [i * g, C64::new(0.0, d), z, -i * g],
        [-i * gb, z, C64::new(0.0, -d), i * gb],
        [z, -i * gb, i * g, z],
    ]);
    let d_hat = ComplexMatrix::from_rows(&[
        [re(-m.mu()), z, z, re(m.nu())],
        [z, re(-s), z, z],
        [z, z, re(-s), z],
        [re(m.mu()), z, z, re(-m.nu())],
    ]);
    SplitGenerator { h_hat, d_hat }
}

/// `e^{tK}` for the population generator `K = [[-mu, nu], [mu, -nu]]`.
pub fn population_propagator(mu: f64, nu: f64, t: f64) -> [[f64; 2]; 2] {
    let total = mu + nu;
    let x = (-t * total).exp();
    [
        [(nu + mu * x) / total, (nu - nu * x) / total],
        [(mu - mu * x) / total, (mu + nu * x) / total],
    ]
}

/// Closed-form `e^{tD^}`.
pub fn exp_dissipative(m: &AtomModel, t: f64) -> Result<ComplexMatrix, PerturbationError> {
    if !(t >= 0.0) {
        return Err(PerturbationError::NegativeTime(t));
    }
    let k = population_propagator(m.mu(), m.nu(), t);
    let coh = (-t * m.half_rate()).exp();
    Ok(dissipative_embedding(k, coh))
}

/// `lim_{t -> inf} e^{tD^} = (1/(mu+nu)) [[nu,0,0,nu],[0..],[0..],[mu,0,0,mu]]`.
pub fn dissipative_limit(m: &AtomModel) -> ComplexMatrix {
    let total = m.mu() + m.nu();
    let (p, q) = (m.nu() / total, m.mu() / total);
    dissipative_embedding([[p, p], [q, q]], 0.0)
}

fn dissipative_embedding(k: [[f64; 2]; 2], coherence: f64) -> ComplexMatrix {
    let mut e = ComplexMatrix::zeros(4, 4);
    e[(0, 0)] = C64::new(k[0][0], 0.0);
    e[(0, 3)] = C64::new(k[0][1], 0.0);
    e[(3, 0)] = C64::new(k[1][0], 0.0);
    e[(3, 3)] = C64::new(k[1][1], 0.0);
    e[(1, 1)] = C64::new(coherence, 0.0);
    e[(2, 2)] = C64::new(coherence, 0.0);
    e
}

/// Pieces of `e^{tH^}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentFactors {
    /// `[[a11, a12], [a21, a22]] = exp(-it [[-delta_minus, g], [conj(g), delta_minus]])`.
    pub a: [[C64; 2]; 2],
    /// `e^{-itH} kron e^{itH^T}`.
    pub exp_th: ComplexMatrix,
    /// First row `c11..c14` of `exp_th`.
    pub c_top: [C64; 4],
    /// Last row `c41..c44` of `exp_th`.
    pub c_bottom: [C64; 4],
    /// `(E1 + E0) / 2`
    pub delta_plus: f64,
    /// `(E1 - E0) / 2`
    pub delta_minus: f64,
}

impl CoherentFactors {
    /// `|a11|^2 + |a12|^2`, one for a unitary factor.
    pub fn unitarity(&self) -> f64 {
        self.a[0][0].norm_sqr() + self.a[0][1].norm_sqr()
    }

    /// `[c11+c41, c12+c42, c13+c43, c14+c44]`; equals `[1, 0, 0, 1]`.
    pub fn column_sums(&self) -> [C64; 4] {
        std::array::from_fn(|k| self.c_top[k] + self.c_bottom[k])
    }

    /// `e^{-itH}` including the common phase `e^{-it delta_plus}`.
    pub fn forward(&self, t: f64) -> ComplexMatrix {
        let phase = C64::from_polar(1.0, -t * self.delta_plus);
        ComplexMatrix::from_rows(&self.a).scale(phase)
    }

    /// `e^{itH^T}` including the common phase `e^{it delta_plus}`.
    pub fn backward_transposed(&self, t: f64) -> ComplexMatrix {
        let phase = C64::from_polar(1.0, t * self.delta_plus);
        let [[a11, a12], [a21, a22]] = self.a;
        ComplexMatrix::from_rows(&[[a22, -a21], [-a12, a11]]).scale(phase)
    }
}

pub fn exp_coherent(m: &AtomModel, t: f64) -> CoherentFactors {
    let delta_plus = 0.5 * (m.e1() + m.e0());
    let delta_minus = 0.5 * (m.e1() - m.e0());
    let g = m.gamma();
    let omega = (delta_minus * delta_minus + g.norm_sqr()).sqrt();
    let cos = (t * omega).cos();
    // sin(t w) / w, continuous at w = 0
    let sinc = if omega == 0.0 { t } else { (t * omega).sin() / omega };
    let i = C64::new(0.0, 1.0);
    let a11 = C64::new(cos, sinc * delta_minus);
    let a12 = -i * g * sinc;
    let a21 = -i * g.conj() * sinc;
    let a22 = C64::new(cos, -sinc * delta_minus);
    let a = [[a11, a12], [a21, a22]];

    // The e^{-+ it delta_plus} phases cancel in the product.
    let left = ComplexMatrix::from_rows(&a);
    let right = ComplexMatrix::from_rows(&[[a22, -a21], [-a12, a11]]);
    let exp_th = left.kron(&right);
    let c_top = std::array::from_fn(|k| exp_th[(0, k)]);
    let c_bottom = std::array::from_fn(|k| exp_th[(3, k)]);
    CoherentFactors {
        a,
        exp_th,
        c_top,
        c_bottom,
        delta_plus,
        delta_minus,
    }
}

/// Both closed-form factors at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorFactors {
    pub exp_td: ComplexMatrix,
    pub coherent: CoherentFactors,
}

pub fn propagator_factors(m: &AtomModel, t: f64) -> Result<PropagatorFactors, PerturbationError> {
    Ok(PropagatorFactors {
        exp_td: exp_dissipative(m, t)?,
        coherent: exp_coherent(m, t),
    })
}

/// `e^{tD^} e^{tH^} Psi(0)`.
pub fn approx_evolve(l: &Liouvillian, rho0: &DensityMatrix, t: f64) -> Result<Vec<C64>, PerturbationError> {
    let m = l.require_atom()?;
    if rho0.dim() != 2 {
        return Err(LiouvillianError::DimensionMismatch {
            expected: 2,
            found: rho0.dim(),
        }
        .into());
    }
    approx_evolve_vec(m, &rho0.vectorize(), t)
}

pub(crate) fn approx_evolve_vec(m: &AtomModel, psi0: &[C64], t: f64) -> Result<Vec<C64>, PerturbationError> {
    let f = propagator_factors(m, t)?;
    Ok(f.exp_td.mul_vec(&f.coherent.exp_th.mul_vec(psi0)))
}

/// `(nu |0><0| + mu |1><1|) / (mu + nu)`, the long-time limit of the split
/// propagator for any initial state.
pub fn asymptotic_mixture(m: &AtomModel) -> DensityMatrix {
    let total = m.mu() + m.nu();
    DensityMatrix::new(ComplexMatrix::from_real_rows(&[
        [m.nu() / total, 0.0],
        [0.0, m.mu() / total],
    ]))
    .expect("diagonal mixture is a valid state")
}

/// Errors of successive product-formula truncations against `e^{t(A+B)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZassenhausErrors {
    /// `|| e^{t(A+B)} - e^{tB} e^{tA} ||`, `O(t^2)`.
    pub first_order: f64,
    /// `|| e^{t(A+B)} - e^{t^2/2 [A,B]} e^{tB} e^{tA} ||`, `O(t^3)`.
    pub second_order: f64,
    /// With the `e^{-t^3/6 (2[[A,B],B] + [[A,B],A])}` factor also applied, `O(t^4)`.
    pub third_order: f64,
}

/// Frobenius-norm errors of the Zassenhaus product with corrections
/// multiplying `e^{tB} e^{tA}` from the left.
pub fn zassenhaus_check(a: &ComplexMatrix, b: &ComplexMatrix, t: f64) -> Result<ZassenhausErrors, PerturbationError> {
    a.ensure_square()?;
    if a.shape() != b.shape() {
        return Err(MatrixError::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        }
        .into());
    }
    let exact = expm(&(a + b), t)?;
    let base = &expm(b, t)? * &expm(a, t)?;
    let ab = a.commutator(b);
    let second = &expm(&ab, 0.5 * t * t)? * &base;
    let cubic = &ab.commutator(b).scale_re(2.0) + &ab.commutator(a);
    let third = &expm(&cubic, -t * t * t / 6.0)? * &second;
    Ok(ZassenhausErrors {
        first_order: (&exact - &base).norm_fro(),
        second_order: (&exact - &second).norm_fro(),
        third_order: (&exact - &third).norm_fro(),
    })
}
