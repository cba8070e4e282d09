//! Closed forms for degenerate levels, `E1 == E0`.
//!
//! The cubic factors as `L (L^2 + (mu+nu)/2 L + 4|g|^2)`, which gives
//! `lambda = 0, -(mu+nu)/2, -3(mu+nu)/4 +- sqrt(disc)/2` with
//! `disc = ((mu+nu)/2)^2 - 16|g|^2`. The eigenvectors of `W^T` are written
//! out below. They are checked against the eigen-equation, not trusted.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::liouvillian::{build_w, check_distinct, spectrum, wt_eigenbasis, LiouvillianError};
use crate::matrix::{eigenvector_from_eigenvalue, vec_dot, vec_norm, ComplexMatrix, MatrixError};
use crate::model::AtomModel;

/// Closed-form denominators smaller than this are treated as vanishing.
pub const DENOMINATOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialCaseError {
    #[error("closed forms need e0 == e1, got e0 = {e0}, e1 = {e1}")]
    NotDegenerateLevels { e0: f64, e1: f64 },
    #[error("discriminant vanishes, lambda3 == lambda4")]
    ZeroDiscriminant,
    #[error(transparent)]
    Liouvillian(#[from] LiouvillianError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecialCaseSolution {
    /// `[0, -(mu+nu)/2, lambda3, lambda4]`.
    pub eigenvalues: [C64; 4],
    /// Round kets of `W^T`, in the same order.
    pub eigenvectors: [Vec<C64>; 4],
    /// `((mu+nu)/2)^2 - 16|g|^2`.
    pub discriminant: f64,
    /// `true` at index `k` if the closed form for `|l_k)` had a vanishing
    /// denominator (or vanished itself) and the generic construction was used.
    pub fallback: [bool; 4],
}

impl SpecialCaseSolution {
    /// `|| W^T v - lambda v || / (||W^T|| ||v||)` for each pair.
    pub fn residuals(&self, wt: &ComplexMatrix) -> [f64; 4] {
        let scale = wt.norm_fro().max(1.0);
        std::array::from_fn(|k| {
            let v = &self.eigenvectors[k];
            let wv = wt.mul_vec(v);
            let diff: Vec<C64> = wv.iter().zip(v).map(|(&a, &b)| a - b * self.eigenvalues[k]).collect();
            vec_norm(&diff) / (scale * vec_norm(v))
        })
    }
}

pub fn special_spectrum(m: &AtomModel) -> Result<SpecialCaseSolution, SpecialCaseError> {
    if !m.is_degenerate() {
        return Err(SpecialCaseError::NotDegenerateLevels { e0: m.e0(), e1: m.e1() });
    }
    let (mu, nu) = (m.mu(), m.nu());
    let g = m.gamma();
    let total = mu + nu;
    let disc = (0.5 * total).powi(2) - 16.0 * g.norm_sqr();
    if disc == 0.0 {
        return Err(SpecialCaseError::ZeroDiscriminant);
    }
    let root = C64::new(disc, 0.0).sqrt();
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);

    let eigenvalues = [
        zero,
        C64::new(-0.5 * total, 0.0),
        -0.75 * total + 0.5 * root,
        -0.75 * total - 0.5 * root,
    ];

    let closed = |sign: f64| -> Option<Vec<C64>> {
        let inner = (mu - 7.0 * nu) / 4.0 + sign * 0.5 * root;
        let outer = -total / 4.0 + sign * 0.5 * root;
        if inner.norm() <= DENOMINATOR_TOL || outer.norm() <= DENOMINATOR_TOL {
            return None;
        }
        let mid = (-one + (mu - nu) / inner) / outer;
        Some(vec![
            -one + 2.0 * (mu - nu) / inner,
            2.0 * i * g.conj() * mid,
            -2.0 * i * g * mid,
            one,
        ])
    };
    let second = vec![zero, g.conj(), g, zero];

    let candidates = [
        Some(vec![one, zero, zero, one]),
        (g != zero).then_some(second),
        closed(1.0),
        closed(-1.0),
    ];

    let wt = build_w(m).matrix().transpose();
    let mut fallback = [false; 4];
    let mut eigenvectors: [Vec<C64>; 4] = Default::default();
    for (k, cand) in candidates.into_iter().enumerate() {
        eigenvectors[k] = match cand {
            Some(v) => v,
            None => {
                fallback[k] = true;
                eigenvector_from_eigenvalue(&wt, eigenvalues[k])?
            }
        };
    }
    Ok(SpecialCaseSolution {
        eigenvalues,
        eigenvectors,
        discriminant: disc,
        fallback,
    })
}

/// Agreement between the closed forms and the generic spectrum machinery.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialCrossCheck {
    pub max_eigenvalue_discrepancy: f64,
    /// Largest sine of the angle between matching eigenvector lines.
    pub max_subspace_angle: f64,
    pub residuals: [f64; 4],
    pub fallback: [bool; 4],
    pub pass: bool,
}

pub const CROSS_CHECK_TOL: f64 = 1e-8;

pub fn cross_check_special(m: &AtomModel) -> Result<SpecialCrossCheck, SpecialCaseError> {
    let sol = special_spectrum(m)?;
    check_distinct(&sol.eigenvalues)?;
    let l = build_w(m);
    let generic = spectrum(&l)?.values();
    let basis = wt_eigenbasis(&l)?;

    let mut max_ev: f64 = 0.0;
    let mut max_angle: f64 = 0.0;
    for (k, &lam) in sol.eigenvalues.iter().enumerate() {
        let (j, dist) = generic
            .iter()
            .enumerate()
            .map(|(j, z)| (j, (z - lam).norm()))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        max_ev = max_ev.max(dist);
        let other = basis.o.column(j);
        max_angle = max_angle.max(line_angle(&sol.eigenvectors[k], &other));
    }
    let residuals = sol.residuals(&l.matrix().transpose());
    let worst = residuals.iter().copied().fold(max_ev.max(max_angle), f64::max);
    Ok(SpecialCrossCheck {
        max_eigenvalue_discrepancy: max_ev,
        max_subspace_angle: max_angle,
        residuals,
        fallback: sol.fallback,
        pass: worst <= CROSS_CHECK_TOL,
    })
}

/// Sine of the angle between the complex lines spanned by `u` and `v`.
fn line_angle(u: &[C64], v: &[C64]) -> f64 {
    let (nu, nv) = (vec_norm(u), vec_norm(v));
    let cos = (vec_dot(u, v).norm() / (nu * nv)).min(1.0);
    // sin via the orthogonal remainder; stable for nearly parallel lines
    let proj = vec_dot(v, u) / (nv * nv);
    let rest: Vec<C64> = u.iter().zip(v).map(|(&a, &b)| a - b * proj).collect();
    let sin = vec_norm(&rest) / nu;
    if cos > 0.5 {
        sin
    } else {
        (1.0 - cos * cos).sqrt()
    }
}
