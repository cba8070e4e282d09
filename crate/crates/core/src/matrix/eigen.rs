//! Eigenvalues, eigenvectors from known eigenvalues, and null spaces.

use num_complex::Complex64 as C64;

use super::{vec_dot, vec_norm, ComplexMatrix, MatrixError, Result};
use crate::numerics::DEFAULT_TOL;

const ZERO: C64 = C64::new(0.0, 0.0);

/// All eigenvalues of a square matrix, by Householder reduction to
/// Hessenberg form followed by shifted complex QR sweeps.
///
/// Order is the order in which eigenvalues deflate and carries no meaning.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = a.ensure_square()?;
    if !a.is_finite() {
        return Err(MatrixError::NonFinite);
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(a);
    let mut eig = vec![ZERO; n];
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    let max_iter = 60 * n;

    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // Locate the start of the active unreduced block.
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let reference = if diag == 0.0 { scale } else { diag };
            if sub <= f64::EPSILON * reference {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }

        iter += 1;
        total += 1;
        if total > max_iter {
            return Err(MatrixError::NoConvergence { iterations: total });
        }

        let shift = if iter % 11 == 10 {
            // Exceptional shift to break symmetric stalls.
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_sweep(&mut h, l, hi, shift);
    }
    Ok(eig)
}

fn hessenberg(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = vec_norm(&x);
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let mut v = x;
        v[0] += phase * xnorm;
        let vnorm = vec_norm(&v);
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vnorm);

        // H <- (I - 2 v v^H) H
        for j in 0..n {
            let s: C64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)]).sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= *vi * s * 2.0;
            }
        }
        // H <- H (I - 2 v v^H)
        for i in 0..n {
            let s: C64 = v.iter().enumerate().map(|(j, vj)| h[(i, k + 1 + j)] * vj).sum();
            for (j, vj) in v.iter().enumerate() {
                h[(i, k + 1 + j)] -= s * vj.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

/// Eigenvalue of the trailing 2x2 block closest to its last diagonal entry.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det * 4.0).sqrt();
    let e1 = (tr + disc) * 0.5;
    let e2 = (tr - disc) * 0.5;
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

/// One explicit shifted QR step on the Hessenberg block `l..=hi`.
fn qr_sweep(h: &mut ComplexMatrix, l: usize, hi: usize, shift: C64) {
    for k in l..=hi {
        h[(k, k)] -= shift;
    }
    let mut rotations = Vec::with_capacity(hi - l);
    for k in l..hi {
        let x = h[(k, k)];
        let y = h[(k + 1, k)];
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (C64::new(1.0, 0.0), ZERO)
        } else {
            (x / r, y / r)
        };
        for j in k..=hi {
            let hk = h[(k, j)];
            let hk1 = h[(k + 1, j)];
            h[(k, j)] = c.conj() * hk + s.conj() * hk1;
            h[(k + 1, j)] = -s * hk + c * hk1;
        }
        rotations.push((c, s));
    }
    for (offset, (c, s)) in rotations.into_iter().enumerate() {
        let k = l + offset;
        for i in l..=(k + 1).min(hi) {
            let hk = h[(i, k)];
            let hk1 = h[(i, k + 1)];
            h[(i, k)] = hk * c + hk1 * s;
            h[(i, k + 1)] = -hk * s.conj() + hk1 * c.conj();
        }
    }
    for k in l..=hi {
        h[(k, k)] += shift;
    }
}

/// Unnormalized eigenvector ("round ket") for a known eigenvalue, built from
/// an `(n-1)`-row sub-system of `(lambda I - A) v = 0`.
///
/// One component `v_f` is left free and the remaining components solve the
/// `(n-1) x (n-1)` system picked out by a row subset. The result is scaled by
/// the sub-determinant `D`, so that `v_f = D` and no division is needed; for
/// `n = 3` with rows 1, 2 and `z` free this is the familiar
/// `((lambda-b2)c1 + b1 c2, a2 c1 + (lambda-a1)c2, (lambda-a1)(lambda-b2) - a2 b1)`.
///
/// Every (free component, row subset) pair is tried, last component and
/// leading rows first; the first one with the largest `|D|` wins.
pub fn eigenvector_from_eigenvalue(a: &ComplexMatrix, lambda: C64) -> Result<Vec<C64>> {
    eigenvector_from_eigenvalue_tol(a, lambda, DEFAULT_TOL)
}

pub fn eigenvector_from_eigenvalue_tol(a: &ComplexMatrix, lambda: C64, tol: f64) -> Result<Vec<C64>> {
    let n = a.ensure_square()?;
    if n == 1 {
        let residual = (a[(0, 0)] - lambda).norm() / a.max_abs().max(1.0);
        return if residual <= tol {
            Ok(vec![C64::new(1.0, 0.0)])
        } else {
            Err(MatrixError::NotAnEigenvalue { residual })
        };
    }
    let shifted = &ComplexMatrix::identity(n).scale(lambda) - a;
    let scale = shifted.max_abs().max(f64::MIN_POSITIVE);

    let mut best: Option<(f64, Vec<C64>)> = None;
    for free in (0..n).rev() {
        let cols: Vec<usize> = (0..n).filter(|&j| j != free).collect();
        for excluded in (0..n).rev() {
            let rows: Vec<usize> = (0..n).filter(|&i| i != excluded).collect();
            let sub = shifted.select(&rows, &cols);
            let d = sub.determinant()?;
            if d.norm() <= best.as_ref().map_or(0.0, |b| b.0) {
                continue;
            }
            let rhs: Vec<C64> = rows.iter().map(|&r| -shifted[(r, free)]).collect();
            let Ok(x) = sub.solve(&rhs) else { continue };
            let mut v = Vec::with_capacity(n);
            let mut it = x.into_iter();
            for j in 0..n {
                v.push(if j == free { d } else { it.next().unwrap() * d });
            }
            best = Some((d.norm(), v));
        }
    }

    let Some((dmax, v)) = best else {
        return Err(MatrixError::DegenerateSubdeterminant);
    };
    if dmax <= tol * scale.powi(n as i32 - 1) {
        // Rank of (lambda I - A) is below n-1 unless lambda is not an
        // eigenvalue at all, which the full determinant tells apart.
        let det = shifted.determinant()?.norm();
        if det > tol * scale.powi(n as i32) {
            return Err(MatrixError::NotAnEigenvalue {
                residual: det / scale.powi(n as i32),
            });
        }
        return Err(MatrixError::DegenerateSubdeterminant);
    }

    let av = a.mul_vec(&v);
    let resid: f64 = av
        .iter()
        .zip(&v)
        .map(|(x, y)| (x - lambda * y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let relative = resid / (a.norm_fro().max(lambda.norm()).max(f64::MIN_POSITIVE) * vec_norm(&v));
    if relative > tol {
        return Err(MatrixError::NotAnEigenvalue { residual: relative });
    }
    Ok(v)
}

/// Orthonormal basis of `{v : A v = 0}` via row reduction with partial
/// pivoting. Pivots below `1e-9 * max|A|` count as zero.
pub fn null_space(a: &ComplexMatrix) -> Vec<Vec<C64>> {
    null_space_tol(a, DEFAULT_TOL)
}

pub fn null_space_tol(a: &ComplexMatrix, tol: f64) -> Vec<Vec<C64>> {
    let (rows, cols) = a.shape();
    let threshold = tol * a.max_abs();
    let mut r = a.clone();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let (p, pmax) = (row..rows)
            .map(|i| (i, r[(i, col)].norm()))
            .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pmax <= threshold {
            for i in row..rows {
                r[(i, col)] = ZERO;
            }
            continue;
        }
        if p != row {
            for j in 0..cols {
                let tmp = r[(row, j)];
                r[(row, j)] = r[(p, j)];
                r[(p, j)] = tmp;
            }
        }
        let pivot = r[(row, col)];
        for j in 0..cols {
            r[(row, j)] /= pivot;
        }
        for i in 0..rows {
            if i == row {
                continue;
            }
            let f = r[(i, col)];
            if f == ZERO {
                continue;
            }
            for j in 0..cols {
                let x = r[(row, j)];
                r[(i, j)] -= f * x;
            }
        }
        pivots.push(col);
        row += 1;
    }

    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let raw: Vec<Vec<C64>> = free
        .iter()
        .map(|&fc| {
            let mut v = vec![ZERO; cols];
            v[fc] = C64::new(1.0, 0.0);
            for (prow, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[(prow, fc)];
            }
            v
        })
        .collect();
    orthonormalize(raw)
}

/// Modified Gram–Schmidt, two passes.
fn orthonormalize(vectors: Vec<Vec<C64>>) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        for _ in 0..2 {
            for q in &basis {
                let proj = vec_dot(q, &v);
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= proj * y;
                }
            }
        }
        let norm = vec_norm(&v);
        if norm > 0.0 {
            v.iter_mut().for_each(|z| *z /= norm);
            basis.push(v);
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::vec_max_diff;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn parallel(u: &[C64], v: &[C64]) -> bool {
        let overlap = vec_dot(u, v).norm();
        (overlap - vec_norm(u) * vec_norm(v)).abs() <= 1e-12 * vec_norm(u) * vec_norm(v)
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let a = ComplexMatrix::from_rows(&[
            [c(1.0, 0.0), c(2.0, 1.0), c(0.0, 3.0)],
            [c(0.0, 0.0), c(-2.0, 0.5), c(1.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.5, -1.0)],
        ]);
        let mut e = eigenvalues(&a).unwrap();
        e.sort_by(|x, y| x.re.total_cmp(&y.re));
        let expected = [c(-2.0, 0.5), c(0.5, -1.0), c(1.0, 0.0)];
        assert!(vec_max_diff(&e, &expected) < 1e-12);
    }

    #[test]
    fn eigenvalues_of_rotation() {
        let a = ComplexMatrix::from_real_rows(&[[0.0, -1.0], [1.0, 0.0]]);
        let mut e = eigenvalues(&a).unwrap();
        e.sort_by(|x, y| x.im.total_cmp(&y.im));
        assert!(vec_max_diff(&e, &[c(0.0, -1.0), c(0.0, 1.0)]) < 1e-14);
    }

    #[test]
    fn eigenvector_of_diagonal() {
        let a = ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, 2.0]]);
        let v = eigenvector_from_eigenvalue(&a, c(2.0, 0.0)).unwrap();
        assert!(parallel(&v, &[c(0.0, 0.0), c(1.0, 0.0)]));
    }

    #[test]
    fn eigenvector_of_tridiagonal_exercise() {
        let a = ComplexMatrix::from_real_rows(&[[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]]);
        let v = eigenvector_from_eigenvalue(&a, c(2.0, 0.0)).unwrap();
        // rows 1,2 with z free: D = -1, giving exactly (1, 0, -1)
        assert_eq!(v, vec![c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    }

    #[test]
    fn eigenvector_rejects_non_eigenvalue() {
        let a = ComplexMatrix::from_real_rows(&[[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]]);
        assert!(matches!(
            eigenvector_from_eigenvalue(&a, c(1.0, 0.0)),
            Err(MatrixError::NotAnEigenvalue { .. })
        ));
    }

    #[test]
    fn eigenvector_reports_degenerate_eigenspace() {
        let a = ComplexMatrix::from_real_rows(&[[3.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 1.0]]);
        assert_eq!(
            eigenvector_from_eigenvalue(&a, c(3.0, 0.0)),
            Err(MatrixError::DegenerateSubdeterminant)
        );
    }

    #[test]
    fn eigenvector_falls_back_to_other_rows() {
        // With rows 1,2 and z free the sub-determinant vanishes.
        let a = ComplexMatrix::from_real_rows(&[[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]]);
        let v = eigenvector_from_eigenvalue(&a, c(1.0, 0.0)).unwrap();
        assert_eq!(v, vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn null_space_of_identity_is_empty() {
        assert!(null_space(&ComplexMatrix::identity(2)).is_empty());
    }

    #[test]
    fn null_space_of_zero_is_everything() {
        let basis = null_space(&ComplexMatrix::zeros(2, 2));
        assert_eq!(basis.len(), 2);
        assert!(vec_dot(&basis[0], &basis[1]).norm() < 1e-15);
    }

    #[test]
    fn null_space_of_rank_one() {
        let a = ComplexMatrix::from_rows(&[[c(1.0, 0.0), c(0.0, 1.0)], [c(0.0, 2.0), c(-2.0, 0.0)]]);
        let basis = null_space(&a);
        assert_eq!(basis.len(), 1);
        assert!(vec_norm(&a.mul_vec(&basis[0])) < 1e-14);
        assert!((vec_norm(&basis[0]) - 1.0).abs() < 1e-14);
    }
}
