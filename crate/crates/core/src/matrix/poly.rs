//! Polynomials, characteristic polynomials, and the real-cubic solver.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{eigenvalues, ComplexMatrix, MatrixError, Result};

/// Polynomial with complex coefficients in ascending degree order.
///
/// Trailing zero coefficients are trimmed on construction, so the leading
/// coefficient is nonzero unless this is the zero polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<C64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == C64::new(0.0, 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(C64::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut coeffs = vec![C64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![C64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= r * c;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == C64::new(0.0, 0.0)
    }

    pub fn leading(&self) -> C64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Evaluate at a real point using only the real parts of the coefficients.
    pub fn eval_real(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.re)
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::new(vec![C64::new(0.0, 0.0)]);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    /// Frobenius companion matrix of the monic normalisation.
    pub fn companion(&self) -> ComplexMatrix {
        let n = self.degree();
        let lead = self.leading();
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        for i in 0..n {
            m[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        m
    }

    /// All roots, as eigenvalues of the companion matrix.
    pub fn roots(&self) -> Result<Vec<C64>> {
        if self.degree() == 0 {
            return Ok(Vec::new());
        }
        eigenvalues(&self.companion())
    }
}

/// `det(x I - A)` by the Faddeev–LeVerrier recursion. Always monic of degree n.
pub fn char_poly(a: &ComplexMatrix) -> Result<Polynomial> {
    let n = a.ensure_square()?;
    let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
    coeffs[n] = C64::new(1.0, 0.0);
    let id = ComplexMatrix::identity(n);
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        m = &(a * &m) + &id.scale(coeffs[n - k + 1]);
        let am = a * &m;
        coeffs[n - k] = -am.trace() / k as f64;
    }
    // The recursion is exact in the leading term; keep it monic even when a
    // lower coefficient underflows to zero.
    Ok(Polynomial { coeffs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CubicMethod {
    /// Sign-change bracket, bisection, then deflation to a quadratic.
    Bracketed,
    /// Cardano's formula for the real root, then the same deflation.
    Cardano,
}

/// Roots of a real monic cubic factored as `(x - r0)(x^2 + (r0 + a)x + (r0^2 + a r0 + b))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicRoots {
    /// The real root used for deflation.
    pub real_root: f64,
    /// Roots of the deflated quadratic, larger real part (or positive imaginary part) first.
    pub plus: C64,
    pub minus: C64,
    /// Discriminant `(r0+a)^2 - 4(r0^2 + a r0 + b)` of the deflated quadratic.
    pub quadratic_discriminant: f64,
    pub method: CubicMethod,
    /// Bracket that contained `real_root`, when bracketing was used.
    pub bracket: Option<(f64, f64)>,
}

impl CubicRoots {
    pub fn all(&self) -> [C64; 3] {
        [C64::new(self.real_root, 0.0), self.plus, self.minus]
    }
}

/// Solve a real cubic, bracketing the real root on `[-a, 0]` where `a` is
/// the quadratic coefficient of the monic form.
///
/// For the relaxation cubic of the two-level Liouvillian this interval always
/// holds a sign change. Other polynomials fall back to Cardano.
pub fn solve_cubic(p: &Polynomial) -> Result<CubicRoots> {
    let [_, _, a] = monic_real_cubic(p)?;
    solve_cubic_in(p, -a, 0.0)
}

/// Solve a real cubic using a caller-supplied bracket for the real root.
/// An invalid bracket (no sign change) falls back to Cardano.
pub fn solve_cubic_in(p: &Polynomial, lo: f64, hi: f64) -> Result<CubicRoots> {
    let coeffs = monic_real_cubic(p)?;
    let f = |x: f64| ((x + coeffs[2]) * x + coeffs[1]) * x + coeffs[0];

    let bracketed = if lo < hi && lo.is_finite() && hi.is_finite() {
        let (flo, fhi) = (f(lo), f(hi));
        if fhi == 0.0 {
            Some(hi)
        } else if flo == 0.0 {
            Some(lo)
        } else if flo.signum() != fhi.signum() {
            Some(bisect(&f, lo, hi, flo))
        } else {
            None
        }
    } else {
        None
    };

    let (root, method, bracket) = match bracketed {
        Some(r) => (r, CubicMethod::Bracketed, Some((lo, hi))),
        None => (cardano_real_root(coeffs), CubicMethod::Cardano, None),
    };
    let root = polish_real(&f, coeffs, root);
    Ok(deflate(coeffs, root, method, bracket))
}

/// Returns `[c0, c1, c2]` of the monic form `x^3 + c2 x^2 + c1 x + c0`.
fn monic_real_cubic(p: &Polynomial) -> Result<[f64; 3]> {
    if p.degree() != 3 {
        return Err(MatrixError::WrongDegree {
            expected: 3,
            found: p.degree(),
        });
    }
    if !p.is_real() {
        return Err(MatrixError::ComplexCoefficients);
    }
    let c = p.coeffs();
    let lead = c[3].re;
    Ok([c[0].re / lead, c[1].re / lead, c[2].re / lead])
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real root of a monic cubic by Cardano (one real root) or the
/// trigonometric form (three real roots, largest returned).
fn cardano_real_root([c0, c1, c2]: [f64; 3]) -> f64 {
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2.powi(3) / 27.0 - c2 * c1 / 3.0 + c0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let t = if p == 0.0 {
        (-q).cbrt()
    } else if disc > 0.0 {
        let s = disc.sqrt();
        (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()
    } else {
        let r = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        2.0 * r * (arg.acos() / 3.0).cos()
    };
    t - shift
}

fn polish_real(f: &impl Fn(f64) -> f64, [_, c1, c2]: [f64; 3], mut x: f64) -> f64 {
    for _ in 0..3 {
        let fx = f(x);
        let dfx = (3.0 * x + 2.0 * c2) * x + c1;
        if fx == 0.0 || dfx == 0.0 {
            break;
        }
        let next = x - fx / dfx;
        if f(next).abs() < fx.abs() {
            x = next;
        } else {
            break;
        }
    }
    x
}

fn deflate([c0, c1, c2]: [f64; 3], r0: f64, method: CubicMethod, bracket: Option<(f64, f64)>) -> CubicRoots {
    let b = r0 + c2;
    let c = r0 * r0 + c2 * r0 + c1;
    let disc = b * b - 4.0 * c;
    let (plus, minus) = if disc >= 0.0 {
        let s = disc.sqrt();
        let q = -0.5 * (b + if b >= 0.0 { s } else { -s });
        let (x1, x2) = if q == 0.0 { (0.0, -b) } else { (q, c / q) };
        let f = |x: f64| ((x + c2) * x + c1) * x + c0;
        let x1 = polish_real(&f, [c0, c1, c2], x1);
        let x2 = polish_real(&f, [c0, c1, c2], x2);
        (C64::new(x1.max(x2), 0.0), C64::new(x1.min(x2), 0.0))
    } else {
        let z = C64::new(-0.5 * b, 0.5 * (-disc).sqrt());
        let z = polish_complex([c0, c1, c2], z);
        (z, z.conj())
    };
    CubicRoots {
        real_root: r0,
        plus,
        minus,
        quadratic_discriminant: disc,
        method,
        bracket,
    }
}

fn polish_complex([c0, c1, c2]: [f64; 3], mut z: C64) -> C64 {
    let f = |z: C64| ((z + c2) * z + c1) * z + c0;
    for _ in 0..3 {
        let fz = f(z);
        let dfz = (z * 3.0 + 2.0 * c2) * z + c1;
        if fz.norm() == 0.0 || dfz.norm() == 0.0 {
            break;
        }
        let next = z - fz / dfz;
        if f(next).norm() < fz.norm() && next.im != 0.0 {
            z = next;
        } else {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn char_poly_of_zero_matrix() {
        let p = char_poly(&ComplexMatrix::zeros(2, 2)).unwrap();
        assert_eq!(
            p.coeffs(),
            &[C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
        );
    }

    #[test]
    fn char_poly_of_tridiagonal_exercise() {
        let a = ComplexMatrix::from_real_rows(&[[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]]);
        let p = char_poly(&a).unwrap();
        let expected = [-4.0, 10.0, -6.0, 1.0];
        for (c, e) in p.coeffs().iter().zip(expected) {
            assert!(close(*c, C64::new(e, 0.0), 1e-13), "{c} vs {e}");
        }
    }

    #[test]
    fn char_poly_rejects_non_square() {
        assert!(char_poly(&ComplexMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn from_roots_round_trip() {
        let roots = [C64::new(1.0, 2.0), C64::new(-0.5, 0.0), C64::new(3.0, -1.0)];
        let p = Polynomial::from_roots(&roots);
        for r in roots {
            assert!(p.eval(r).norm() < 1e-12);
        }
    }

    #[test]
    fn cube_roots_of_unity_via_cardano() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 0.0, 1.0]);
        let r = solve_cubic(&p).unwrap();
        assert_eq!(r.method, CubicMethod::Cardano);
        let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!((r.real_root - 1.0).abs() < 1e-15);
        assert!(close(r.plus, w, 1e-14));
        assert!(close(r.minus, w.conj(), 1e-14));
        assert_eq!(r.plus.conj(), r.minus);
    }

    #[test]
    fn three_real_roots_via_cardano() {
        // (x-1)(x-2)(x-3) has no sign change on [6, 0] (empty), so Cardano runs.
        let p = Polynomial::from_real(&[-6.0, 11.0, -6.0, 1.0]);
        let r = solve_cubic(&p).unwrap();
        assert_eq!(r.method, CubicMethod::Cardano);
        let mut all: Vec<f64> = r.all().iter().map(|z| z.re).collect();
        all.sort_by(f64::total_cmp);
        for (x, e) in all.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - e).abs() < 1e-12);
        }
        assert!(r.all().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn wrong_degree_is_rejected() {
        let p = Polynomial::from_real(&[1.0, 0.0, 1.0]);
        assert_eq!(
            solve_cubic(&p).unwrap_err(),
            MatrixError::WrongDegree { expected: 3, found: 2 }
        );
    }

    #[test]
    fn complex_coefficients_are_rejected() {
        let p = Polynomial::new(vec![
            C64::new(0.0, 1.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        ]);
        assert_eq!(solve_cubic(&p).unwrap_err(), MatrixError::ComplexCoefficients);
    }

    #[test]
    fn bracket_at_endpoint_root() {
        // x (x^2 + 2x + 4): root exactly at the upper end of [-2, 0].
        let p = Polynomial::from_real(&[0.0, 4.0, 2.0, 1.0]);
        let r = solve_cubic(&p).unwrap();
        assert_eq!(r.method, CubicMethod::Bracketed);
        assert_eq!(r.real_root, 0.0);
        assert!(close(r.plus, C64::new(-1.0, 3f64.sqrt()), 1e-14));
    }
}
