//! Matrix exponential by scaling and squaring around a truncated Taylor core.

use super::{ComplexMatrix, MatrixError, Result};

/// After scaling, `||tA / 2^s||_1 <= SCALED_NORM`.
const SCALED_NORM: f64 = 0.5;

/// Taylor order. With the scaled norm at most 0.5 the first dropped term is
/// bounded by 0.5^15 / 15! < 3e-17, well under the 1e-13 target.
const TAYLOR_ORDER: usize = 14;

/// `e^{tA}`.
pub fn expm(a: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let n = a.ensure_square()?;
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    if t == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    if !t.is_finite() {
        return Err(MatrixError::NonFinite);
    }

    let norm = a.norm_one() * t.abs();
    let squarings = if norm > SCALED_NORM {
        (norm / SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    let x = a.scale_re(t / 2f64.powi(squarings));

    // Horner: I + X(I + X/2(I + X/3(...)))
    let id = ComplexMatrix::identity(n);
    let mut acc = id.clone();
    for k in (1..=TAYLOR_ORDER).rev() {
        acc = &id + &(&x * &acc).scale_re(1.0 / k as f64);
    }

    for _ in 0..squarings {
        acc = &acc * &acc;
    }

    if acc.is_finite() {
        Ok(acc)
    } else {
        Err(MatrixError::NonFinite)
    }
}
