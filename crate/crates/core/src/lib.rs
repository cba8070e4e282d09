//! Exact and perturbative analysis of the Lindblad master equation for a
//! driven two-level atom, with an N-level probe of the asymptotic-state
//! structure.
//!
//! Density matrices are vectorized row-major throughout, so a 2x2 state
//! `[[a, b], [conj(b), d]]` becomes `(a, b, conj(b), d)`. Every superoperator
//! in this crate acts on that ordering.

pub mod cli;
pub mod liouvillian;
pub mod matrix;
pub mod model;
pub mod nlevel;
pub mod numerics;
pub mod perturbation;
pub mod special;
pub mod steady;

pub use matrix::ComplexMatrix;
pub use num_complex::Complex64 as C64;
