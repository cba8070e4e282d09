//! `n`-level generalization and the asymptotic-pattern experiment.
//!
//! Each coupled transition `(j, k)`, `j < k`, carries a drive `gamma_jk` in
//! `H` and a pair of jump operators: `|k><j|` at rate `mu_jk` and `|j><k|` at
//! rate `nu_jk`. For one transition on two levels this is exactly the qubit
//! generator. The `Collective` family instead sums all transitions into one
//! jump operator per direction, with amplitudes `sqrt(rate)`.
//!
//! The experiment computes `lim e^{tW}` and asks whether its nonzero columns
//! sit only at the vectorized diagonal positions `k (n + 1)` and coincide,
//! i.e. whether every initial basis state relaxes to the same limit.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::liouvillian::{coherent_generator, lindblad_term, trace_row, Liouvillian, Source};
use crate::matrix::{eigenvalues, expm, null_space, vec_dot, vec_norm, ComplexMatrix, MatrixError};
use crate::model::AtomModel;
use crate::numerics::DEFAULT_TOL;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NLevelError {
    #[error("need at least two levels, got {0}")]
    TooFewLevels(usize),
    #[error("energies must be finite and non-decreasing (index {0})")]
    Energies(usize),
    #[error("transition {index}: levels ({lower}, {upper}) must satisfy lower < upper < n")]
    BadTransition { index: usize, lower: usize, upper: usize },
    #[error("transition {index}: levels ({lower}, {upper}) listed twice")]
    DuplicateTransition { index: usize, lower: usize, upper: usize },
    #[error("transition {index}: {field} must be positive, got {value}")]
    NonPositiveRate {
        index: usize,
        field: &'static str,
        value: f64,
    },
    #[error("transition {index}: gamma must be finite")]
    NonFiniteCoupling { index: usize },
    #[error("steady state is not unique: zero eigenvalue has multiplicity {0}")]
    NotUnique(usize),
    #[error("a nonzero eigenvalue has non-negative real part ({0})")]
    NotRelaxing(C64),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub lower: usize,
    pub upper: usize,
    pub gamma: C64,
    pub mu: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DissipatorFamily {
    /// One pair of jump operators per transition.
    #[default]
    PerTransition,
    /// `L_mu = sum sqrt(mu_jk) |k><j|`, `L_nu = sum sqrt(nu_jk) |j><k|`.
    Collective,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NLevelModel {
    energies: Vec<f64>,
    transitions: Vec<Transition>,
    family: DissipatorFamily,
}

impl NLevelModel {
    pub fn new(
        energies: Vec<f64>,
        transitions: Vec<Transition>,
        family: DissipatorFamily,
    ) -> Result<Self, NLevelError> {
        let n = energies.len();
        if n < 2 {
            return Err(NLevelError::TooFewLevels(n));
        }
        for (k, e) in energies.iter().enumerate() {
            if !e.is_finite() || (k > 0 && *e < energies[k - 1]) {
                return Err(NLevelError::Energies(k));
            }
        }
        for (index, t) in transitions.iter().enumerate() {
            let (lower, upper) = (t.lower, t.upper);
            if lower >= upper || upper >= n {
                return Err(NLevelError::BadTransition { index, lower, upper });
            }
            if transitions[..index]
                .iter()
                .any(|o| o.lower == lower && o.upper == upper)
            {
                return Err(NLevelError::DuplicateTransition { index, lower, upper });
            }
            for (field, value) in [("mu", t.mu), ("nu", t.nu)] {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(NLevelError::NonPositiveRate { index, field, value });
                }
            }
            if !(t.gamma.re.is_finite() && t.gamma.im.is_finite()) {
                return Err(NLevelError::NonFiniteCoupling { index });
            }
        }
        Ok(Self {
            energies,
            transitions,
            family,
        })
    }

    /// Nearest-neighbour chain `0-1-...-(n-1)` with shared parameters.
    pub fn ladder(energies: Vec<f64>, gamma: C64, mu: f64, nu: f64) -> Result<Self, NLevelError> {
        let transitions = (1..energies.len())
            .map(|k| Transition {
                lower: k - 1,
                upper: k,
                gamma,
                mu,
                nu,
            })
            .collect();
        Self::new(energies, transitions, DissipatorFamily::PerTransition)
    }

    pub fn from_atom(m: &AtomModel) -> Self {
        Self {
            energies: vec![m.e0(), m.e1()],
            transitions: vec![Transition {
                lower: 0,
                upper: 1,
                gamma: m.gamma(),
                mu: m.mu(),
                nu: m.nu(),
            }],
            family: DissipatorFamily::PerTransition,
        }
    }

    pub fn n(&self) -> usize {
        self.energies.len()
    }
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }
    pub fn family(&self) -> DissipatorFamily {
        self.family
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        let n = self.n();
        let mut h = ComplexMatrix::from_diag(&self.energies.iter().map(|&e| C64::new(e, 0.0)).collect::<Vec<_>>());
        for t in &self.transitions {
            h[(t.lower, t.upper)] += t.gamma;
            h[(t.upper, t.lower)] += t.gamma.conj();
        }
        debug_assert_eq!(h.rows(), n);
        h
    }
}

fn ket_bra(n: usize, row: usize, col: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(row, col)] = C64::new(1.0, 0.0);
    m
}

pub fn build_nlevel_w(m: &NLevelModel) -> Liouvillian {
    let n = m.n();
    let mut w = coherent_generator(&m.hamiltonian());
    match m.family {
        DissipatorFamily::PerTransition => {
            for t in &m.transitions {
                w = &w + &lindblad_term(&ket_bra(n, t.upper, t.lower), t.mu);
                w = &w + &lindblad_term(&ket_bra(n, t.lower, t.upper), t.nu);
            }
        }
        DissipatorFamily::Collective => {
            let mut up = ComplexMatrix::zeros(n, n);
            let mut down = ComplexMatrix::zeros(n, n);
            for t in &m.transitions {
                up[(t.upper, t.lower)] += C64::new(t.mu.sqrt(), 0.0);
                down[(t.lower, t.upper)] += C64::new(t.nu.sqrt(), 0.0);
            }
            w = &w + &lindblad_term(&up, 1.0);
            w = &w + &lindblad_term(&down, 1.0);
        }
    }
    Liouvillian::from_parts(n, w, Source::NLevel(m.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjectureOptions {
    /// Propagation horizon; defaults to `50 / gap`.
    pub t_horizon: Option<f64>,
    /// Relative threshold for the pattern and state-equality flags.
    pub tol: f64,
}

impl Default for ConjectureOptions {
    fn default() -> Self {
        Self {
            t_horizon: None,
            tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureReport {
    pub n: usize,
    pub t_horizon: f64,
    /// Smallest `|Re lambda|` over nonzero eigenvalues.
    pub gap: f64,
    /// `e^{t_horizon W}`.
    pub limit_matrix: ComplexMatrix,
    /// Largest column norm outside the diagonal positions, over `||limit||_F`.
    pub max_pattern_violation: f64,
    /// Largest distance between two diagonal-position columns.
    pub max_state_discrepancy: f64,
    /// `max |limit - v (1,..,1 on diagonal)|` with `v` the normalized null vector.
    pub projector_discrepancy: f64,
    pub pattern_pass: bool,
    pub equal_final_states_pass: bool,
    /// Common limit state (first diagonal-position column), vectorized.
    pub final_state: Vec<C64>,
}

pub fn check_conjecture(m: &NLevelModel, opts: &ConjectureOptions) -> Result<ConjectureReport, NLevelError> {
    let l = build_nlevel_w(m);
    conjecture_for(&l, opts)
}

pub(crate) fn conjecture_for(l: &Liouvillian, opts: &ConjectureOptions) -> Result<ConjectureReport, NLevelError> {
    let n = l.n();
    let w = l.matrix();
    let dim = n * n;

    let kernel = null_space(w);
    if kernel.len() != 1 {
        return Err(NLevelError::NotUnique(kernel.len()));
    }
    let mut ev = eigenvalues(w)?;
    ev.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let zero_tol = DEFAULT_TOL * w.norm_fro().max(1.0);
    let multiplicity = ev.iter().filter(|z| z.norm() <= zero_tol).count();
    if multiplicity > 1 {
        return Err(NLevelError::NotUnique(multiplicity));
    }
    let nonzero = &ev[1..];
    if let Some(bad) = nonzero.iter().find(|z| z.re >= 0.0) {
        return Err(NLevelError::NotRelaxing(*bad));
    }
    let gap = nonzero.iter().map(|z| -z.re).fold(f64::INFINITY, f64::min);
    let t_horizon = opts.t_horizon.unwrap_or(50.0 / gap);
    let limit = expm(w, t_horizon)?;

    let functional = trace_row(n);
    let v = &kernel[0];
    let weight = vec_dot(&functional, v);
    let steady: Vec<C64> = v.iter().map(|&z| z / weight).collect();
    let projector = ComplexMatrix::from_fn(dim, dim, |i, j| steady[i] * functional[j]);
    let projector_discrepancy = limit.max_abs_diff(&projector);

    let diagonal: Vec<usize> = (0..n).map(|k| k * (n + 1)).collect();
    let scale = limit.norm_fro();
    let mut max_pattern_violation: f64 = 0.0;
    for j in (0..dim).filter(|j| !diagonal.contains(j)) {
        max_pattern_violation = max_pattern_violation.max(vec_norm(&limit.column(j)) / scale);
    }
    let first = limit.column(0);
    let mut max_state_discrepancy: f64 = 0.0;
    for &j in &diagonal[1..] {
        let col = limit.column(j);
        let d: f64 = col
            .iter()
            .zip(&first)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        max_state_discrepancy = max_state_discrepancy.max(d);
    }
    let equal_final_states_pass = max_state_discrepancy <= opts.tol;
    Ok(ConjectureReport {
        n,
        t_horizon,
        gap,
        limit_matrix: limit,
        max_pattern_violation,
        max_state_discrepancy,
        projector_discrepancy,
        pattern_pass: max_pattern_violation <= opts.tol && equal_final_states_pass,
        equal_final_states_pass,
        final_state: first,
    })
}
