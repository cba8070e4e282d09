mod common;

use common::{c, oracle_eigenvalues};
use lindblad::liouvillian::{build_w, dissipator, spectrum};
use lindblad::matrix::{char_poly, eigenvector_from_eigenvalue, expm, vec_norm, ComplexMatrix};
use lindblad::model::{hamiltonian, hamiltonian_spectrum, AtomModel, DensityMatrix};
use lindblad::perturbation::{approx_evolve, exp_coherent, exp_dissipative};
use lindblad::C64;
use proptest::prelude::*;

fn complex_in_disk() -> impl Strategy<Value = C64> {
    (0.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, th)| C64::from_polar(r, th))
}

fn matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(complex_in_disk(), n * n).prop_map(move |v| ComplexMatrix::from_vec(n, n, v))
}

fn atom() -> impl Strategy<Value = AtomModel> {
    (
        -1.0..1.0f64,
        1e-3..2.0f64,
        1e-3..2.0f64,
        0.0..std::f64::consts::TAU,
        1e-3..2.0f64,
        1e-3..2.0f64,
    )
        .prop_map(|(e0, split, g, phase, mu, nu)| {
            AtomModel::new(e0, e0 + split, C64::from_polar(g, phase), mu, nu).unwrap()
        })
}

fn state() -> impl Strategy<Value = DensityMatrix> {
    (0.0..1.0f64, complex_in_disk()).prop_map(|(p, z)| {
        // |b|^2 <= a d keeps the matrix positive
        let b = z * (p * (1.0 - p)).sqrt();
        DensityMatrix::new(ComplexMatrix::from_rows(&[[c(p, 0.0), b], [b.conj(), c(1.0 - p, 0.0)]])).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn expm_semigroup(a in matrix(4), s in 0.0..1.0f64, t in 0.0..1.0f64) {
        let a = a.scale_re(2.0 / a.norm_fro().max(1.0));
        let lhs = expm(&a, s + t).unwrap();
        let rhs = &expm(&a, s).unwrap() * &expm(&a, t).unwrap();
        let bound = 1e-10 * ((s + t) * a.norm_fro()).exp();
        prop_assert!(lhs.max_abs_diff(&rhs) <= bound);
    }

    #[test]
    fn kron_mixed_product(a in matrix(2), b in matrix(2), cc in matrix(2), d in matrix(2)) {
        let lhs = &a.kron(&b) * &cc.kron(&d);
        let rhs = (&a * &cc).kron(&(&b * &d));
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn char_poly_vanishes_at_oracle_eigenvalues(a in matrix(4)) {
        let p = char_poly(&a).unwrap();
        prop_assert_eq!(p.degree(), 4);
        for z in oracle_eigenvalues(&a) {
            prop_assert!(p.eval(z).norm() <= 1e-9, "residual {}", p.eval(z).norm());
        }
    }

    #[test]
    fn eigenvectors_of_wt_have_small_residual(m in atom()) {
        let l = build_w(&m);
        let wt = l.matrix().transpose();
        for lam in spectrum(&l).unwrap().values() {
            let v = eigenvector_from_eigenvalue(&wt, lam).unwrap();
            let r: Vec<C64> = wt.mul_vec(&v).iter().zip(&v).map(|(a, b)| a - b * lam).collect();
            prop_assert!(vec_norm(&r) / vec_norm(&v) <= 1e-9);
        }
    }

    #[test]
    fn hamiltonian_trace_and_determinant(m in atom()) {
        let s = hamiltonian_spectrum(&m);
        prop_assert!((s.upper + s.lower - m.e0() - m.e1()).abs() <= 1e-12);
        let det = m.e0() * m.e1() - m.gamma().norm_sqr();
        prop_assert!((s.upper * s.lower - det).abs() <= 1e-12 * (1.0 + det.abs()));
        let h = hamiltonian(&m);
        let hv = h.mul_vec(&s.lower_ket[..]);
        let r: Vec<C64> = hv.iter().zip(&s.lower_ket).map(|(a, b)| a - b * s.lower).collect();
        prop_assert!(vec_norm(&r) <= 1e-10);
        prop_assert!((vec_norm(&s.lower_ket[..]) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn dissipator_is_traceless_and_hermitian(m in atom(), rho in state()) {
        let d = dissipator(&m, &rho).unwrap();
        prop_assert!(d.trace().norm() <= 1e-15);
        prop_assert!(d.hermiticity_defect() <= 1e-15);
    }

    #[test]
    fn w_matches_commutator_plus_dissipator(m in atom(), rho in state()) {
        let h = hamiltonian(&m);
        let comm = &(&h * rho.matrix()) - &(rho.matrix() * &h);
        let direct = &comm.scale(c(0.0, -1.0)) + &dissipator(&m, &rho).unwrap();
        let via_w = build_w(&m).apply(rho.matrix()).unwrap();
        prop_assert!(via_w.max_abs_diff(&direct) <= 1e-14);
    }

    #[test]
    fn dissipative_factor_semigroup(m in atom(), s in 0.0..5.0f64, t in 0.0..5.0f64) {
        let lhs = exp_dissipative(&m, s + t).unwrap();
        let rhs = &exp_dissipative(&m, s).unwrap() * &exp_dissipative(&m, t).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-11);
    }

    #[test]
    fn coherent_factor_keeps_trace_and_hermiticity(m in atom(), t in 0.0..10.0f64, rho in state()) {
        let f = exp_coherent(&m, t);
        let row = f.exp_th.vec_mul(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        prop_assert!((row[0] - 1.0).norm() <= 1e-12 && row[1].norm() <= 1e-12);
        prop_assert!(row[2].norm() <= 1e-12 && (row[3] - 1.0).norm() <= 1e-12);
        let out = f.exp_th.mul_vec(&rho.vectorize());
        prop_assert!((out[1] - out[2].conj()).norm() <= 1e-12);
    }

    #[test]
    fn split_propagator_preserves_trace(m in atom(), t in 0.0..20.0f64, rho in state()) {
        let psi = approx_evolve(&build_w(&m), &rho, t).unwrap();
        prop_assert!((psi[0] + psi[3] - 1.0).norm() <= 1e-10);
    }
}

#[test]
fn cubic_bracket_holds_over_many_draws() {
    use lindblad::cli::DrawRanges;
    use lindblad::liouvillian::relaxation_cubic;
    use lindblad::matrix::Polynomial;

    let ranges = DrawRanges {
        splitting: (1e-3, 2.0),
        gamma_abs: (1e-3, 2.0),
        rate: (1e-3, 2.0),
    };
    for m in common::atoms(11, 1000, &ranges) {
        let s = m.half_rate();
        let [a, b, cc] = relaxation_cubic(&m);
        let f = Polynomial::from_real(&[cc, b, a, 1.0]);
        assert!(f.eval_real(0.0) > 0.0 && f.eval_real(-s) < 0.0);
        let report = spectrum(&build_w(&m)).unwrap();
        let l0 = report.shifted_roots[0].re;
        assert!(l0 > -s && l0 < 0.0);
        for z in report.shifted_roots {
            assert!(f.eval(z).norm() <= 1e-9 * (1.0 + z.norm().powi(3)));
        }
    }
}

#[test]
fn three_roots_can_share_the_bracket() {
    // Weak splitting, moderate drive, fast decay: all roots of the cubic fall
    // in (-s, 0), so the bracket pins down existence, not uniqueness.
    let m = AtomModel::new(0.0, 0.0576, c(0.2494, 0.0), 1.3416, 1.2947).unwrap();
    let s = m.half_rate();
    let r = spectrum(&build_w(&m)).unwrap();
    for z in r.shifted_roots {
        assert_eq!(z.im, 0.0);
        assert!(z.re > -s && z.re < 0.0, "{z}");
    }
}
