mod common;

use common::*;
use dissipnet::c64;
use dissipnet::lindblad::DensityMatrix;
use dissipnet::metrics::*;
use dissipnet::models::analytic_steady_state;
use dissipnet::operators::{normalized, HilbertSpace, Operator};
use dissipnet::Error;
use proptest::prelude::*;

fn pair() -> HilbertSpace {
    HilbertSpace::qubits(2)
}

fn pure(psi: &[c64]) -> DensityMatrix {
    DensityMatrix::from_pure(pair(), psi).unwrap()
}

fn werner(p: f64) -> DensityMatrix {
    pure(&singlet()).mix(&DensityMatrix::maximally_mixed(pair()), p).unwrap()
}

/// Unitary from a random complex matrix via Gram-Schmidt on its columns.
fn unitary(entries: &[c64]) -> Operator {
    let q = HilbertSpace::qubit();
    let mut cols: Vec<[c64; 2]> = vec![[entries[0], entries[2]], [entries[1], entries[3]]];
    let n0 = (cols[0][0].norm_sqr() + cols[0][1].norm_sqr()).sqrt();
    cols[0] = [cols[0][0] / n0, cols[0][1] / n0];
    let proj = cols[0][0].conj() * cols[1][0] + cols[0][1].conj() * cols[1][1];
    cols[1] = [cols[1][0] - proj * cols[0][0], cols[1][1] - proj * cols[0][1]];
    let n1 = (cols[1][0].norm_sqr() + cols[1][1].norm_sqr()).sqrt();
    cols[1] = [cols[1][0] / n1, cols[1][1] / n1];
    Operator::from_fn(&q, |i, j| cols[j][i])
}

#[test]
fn bell_and_product_states() {
    assert!(close(concurrence(&pure(&singlet())).unwrap(), 1.0, 1e-12));
    assert!(close(concurrence(&pure(&triplet())).unwrap(), 1.0, 1e-12));
    let product = normalized(&[c64::new(1.0, 0.0), c64::new(0.5, 0.2), c64::new(0.3, 0.0), c64::new(0.15, 0.06)]).unwrap();
    assert!(concurrence(&pure(&product)).unwrap() < 1e-7);
}

/// Werner states have `C = max(0, (3p - 1) / 2)`.
#[test]
fn werner_states() {
    for p in [0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0] {
        let expected = ((3.0 * p - 1.0) / 2.0f64).max(0.0);
        assert!(close(concurrence(&werner(p)).unwrap(), expected, 1e-9), "p={p}");
    }
}

#[test]
fn dark_state_concurrence_formula() {
    let (psi, c) = analytic_steady_state(1.0, 1.0).unwrap();
    assert!(close(c, 2.0 / 3.0, 1e-15));
    assert!(close(concurrence(&pure(&psi)).unwrap(), 2.0 / 3.0, 1e-10));
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        for j in 0..4 {
            let delta = -1.0 + 0.5 * i as f64;
            let alpha = 0.2 + 0.6 * j as f64;
            let (psi, c) = analytic_steady_state(delta, alpha).unwrap();
            assert!(close(c, 2.0 * alpha * alpha / (delta * delta + 2.0 * alpha * alpha), 1e-15));
            worst = worst.max((concurrence(&pure(&psi)).unwrap() - c).abs());
        }
    }
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn fidelity_and_purity_limits() {
    let mixed = DensityMatrix::maximally_mixed(pair());
    assert!(close(state_fidelity(&pure(&singlet()), &singlet()).unwrap(), 1.0, 1e-14));
    assert!(close(state_fidelity(&mixed, &triplet()).unwrap(), 0.25, 1e-14));
    assert!(close(purity(&pure(&triplet())), 1.0, 1e-14));
    assert!(close(purity(&mixed), 0.25, 1e-14));
}

#[test]
fn bell_fidelity_absorbs_the_relative_phase() {
    assert!(close(bell_fidelity(&pure(&triplet())).unwrap(), 1.0, 1e-14));
    assert!(close(state_fidelity(&pure(&triplet()), &singlet()).unwrap(), 0.0, 1e-14));
    assert!(close(bell_fidelity(&werner(0.6)).unwrap(), 0.6 + 0.1, 1e-12));
}

#[test]
fn metric_errors() {
    let three = HilbertSpace::new(vec![2, 3]).unwrap();
    assert!(matches!(concurrence(&DensityMatrix::maximally_mixed(three)), Err(Error::InvalidState(_))));
    let rho = pure(&singlet());
    assert_eq!(state_fidelity(&rho, &[c64::new(1.0, 0.0)]).unwrap_err(), Error::DimensionMismatch { expected: 4, got: 1 });
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn local_unitaries_preserve_concurrence(r in matrix_entries(4), u1 in matrix_entries(2), u2 in matrix_entries(2)) {
        let rho = state_from(&pair(), &r);
        let u = unitary(&u1).kron(&unitary(&u2));
        let rotated = &(&u * &Operator::new(pair(), rho.matrix().clone()).unwrap()) * &u.adjoint();
        let rotated = (&rotated + &rotated.adjoint()).scale_re(0.5);
        let rotated = DensityMatrix::new(pair(), rotated.into_matrix()).unwrap();
        prop_assert!((concurrence(&rho).unwrap() - concurrence(&rotated).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn concurrence_is_convex(a in matrix_entries(4), b in matrix_entries(4), p in 0.0f64..1.0) {
        let (r1, r2) = (state_from(&pair(), &a), state_from(&pair(), &b));
        let mix = r1.mix(&r2, p).unwrap();
        let bound = p * concurrence(&r1).unwrap() + (1.0 - p) * concurrence(&r2).unwrap();
        prop_assert!(concurrence(&mix).unwrap() <= bound + 1e-9);
    }

    #[test]
    fn metrics_stay_in_range(r in matrix_entries(4), t in proptest::collection::vec(cplx(), 4)) {
        let rho = state_from(&pair(), &r);
        let c = concurrence(&rho).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
        if let Ok(target) = normalized(&t) {
            let f = state_fidelity(&rho, &target).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        }
        let pu = purity(&rho);
        prop_assert!(pu >= 0.25 - 1e-12 && pu <= 1.0 + 1e-10);
    }

    #[test]
    fn pure_state_closed_form(v in proptest::collection::vec(cplx(), 4)) {
        prop_assume!(v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3);
        let psi = normalized(&v).unwrap();
        let expected = 2.0 * (psi[0] * psi[3] - psi[1] * psi[2]).norm();
        prop_assert!((concurrence(&pure(&psi)).unwrap() - expected).abs() <= 1e-10);
    }
}
