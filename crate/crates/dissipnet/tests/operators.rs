mod common;

use common::*;
use dissipnet::c64;
use dissipnet::operators::*;
use dissipnet::Error;
use proptest::prelude::*;

fn sorted_re(mut v: Vec<c64>) -> Vec<f64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re));
    v.into_iter().map(|z| z.re).collect()
}

#[test]
fn lowering_maps_excited_to_ground() {
    let sm = qubit_op(QubitOp::Lower);
    let space = HilbertSpace::qubit();
    let excited = space.basis_state(&[1]).unwrap();
    let ground = space.basis_state(&[0]).unwrap();
    assert_eq!(sm.apply(&excited).unwrap(), ground);
    assert!(sm.apply(&ground).unwrap().iter().all(|z| z.norm() == 0.0));
}

#[test]
fn pauli_z_spectrum() {
    let ev = sorted_re(qubit_op(QubitOp::Z).eigenvalues().unwrap());
    assert!(close(ev[0], -1.0, 1e-14) && close(ev[1], 1.0, 1e-14));
}

#[test]
fn raise_is_adjoint_of_lower() {
    let d = qubit_op(QubitOp::Raise).distance(&qubit_op(QubitOp::Lower).adjoint()).unwrap();
    assert_eq!(d, 0.0);
}

#[test]
fn two_level_truncation() {
    let a = bosonic_annihilator(2).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let expected = if (i, j) == (0, 1) { 1.0 } else { 0.0 };
            assert_eq!(a.get(i, j), c64::new(expected, 0.0));
        }
    }
}

#[test]
fn truncated_canonical_commutator() {
    let a = bosonic_annihilator(4).unwrap();
    let comm = a.commutator(&a.adjoint()).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let expected = match (i, j) {
                (3, 3) => -3.0,
                _ if i == j => 1.0,
                _ => 0.0,
            };
            assert!((comm.get(i, j) - c64::new(expected, 0.0)).norm() < 1e-12, "({i},{j})");
        }
    }
}

#[test]
fn number_operator_on_fock_state() {
    let a = bosonic_annihilator(5).unwrap();
    let n = &a.adjoint() * &a;
    let two = a.space().basis_state(&[2]).unwrap();
    let out = n.apply(&two).unwrap();
    for (o, t) in out.iter().zip(&two) {
        assert!((o - t * 2.0).norm() < 1e-12);
    }
}

#[test]
fn truncation_below_two_rejected() {
    assert_eq!(bosonic_annihilator(1).unwrap_err(), Error::InvalidTruncation(1));
}

#[test]
fn spaces_need_dims_of_at_least_two() {
    assert!(matches!(HilbertSpace::new(vec![2, 1]), Err(Error::InvalidSpace(_))));
    assert_eq!(HilbertSpace::new(vec![2, 3, 4]).unwrap().total_dim(), 24);
}

#[test]
fn embed_identity_is_identity() {
    let space = HilbertSpace::new(vec![2, 3, 2]).unwrap();
    let id3 = Operator::identity(&HilbertSpace::new(vec![3]).unwrap());
    let e = embed(&id3, &space, 1).unwrap();
    assert_eq!(e.distance(&Operator::identity(&space)).unwrap(), 0.0);
}

#[test]
fn embedded_lowerings_commute_and_act_independently() {
    let space = HilbertSpace::qubits(2);
    let s1 = embed(&qubit_op(QubitOp::Lower), &space, 0).unwrap();
    let s2 = embed(&qubit_op(QubitOp::Lower), &space, 1).unwrap();
    assert_eq!(s1.commutator(&s2).unwrap().frobenius_norm(), 0.0);
    let both_excited = space.basis_state(&[1, 1]).unwrap();
    let both_ground = space.basis_state(&[0, 0]).unwrap();
    assert_eq!((&s1 * &s2).apply(&both_excited).unwrap(), both_ground);
}

#[test]
fn first_site_varies_slowest() {
    let space = HilbertSpace::new(vec![2, 3]).unwrap();
    assert_eq!(space.index_of(&[1, 0]).unwrap(), 3);
    assert_eq!(space.index_of(&[0, 2]).unwrap(), 2);
}

#[test]
fn embed_errors() {
    let space = HilbertSpace::qubits(2);
    assert_eq!(
        embed(&qubit_op(QubitOp::Z), &space, 2).unwrap_err(),
        Error::SiteOutOfRange { site: 2, n_sites: 2 }
    );
    let a = bosonic_annihilator(3).unwrap();
    assert_eq!(embed(&a, &space, 0).unwrap_err(), Error::DimensionMismatch { expected: 2, got: 3 });
}

#[test]
fn arithmetic_across_spaces_is_an_error() {
    let a = Operator::identity(&HilbertSpace::qubits(2));
    let b = Operator::identity(&HilbertSpace::new(vec![4]).unwrap());
    assert!(matches!(a.try_add(&b), Err(Error::SpaceMismatch { .. })));
    assert!(matches!(a.try_mul(&b), Err(Error::SpaceMismatch { .. })));
}

#[test]
fn normalized_rejects_zero() {
    assert!(normalized(&[c64::new(0.0, 0.0); 3]).is_err());
}

proptest! {
    #[test]
    fn embedding_repeats_spectrum(entries in matrix_entries(3), site in 0usize..3) {
        let local_space = HilbertSpace::new(vec![3]).unwrap();
        let local = hermitian_from(&local_space, &entries);
        let mut dims = vec![2, 2, 2];
        dims[site] = 3;
        let space = HilbertSpace::new(dims).unwrap();
        let big = sorted_re(embed(&local, &space, site).unwrap().eigenvalues().unwrap());
        let small = sorted_re(local.eigenvalues().unwrap());
        let repeated: Vec<f64> = small.iter().flat_map(|&x| std::iter::repeat_n(x, 4)).collect();
        for (a, b) in big.iter().zip(&repeated) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn adjoint_of_product_reverses(a in matrix_entries(4), b in matrix_entries(4)) {
        let space = HilbertSpace::qubits(2);
        let (a, b) = (op_from(&space, &a), op_from(&space, &b));
        let lhs = (&a * &b).adjoint();
        let rhs = &b.adjoint() * &a.adjoint();
        prop_assert!(lhs.distance(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn embedding_is_multiplicative(a in matrix_entries(2), b in matrix_entries(2), site in 0usize..3) {
        let q = HilbertSpace::qubit();
        let (a, b) = (op_from(&q, &a), op_from(&q, &b));
        let space = HilbertSpace::new(vec![2, 2, 2]).unwrap();
        let lhs = embed(&(&a * &b), &space, site).unwrap();
        let rhs = &embed(&a, &space, site).unwrap() * &embed(&b, &space, site).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() < 1e-12);
    }
}
