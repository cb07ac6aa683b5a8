#![allow(dead_code)]

use dissipnet::c64;
use dissipnet::lindblad::{DensityMatrix, LindbladModel};
use dissipnet::operators::{HilbertSpace, Operator};
use proptest::prelude::*;

pub fn cplx() -> impl Strategy<Value = c64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| c64::new(re, im))
}

pub fn matrix_entries(d: usize) -> impl Strategy<Value = Vec<c64>> {
    proptest::collection::vec(cplx(), d * d)
}

pub fn op_from(space: &HilbertSpace, entries: &[c64]) -> Operator {
    let d = space.total_dim();
    Operator::from_fn(space, |i, j| entries[i * d + j])
}

pub fn hermitian_from(space: &HilbertSpace, entries: &[c64]) -> Operator {
    let a = op_from(space, entries);
    (&a + &a.adjoint()).scale_re(0.5)
}

/// `A A^dag / Tr` for a random `A`: a full-rank-ish valid state.
pub fn state_from(space: &HilbertSpace, entries: &[c64]) -> DensityMatrix {
    let a = op_from(space, entries);
    let m = &a * &a.adjoint();
    let t = m.trace().re;
    let m = m.scale_re(1.0 / t);
    let h = (&m + &m.adjoint()).scale_re(0.5);
    DensityMatrix::new(space.clone(), h.into_matrix()).expect("valid state")
}

/// Random two-qubit model: Hermitian H and two collapse operators.
pub fn random_model(entries: &[c64]) -> LindbladModel {
    let space = HilbertSpace::qubits(2);
    let h = hermitian_from(&space, &entries[..16]);
    let l1 = op_from(&space, &entries[16..32]);
    let l2 = op_from(&space, &entries[32..48]);
    LindbladModel::new(h, vec![l1, l2]).expect("valid model")
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
