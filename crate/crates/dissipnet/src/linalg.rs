//! Dense complex helpers shared by the solver modules.

use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::{c64, Mat};

use crate::error::{Error, Result};

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

static SEQUENTIAL: Once = Once::new();

/// Decompositions run single-threaded; parallelism lives one level up.
pub(crate) fn ensure_sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

pub fn real(x: f64) -> c64 {
    c64::new(x, 0.0)
}

pub fn kron(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    let (p, q) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * p, a.ncols() * q, |r, c| {
        a[(r / p, c / q)] * b[(r % p, c % q)]
    })
}

pub fn adjoint(a: &Mat<c64>) -> Mat<c64> {
    a.adjoint().to_owned()
}

pub fn scale(a: &Mat<c64>, k: c64) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * k)
}

pub fn trace(a: &Mat<c64>) -> c64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

pub fn frobenius(a: &Mat<c64>) -> f64 {
    a.norm_l2()
}

pub fn max_abs(a: &Mat<c64>) -> f64 {
    a.norm_max()
}

/// Induced 1-norm (largest absolute column sum).
pub fn one_norm(a: &Mat<c64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn hermitian_part(a: &Mat<c64>) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

pub fn hermiticity_defect(a: &Mat<c64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Column-stacking vectorization: entry (i, j) goes to i + j*d.
pub fn vectorize(a: &Mat<c64>) -> Mat<c64> {
    let d = a.nrows();
    Mat::from_fn(d * a.ncols(), 1, |k, _| a[(k % d, k / d)])
}

pub fn unvectorize(v: &Mat<c64>, d: usize) -> Mat<c64> {
    Mat::from_fn(d, d, |i, j| v[(i + j * d, 0)])
}

pub fn matvec(a: &Mat<c64>, v: &[c64]) -> Vec<c64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * v[j]).sum())
        .collect()
}

pub fn outer(v: &[c64]) -> Mat<c64> {
    Mat::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
}

pub fn eigenvalues(a: &Mat<c64>) -> Result<Vec<c64>> {
    ensure_sequential();
    a.eigenvalues().map_err(|e| Error::Eigen(format!("{e:?}")))
}

/// Eigenvalues and right eigenvectors (as columns).
pub fn eigen(a: &Mat<c64>) -> Result<(Vec<c64>, Mat<c64>)> {
    ensure_sequential();
    let evd = a.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let values = evd.S().column_vector().iter().copied().collect();
    Ok((values, evd.U().to_owned()))
}

pub fn hermitian_eigenvalues(a: &Mat<c64>) -> Result<Vec<f64>> {
    ensure_sequential();
    hermitian_part(a)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}

pub fn singular_values(a: &Mat<c64>) -> Result<Vec<f64>> {
    ensure_sequential();
    a.singular_values().map_err(|e| Error::Eigen(format!("{e:?}")))
}

pub fn solve(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    ensure_sequential();
    a.partial_piv_lu().solve(b)
}

pub fn inverse(a: &Mat<c64>) -> Mat<c64> {
    solve(a, &Mat::identity(a.nrows(), a.nrows()))
}

// Padé coefficients b_0..b_m for degrees 3, 5, 7, 9, 13 and the matching
// 1-norm thresholds (Higham 2005).
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [f64; 4] = [
    1.495585217958292e-2,
    2.539398330063230e-1,
    9.504178996162932e-1,
    2.097847961257068e0,
];
const THETA13: f64 = 5.371920351148152;

fn axpy_identity(acc: &mut Mat<c64>, k: f64) {
    for i in 0..acc.nrows() {
        acc[(i, i)] += real(k);
    }
}

fn add_scaled(acc: &mut Mat<c64>, m: &Mat<c64>, k: f64) {
    for j in 0..acc.ncols() {
        for i in 0..acc.nrows() {
            acc[(i, j)] += m[(i, j)] * k;
        }
    }
}

/// Low-degree Padé numerator/denominator pieces U (odd) and V (even).
fn pade_low(a: &Mat<c64>, b: &[f64]) -> (Mat<c64>, Mat<c64>) {
    let n = a.nrows();
    let a2 = a * a;
    let mut powers = vec![Mat::<c64>::identity(n, n), a2.clone()];
    while 2 * powers.len() < b.len() {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut u_inner = Mat::<c64>::zeros(n, n);
    let mut v = Mat::<c64>::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        if 2 * k + 1 < b.len() {
            add_scaled(&mut u_inner, p, b[2 * k + 1]);
        }
        add_scaled(&mut v, p, b[2 * k]);
    }
    (a * &u_inner, v)
}

fn pade13(a: &Mat<c64>) -> (Mat<c64>, Mat<c64>) {
    let n = a.nrows();
    let b = &PADE13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let mut w1 = Mat::<c64>::zeros(n, n);
    add_scaled(&mut w1, &a6, b[13]);
    add_scaled(&mut w1, &a4, b[11]);
    add_scaled(&mut w1, &a2, b[9]);
    let mut w2 = Mat::<c64>::zeros(n, n);
    add_scaled(&mut w2, &a6, b[7]);
    add_scaled(&mut w2, &a4, b[5]);
    add_scaled(&mut w2, &a2, b[3]);
    axpy_identity(&mut w2, b[1]);
    let u = a * &(&(&a6 * &w1) + &w2);
    let mut z1 = Mat::<c64>::zeros(n, n);
    add_scaled(&mut z1, &a6, b[12]);
    add_scaled(&mut z1, &a4, b[10]);
    add_scaled(&mut z1, &a2, b[8]);
    let mut z2 = Mat::<c64>::zeros(n, n);
    add_scaled(&mut z2, &a6, b[6]);
    add_scaled(&mut z2, &a4, b[4]);
    add_scaled(&mut z2, &a2, b[2]);
    axpy_identity(&mut z2, b[0]);
    let v = &(&a6 * &z1) + &z2;
    (u, v)
}

/// Matrix exponential by scaling and squaring with a Padé approximant.
pub fn expm(a: &Mat<c64>) -> Mat<c64> {
    ensure_sequential();
    let n = a.nrows();
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    let norm = one_norm(a);
    let tables: [&[f64]; 4] = [&PADE3, &PADE5, &PADE7, &PADE9];
    for (theta, b) in THETA.iter().zip(tables) {
        if norm <= *theta {
            let (u, v) = pade_low(a, b);
            return pade_ratio(&u, &v);
        }
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = scale(a, real(2f64.powi(-squarings)));
    let (u, v) = pade13(&scaled);
    let mut r = pade_ratio(&u, &v);
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

fn pade_ratio(u: &Mat<c64>, v: &Mat<c64>) -> Mat<c64> {
    solve(&(v - u), &(v + u))
}
