//! Tensor-product Hilbert spaces and dense operators.
//!
//! Basis convention, fixed here and used everywhere: a qubit's basis index 0
//! is the ground state and index 1 the excited state, so the lowering
//! operator is `|0><1|`. Subsystems are ordered slowest-varying first
//! (row-major Kronecker products). Build multi-site operators through
//! [`embed`] rather than by hand.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::linalg::{self, ONE, ZERO};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidSpace(format!("subsystem dimension {d} < 2")));
        }
        Ok(Self { dims })
    }

    pub fn qubit() -> Self {
        Self { dims: vec![2] }
    }

    pub fn qubits(n: usize) -> Self {
        Self { dims: vec![2; n] }
    }

    /// The zero-subsystem space (dimension 1), used for scalar triplets.
    pub fn trivial() -> Self {
        Self { dims: Vec::new() }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Tensor product, `self` first.
    pub fn tensor(&self, other: &HilbertSpace) -> HilbertSpace {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims }
    }

    /// Flat index of a product basis state given per-site indices.
    pub fn index_of(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                got: digits.len(),
            });
        }
        let mut idx = 0;
        for (&d, &k) in self.dims.iter().zip(digits) {
            if k >= d {
                return Err(Error::DimensionMismatch { expected: d, got: k });
            }
            idx = idx * d + k;
        }
        Ok(idx)
    }

    /// Product basis vector with the given per-site indices.
    pub fn basis_state(&self, digits: &[usize]) -> Result<Vec<c64>> {
        let mut v = vec![ZERO; self.total_dim()];
        v[self.index_of(digits)?] = ONE;
        Ok(v)
    }

    pub(crate) fn check_same(&self, other: &HilbertSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                left: self.dims.clone(),
                right: other.dims.clone(),
            })
        }
    }
}

impl fmt::Debug for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HilbertSpace{:?}", self.dims)
    }
}

#[derive(Clone, Debug)]
pub struct Operator {
    space: HilbertSpace,
    matrix: Mat<c64>,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: Mat<c64>) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        let d = space.total_dim();
        Self { space: space.clone(), matrix: Mat::zeros(d, d) }
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let d = space.total_dim();
        Self { space: space.clone(), matrix: Mat::identity(d, d) }
    }

    pub fn from_fn(space: &HilbertSpace, f: impl FnMut(usize, usize) -> c64) -> Self {
        let d = space.total_dim();
        Self { space: space.clone(), matrix: Mat::from_fn(d, d, f) }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat<c64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> c64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space.clone(), matrix: linalg::adjoint(&self.matrix) }
    }

    pub fn scale(&self, k: c64) -> Self {
        Self { space: self.space.clone(), matrix: linalg::scale(&self.matrix, k) }
    }

    pub fn scale_re(&self, k: f64) -> Self {
        self.scale(c64::new(k, 0.0))
    }

    pub fn try_add(&self, other: &Operator) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(Self { space: self.space.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(Self { space: self.space.clone(), matrix: &self.matrix - &other.matrix })
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(Self { space: self.space.clone(), matrix: &self.matrix * &other.matrix })
    }

    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        self.try_mul(other)?.try_sub(&other.try_mul(self)?)
    }

    /// Kronecker product on the tensor-product space, `self` first.
    pub fn kron(&self, other: &Operator) -> Self {
        Self {
            space: self.space.tensor(&other.space),
            matrix: linalg::kron(&self.matrix, &other.matrix),
        }
    }

    pub fn trace(&self) -> c64 {
        linalg::trace(&self.matrix)
    }

    pub fn frobenius_norm(&self) -> f64 {
        linalg::frobenius(&self.matrix)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn distance(&self, other: &Operator) -> Result<f64> {
        Ok(linalg::max_abs(&self.try_sub(other)?.matrix))
    }

    /// Frobenius inner product Tr(self† other).
    pub fn inner(&self, other: &Operator) -> Result<c64> {
        self.space.check_same(&other.space)?;
        let mut acc = ZERO;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                acc += self.matrix[(i, j)].conj() * other.matrix[(i, j)];
            }
        }
        Ok(acc)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn apply(&self, v: &[c64]) -> Result<Vec<c64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(linalg::matvec(&self.matrix, v))
    }

    pub fn eigenvalues(&self) -> Result<Vec<c64>> {
        linalg::eigenvalues(&self.matrix)
    }
}

fn expect_same(a: &Operator, b: &Operator) {
    if let Err(e) = a.space.check_same(&b.space) {
        panic!("operator arithmetic across spaces: {e}");
    }
}

// Operator overloads panic on mismatched spaces; the `try_*` methods return
// an error instead.
impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        expect_same(self, rhs);
        Operator { space: self.space.clone(), matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        expect_same(self, rhs);
        Operator { space: self.space.clone(), matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        expect_same(self, rhs);
        Operator { space: self.space.clone(), matrix: &self.matrix * &rhs.matrix }
    }
}

impl Mul<&Operator> for c64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale(self)
    }
}

impl Mul<&Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale_re(self)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_re(-1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitOp {
    Lower,
    Raise,
    Z,
    Identity,
}

pub fn qubit_op(kind: QubitOp) -> Operator {
    let space = HilbertSpace::qubit();
    let m = match kind {
        QubitOp::Lower => [[0.0, 1.0], [0.0, 0.0]],
        QubitOp::Raise => [[0.0, 0.0], [1.0, 0.0]],
        QubitOp::Z => [[-1.0, 0.0], [0.0, 1.0]],
        QubitOp::Identity => [[1.0, 0.0], [0.0, 1.0]],
    };
    Operator::from_fn(&space, |i, j| c64::new(m[i][j], 0.0))
}

/// Truncated annihilation operator with `sqrt(n)` on the first superdiagonal.
pub fn bosonic_annihilator(n_max: usize) -> Result<Operator> {
    if n_max < 2 {
        return Err(Error::InvalidTruncation(n_max));
    }
    let space = HilbertSpace::new(vec![n_max])?;
    Ok(Operator::from_fn(&space, |i, j| {
        if j == i + 1 {
            c64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    }))
}

/// Places a single-site operator at `site`, identities elsewhere.
pub fn embed(local: &Operator, space: &HilbertSpace, site: usize) -> Result<Operator> {
    let dims = space.dims();
    if site >= dims.len() {
        return Err(Error::SiteOutOfRange { site, n_sites: dims.len() });
    }
    if local.dim() != dims[site] {
        return Err(Error::DimensionMismatch { expected: dims[site], got: local.dim() });
    }
    let inner: usize = dims[site + 1..].iter().product();
    let d = dims[site];
    let m = local.matrix();
    Ok(Operator::from_fn(space, |r, c| {
        let (r_out, r_rest) = (r / (d * inner), r % (d * inner));
        let (c_out, c_rest) = (c / (d * inner), c % (d * inner));
        if r_out != c_out || r_rest % inner != c_rest % inner {
            ZERO
        } else {
            m[(r_rest / inner, c_rest / inner)]
        }
    }))
}

/// Normalizes a state vector; errors on the zero vector.
pub fn normalized(v: &[c64]) -> Result<Vec<c64>> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::InvalidState("cannot normalize a zero vector".into()));
    }
    Ok(v.iter().map(|z| z / norm).collect())
}
