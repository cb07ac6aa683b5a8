//! Liouvillian construction, steady states, spectra and time evolution.
//!
//! Vectorization is column stacking: `vec(A X B) = (B^T kron A) vec(X)`.

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::linalg::{self, ONE, ZERO};
use crate::operators::{HilbertSpace, Operator};

/// Superoperators above this many rows use a bordered linear solve for the
/// steady state instead of a full eigendecomposition.
pub const EIGEN_ROW_LIMIT: usize = 1024;

const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct LindbladModel {
    space: HilbertSpace,
    hamiltonian: Operator,
    collapse_ops: Vec<Operator>,
}

impl LindbladModel {
    pub fn new(hamiltonian: Operator, collapse_ops: Vec<Operator>) -> Result<Self> {
        let scale = linalg::max_abs(hamiltonian.matrix()).max(1.0);
        let defect = hamiltonian.hermiticity_defect();
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NonHermitian(defect));
        }
        let space = hamiltonian.space().clone();
        for l in &collapse_ops {
            space.check_same(l.space())?;
        }
        Ok(Self { space, hamiltonian, collapse_ops })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn collapse_ops(&self) -> &[Operator] {
        &self.collapse_ops
    }
}

#[derive(Clone, Debug)]
pub struct Superoperator {
    space: HilbertSpace,
    matrix: Mat<c64>,
}

impl Superoperator {
    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    /// Number of rows, the squared Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, rho: &Mat<c64>) -> Mat<c64> {
        let d = self.space.total_dim();
        let out = &self.matrix * &linalg::vectorize(rho);
        linalg::unvectorize(&out, d)
    }

    pub fn eigenvalues(&self) -> Result<Vec<c64>> {
        linalg::eigenvalues(&self.matrix)
    }
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: Mat<c64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(space: HilbertSpace, matrix: Mat<c64>) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: matrix.nrows() });
        }
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > 1e-10 {
            return Err(Error::InvalidState(format!("not Hermitian ({defect:.2e})")));
        }
        let tr = linalg::trace(&matrix);
        if (tr - ONE).norm() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let rho = Self { space, matrix };
        let min = rho.min_eigenvalue()?;
        if min < -1e-8 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(rho)
    }

    pub(crate) fn from_raw(space: HilbertSpace, matrix: Mat<c64>) -> Self {
        Self { space, matrix }
    }

    pub fn from_pure(space: HilbertSpace, psi: &[c64]) -> Result<Self> {
        if psi.len() != space.total_dim() {
            return Err(Error::DimensionMismatch { expected: space.total_dim(), got: psi.len() });
        }
        let psi = crate::operators::normalized(psi)?;
        Ok(Self { space, matrix: linalg::outer(&psi) })
    }

    pub fn maximally_mixed(space: HilbertSpace) -> Self {
        let d = space.total_dim();
        let matrix = linalg::scale(&Mat::identity(d, d), linalg::real(1.0 / d as f64));
        Self { space, matrix }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// Convex combination `p*self + (1-p)*other`.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
        self.space.check_same(&other.space)?;
        let matrix = Mat::from_fn(self.matrix.nrows(), self.matrix.ncols(), |i, j| {
            self.matrix[(i, j)] * p + other.matrix[(i, j)] * (1.0 - p)
        });
        Ok(Self { space: self.space.clone(), matrix })
    }

    /// Half the trace norm of the difference.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.space.check_same(&other.space)?;
        let diff = &self.matrix - &other.matrix;
        let eig = linalg::hermitian_eigenvalues(&diff)?;
        Ok(0.5 * eig.iter().map(|x| x.abs()).sum::<f64>())
    }
}

fn dissipator_terms(l: &Mat<c64>, id: &Mat<c64>, acc: &mut Mat<c64>) {
    let ldl = &linalg::adjoint(l) * l;
    let jump = linalg::kron(&l.conjugate().to_owned(), l);
    let left = linalg::kron(id, &ldl);
    let right = linalg::kron(&ldl.transpose().to_owned(), id);
    for j in 0..acc.ncols() {
        for i in 0..acc.nrows() {
            acc[(i, j)] += jump[(i, j)] - (left[(i, j)] + right[(i, j)]) * 0.5;
        }
    }
}

/// `L = -i(I kron H - H^T kron I) + sum_k [conj(L_k) kron L_k - 1/2 I kron L_k^dag L_k - 1/2 (L_k^dag L_k)^T kron I]`.
pub fn liouvillian(model: &LindbladModel) -> Result<Superoperator> {
    let d = model.space.total_dim();
    let id = Mat::<c64>::identity(d, d);
    let h = model.hamiltonian.matrix();
    let comm = &linalg::kron(&id, h) - &linalg::kron(&h.transpose().to_owned(), &id);
    let mut matrix = linalg::scale(&comm, c64::new(0.0, -1.0));
    for l in &model.collapse_ops {
        dissipator_terms(l.matrix(), &id, &mut matrix);
    }
    Ok(Superoperator { space: model.space.clone(), matrix })
}

fn kernel_tolerance(values: &[c64]) -> f64 {
    1e-8 * values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn kernel_count(values: &[c64], tol: f64) -> usize {
    values.iter().filter(|z| z.norm() <= tol).count()
}

fn normalize_state(space: &HilbertSpace, x: Mat<c64>) -> Result<DensityMatrix> {
    let tr = linalg::trace(&x);
    if tr.norm() < 1e-300 || !tr.re.is_finite() || !tr.im.is_finite() {
        return Err(Error::InvalidState("kernel vector has zero trace".into()));
    }
    let x = linalg::scale(&x, ONE / tr);
    let mut h = linalg::hermitian_part(&x);
    let t = linalg::trace(&h).re;
    h = linalg::scale(&h, linalg::real(1.0 / t));
    Ok(DensityMatrix::from_raw(space.clone(), h))
}

/// Unique steady state, from the eigenvector of the smallest-modulus
/// eigenvalue (or a bordered linear solve above [`EIGEN_ROW_LIMIT`] rows).
pub fn steady_state(superop: &Superoperator) -> Result<DensityMatrix> {
    let n = superop.dim();
    let d = superop.space.total_dim();
    if n > EIGEN_ROW_LIMIT {
        return steady_state_bordered(superop);
    }
    let (values, vectors) = linalg::eigen(&superop.matrix)?;
    let tol = kernel_tolerance(&values);
    let count = kernel_count(&values, tol);
    if count > 1 {
        return Err(Error::DegenerateSteadyState { count });
    }
    let idx = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Eigen("empty spectrum".into()))?;
    let x = Mat::from_fn(d, d, |i, j| vectors[(i + j * d, idx)]);
    normalize_state(&superop.space, x)
}

// Replaces the first row with the trace functional. A one-dimensional kernel
// makes this system regular; a larger kernel leaves it singular.
fn steady_state_bordered(superop: &Superoperator) -> Result<DensityMatrix> {
    let n = superop.dim();
    let d = superop.space.total_dim();
    let mut m = superop.matrix.clone();
    for k in 0..n {
        m[(0, k)] = if k % (d + 1) == 0 { ONE } else { ZERO };
    }
    let mut rhs = Mat::<c64>::zeros(n, 1);
    rhs[(0, 0)] = ONE;
    let x = linalg::solve(&m, &rhs);
    let finite = (0..n).all(|k| x[(k, 0)].re.is_finite() && x[(k, 0)].im.is_finite());
    let scale = linalg::max_abs(&superop.matrix).max(1.0);
    let residual = if finite {
        linalg::max_abs(&(&superop.matrix * &x)) / scale
    } else {
        f64::INFINITY
    };
    if !finite || residual > 1e-8 {
        return Err(Error::DegenerateSteadyState { count: 2 });
    }
    normalize_state(&superop.space, linalg::unvectorize(&x, d))
}

/// Smallest decay rate among the non-kernel eigenvalues.
pub fn spectral_gap(superop: &Superoperator) -> Result<f64> {
    let values = superop.eigenvalues()?;
    let tol = kernel_tolerance(&values);
    let count = kernel_count(&values, tol);
    if count > 1 {
        return Err(Error::DegenerateSteadyState { count });
    }
    values
        .iter()
        .filter(|z| z.norm() > tol)
        .map(|z| -z.re)
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::Eigen("no non-kernel eigenvalues".into()))
}

/// `exp(L t)` as a dense matrix.
pub fn propagator(superop: &Superoperator, t: f64) -> Mat<c64> {
    linalg::expm(&linalg::scale(&superop.matrix, linalg::real(t)))
}

fn apply_propagator(space: &HilbertSpace, p: &Mat<c64>, rho: &Mat<c64>) -> DensityMatrix {
    let d = space.total_dim();
    let v = p * &linalg::vectorize(rho);
    DensityMatrix::from_raw(space.clone(), linalg::hermitian_part(&linalg::unvectorize(&v, d)))
}

pub fn propagate(superop: &Superoperator, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("negative duration {t}")));
    }
    superop.space.check_same(&rho0.space)?;
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    Ok(apply_propagator(&superop.space, &propagator(superop, t), &rho0.matrix))
}

/// Repeatedly applies one fixed-step propagator.
pub struct Stepper {
    space: HilbertSpace,
    matrix: Mat<c64>,
}

impl Stepper {
    pub fn new(superop: &Superoperator, dt: f64) -> Self {
        Self { space: superop.space.clone(), matrix: propagator(superop, dt) }
    }

    pub fn step(&self, rho: &DensityMatrix) -> DensityMatrix {
        apply_propagator(&self.space, &self.matrix, &rho.matrix)
    }
}

/// A piecewise-constant parameter schedule; the model is sampled at the left
/// end of each step.
pub trait Schedule {
    fn model_at(&self, t: f64) -> Result<LindbladModel>;
    fn final_model(&self) -> Result<LindbladModel>;
    /// Spacing of parameter switches, if the schedule imposes one.
    fn switch_spacing(&self) -> Option<f64> {
        None
    }
}

pub struct StaticSchedule(pub LindbladModel);

impl Schedule for StaticSchedule {
    fn model_at(&self, _t: f64) -> Result<LindbladModel> {
        Ok(self.0.clone())
    }
    fn final_model(&self) -> Result<LindbladModel> {
        Ok(self.0.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub time: f64,
    pub step: f64,
    pub horizon: f64,
    pub final_gap: f64,
}

/// First grid time after which the trace distance to the final steady state
/// stays at or below `epsilon` up to a horizon of `100 / gap`.
pub fn convergence_time(
    schedule: &dyn Schedule,
    rho0: &DensityMatrix,
    epsilon: f64,
    step: Option<f64>,
) -> Result<Convergence> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside (0, 1)")));
    }
    let final_superop = liouvillian(&schedule.final_model()?)?;
    let target = steady_state(&final_superop)?;
    let gap = spectral_gap(&final_superop)?;
    let horizon = 100.0 / gap;
    let mut dt = step.unwrap_or(0.05 / gap);
    if let Some(spacing) = schedule.switch_spacing() {
        dt = dt.min(spacing);
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("step {dt} must be positive")));
    }
    let n_steps = (horizon / dt).ceil() as usize;

    let mut rho = rho0.clone();
    let mut distance = rho.trace_distance(&target)?;
    let mut last_bad = (distance > epsilon).then_some(0usize);
    let mut cached: Option<(Mat<c64>, Stepper)> = None;
    for k in 1..=n_steps {
        let superop = liouvillian(&schedule.model_at((k - 1) as f64 * dt)?)?;
        let reuse = matches!(&cached, Some((m, _)) if *m == superop.matrix);
        if !reuse {
            let stepper = Stepper::new(&superop, dt);
            cached = Some((superop.matrix, stepper));
        }
        rho = cached.as_ref().unwrap().1.step(&rho);
        distance = rho.trace_distance(&target)?;
        if distance > epsilon {
            last_bad = Some(k);
        }
    }
    match last_bad {
        Some(k) if k == n_steps => Err(Error::Timeout { horizon, last_distance: distance }),
        Some(k) => Ok(Convergence { time: (k + 1) as f64 * dt, step: dt, horizon, final_gap: gap }),
        None => Ok(Convergence { time: 0.0, step: dt, horizon, final_gap: gap }),
    }
}
