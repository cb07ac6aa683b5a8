//! Concurrence, fidelity and purity.

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::lindblad::DensityMatrix;
use crate::linalg::{self, ZERO};

const CLIP: f64 = 1e-8;
/// Eigenvalues of `rho rho_tilde` below this (relative) size are rounding
/// noise; their square roots would otherwise leak ~1e-8 into `C`.
const ROUND_OFF: f64 = 1e-14;

fn sigma_y_pair() -> Mat<c64> {
    let sy = Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => c64::new(0.0, -1.0),
        (1, 0) => c64::new(0.0, 1.0),
        _ => ZERO,
    });
    linalg::kron(&sy, &sy)
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.space().dims() != [2, 2] {
        return Err(Error::InvalidState(format!(
            "concurrence needs a qubit pair, got {:?}",
            rho.space().dims()
        )));
    }
    let r = rho.matrix();
    let yy = sigma_y_pair();
    let flipped = &(&yy * &r.conjugate().to_owned()) * &yy;
    let product = r * &flipped;
    let values = linalg::eigenvalues(&product)?;
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut roots = Vec::with_capacity(4);
    for z in values {
        if z.im.abs() > CLIP * scale {
            return Err(Error::InvalidState(format!("complex eigenvalue {z} in rho*rho_tilde")));
        }
        if z.re < -CLIP * scale {
            return Err(Error::InvalidState(format!("negative eigenvalue {} in rho*rho_tilde", z.re)));
        }
        roots.push(if z.re <= ROUND_OFF * scale { 0.0 } else { z.re.sqrt() });
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    Ok((roots[0] - roots[1] - roots[2] - roots[3]).max(0.0))
}

/// `<target| rho |target>` for a normalized pure target.
pub fn state_fidelity(rho: &DensityMatrix, target: &[c64]) -> Result<f64> {
    let d = rho.space().total_dim();
    if target.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: target.len() });
    }
    let norm: f64 = target.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("target norm^2 {norm} != 1")));
    }
    let rv = linalg::matvec(rho.matrix(), target);
    let f: c64 = target.iter().zip(&rv).map(|(t, x)| t.conj() * x).sum();
    if f.im.abs() > 1e-10 {
        return Err(Error::InvalidState(format!("fidelity has imaginary part {}", f.im)));
    }
    Ok(f.re)
}

/// `Tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let r = rho.matrix();
    let mut acc = 0.0;
    for i in 0..r.nrows() {
        for j in 0..r.ncols() {
            acc += (r[(i, j)] * r[(j, i)]).re;
        }
    }
    acc
}

/// `(|01> - |10>)/sqrt(2)` in the computational basis.
pub fn singlet() -> Vec<c64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![ZERO, c64::new(h, 0.0), c64::new(-h, 0.0), ZERO]
}

/// `(|01> + |10>)/sqrt(2)`.
pub fn triplet() -> Vec<c64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![ZERO, c64::new(h, 0.0), c64::new(h, 0.0), ZERO]
}

/// Fidelity with `(|01> - e^{i theta}|10>)/sqrt(2)`, maximized over the
/// relative phase `theta`, i.e. with the singlet up to a local z rotation.
pub fn bell_fidelity(rho: &DensityMatrix) -> Result<f64> {
    if rho.space().dims() != [2, 2] {
        return Err(Error::InvalidState(format!(
            "Bell fidelity needs a qubit pair, got {:?}",
            rho.space().dims()
        )));
    }
    let r = rho.matrix();
    Ok(0.5 * (r[(1, 1)].re + r[(2, 2)].re) + r[(1, 2)].norm())
}
