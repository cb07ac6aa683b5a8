//! SLH network algebra and adiabatic elimination of cavity modes.
//!
//! Scattering matrices hold complex scalars. Ports are indexed globally
//! across a concatenation; in a [`NetworkGraph`] an edge `(out, in)` feeds
//! output port `out` into input port `in`.

use std::collections::BTreeSet;

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::lindblad::LindbladModel;
use crate::linalg::{self, ONE, ZERO};
use crate::operators::{bosonic_annihilator, embed, qubit_op, HilbertSpace, Operator, QubitOp};

/// Networks whose loop matrix is worse conditioned than this are rejected.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Clone, Debug)]
pub struct SlhTriplet {
    space: HilbertSpace,
    s: Mat<c64>,
    l: Vec<Operator>,
    h: Operator,
}

impl SlhTriplet {
    pub fn new(s: Mat<c64>, l: Vec<Operator>, h: Operator) -> Result<Self> {
        let n = l.len();
        if s.nrows() != n || s.ncols() != n {
            return Err(Error::PortMismatch { left: s.nrows(), right: n });
        }
        let space = h.space().clone();
        for op in &l {
            space.check_same(op.space())?;
        }
        let scale = linalg::max_abs(h.matrix()).max(1.0);
        let defect = h.hermiticity_defect();
        if defect > 1e-10 * scale {
            return Err(Error::NonHermitian(defect));
        }
        Ok(Self { space, s, l, h })
    }

    /// `n` pass-through ports: S = I, L = 0, H = 0.
    pub fn identity(space: &HilbertSpace, n: usize) -> Self {
        Self {
            space: space.clone(),
            s: Mat::identity(n, n),
            l: vec![Operator::zeros(space); n],
            h: Operator::zeros(space),
        }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn n_ports(&self) -> usize {
        self.l.len()
    }

    pub fn scattering(&self) -> &Mat<c64> {
        &self.s
    }

    pub fn coupling(&self) -> &[Operator] {
        &self.l
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.h
    }

    /// Largest entry of `S^dag S - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.n_ports();
        linalg::max_abs(&(&(self.s.adjoint() * &self.s) - &Mat::<c64>::identity(n, n)))
    }

    /// The Lindblad model `(H, L)` generated by this triplet.
    pub fn to_model(&self) -> Result<LindbladModel> {
        LindbladModel::new(self.h.clone(), self.l.clone())
    }
}

fn scattered(s: &Mat<c64>, l: &[Operator], space: &HilbertSpace) -> Vec<Operator> {
    (0..s.nrows())
        .map(|i| {
            let mut acc = Operator::zeros(space);
            for (k, op) in l.iter().enumerate() {
                if s[(i, k)] != ZERO {
                    acc = &acc + &op.scale(s[(i, k)]);
                }
            }
            acc
        })
        .collect()
}

/// `(X - X^dag) / 2i`.
fn imaginary_part(x: &Operator) -> Operator {
    (&(x - &x.adjoint())).scale(c64::new(0.0, -0.5))
}

/// Block-diagonal S, stacked L, summed H.
pub fn concatenate(a: &SlhTriplet, b: &SlhTriplet) -> Result<SlhTriplet> {
    a.space.check_same(&b.space)?;
    let (na, nb) = (a.n_ports(), b.n_ports());
    let s = Mat::from_fn(na + nb, na + nb, |i, j| match (i < na, j < na) {
        (true, true) => a.s[(i, j)],
        (false, false) => b.s[(i - na, j - na)],
        _ => ZERO,
    });
    let mut l = a.l.clone();
    l.extend(b.l.iter().cloned());
    Ok(SlhTriplet { space: a.space.clone(), s, l, h: &a.h + &b.h })
}

/// Cascade: the outputs of `upstream` feed the inputs of `downstream`.
pub fn series(downstream: &SlhTriplet, upstream: &SlhTriplet) -> Result<SlhTriplet> {
    downstream.space.check_same(&upstream.space)?;
    if downstream.n_ports() != upstream.n_ports() {
        return Err(Error::PortMismatch { left: downstream.n_ports(), right: upstream.n_ports() });
    }
    let space = &downstream.space;
    let s = &downstream.s * &upstream.s;
    let carried = scattered(&downstream.s, &upstream.l, space);
    let l: Vec<Operator> = downstream.l.iter().zip(&carried).map(|(d, c)| d + c).collect();
    let mut cross = Operator::zeros(space);
    for (d, c) in downstream.l.iter().zip(&carried) {
        cross = &cross + &(&d.adjoint() * c);
    }
    let h = &(&downstream.h + &upstream.h) + &imaginary_part(&cross);
    Ok(SlhTriplet { space: space.clone(), s, l, h })
}

fn static_two_port(space: &HilbertSpace, s: Mat<c64>) -> SlhTriplet {
    SlhTriplet { space: space.clone(), s, l: vec![Operator::zeros(space); 2], h: Operator::zeros(space) }
}

fn check_eta(eta: c64) -> Result<f64> {
    let mag = eta.norm();
    if !(mag <= 1.0 + 1e-15) {
        return Err(Error::InvalidParameter(format!("|eta| = {mag} exceeds 1")));
    }
    Ok((1.0 - mag.min(1.0).powi(2)).sqrt())
}

/// `S = eta I + i sqrt(1 - |eta|^2) sigma_x`. Unitary only for real `eta`;
/// see [`unitary_beam_splitter`] for the phase-carrying form.
pub fn beam_splitter(space: &HilbertSpace, eta: c64) -> Result<SlhTriplet> {
    let l = check_eta(eta)?;
    let cross = c64::new(0.0, l);
    let s = Mat::from_fn(2, 2, |i, j| if i == j { eta } else { cross });
    Ok(static_two_port(space, s))
}

/// `S = e^{i phi} (|eta| I + i sqrt(1 - |eta|^2) sigma_x)` with `eta = |eta| e^{i phi}`.
pub fn unitary_beam_splitter(space: &HilbertSpace, eta: c64) -> Result<SlhTriplet> {
    let l = check_eta(eta)?;
    let phase = if eta.norm() > 0.0 { eta / eta.norm() } else { ONE };
    let s = Mat::from_fn(2, 2, |i, j| {
        if i == j {
            phase * eta.norm()
        } else {
            phase * c64::new(0.0, l)
        }
    });
    Ok(static_two_port(space, s))
}

/// Components plus internal edges `(output port, input port)`.
#[derive(Clone, Debug)]
pub struct NetworkGraph {
    components: Vec<SlhTriplet>,
    edges: Vec<(usize, usize)>,
    whole: SlhTriplet,
    internal_outputs: Vec<usize>,
    internal_inputs: Vec<usize>,
    external_inputs: Vec<usize>,
    external_outputs: Vec<usize>,
}

impl NetworkGraph {
    pub fn new(components: Vec<SlhTriplet>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("network without components".into()))?;
        let mut whole = SlhTriplet::identity(first.space(), 0);
        for c in &components {
            whole = concatenate(&whole, c)?;
        }
        let n = whole.n_ports();
        let mut outs = BTreeSet::new();
        let mut ins = BTreeSet::new();
        for &(o, i) in &edges {
            if o >= n || i >= n {
                return Err(Error::InvalidParameter(format!("edge ({o}, {i}) outside {n} ports")));
            }
            if !outs.insert(o) || !ins.insert(i) {
                return Err(Error::InvalidParameter(format!("port reused by edge ({o}, {i})")));
            }
        }
        let external_inputs: Vec<usize> = (0..n).filter(|p| !ins.contains(p)).collect();
        let external_outputs: Vec<usize> = (0..n).filter(|p| !outs.contains(p)).collect();
        Ok(Self {
            components,
            internal_outputs: edges.iter().map(|e| e.0).collect(),
            internal_inputs: edges.iter().map(|e| e.1).collect(),
            edges,
            whole,
            external_inputs,
            external_outputs,
        })
    }

    pub fn components(&self) -> &[SlhTriplet] {
        &self.components
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn concatenated(&self) -> &SlhTriplet {
        &self.whole
    }

    pub fn external_outputs(&self) -> &[usize] {
        &self.external_outputs
    }

    pub fn external_inputs(&self) -> &[usize] {
        &self.external_inputs
    }

    /// Sum of the component Hamiltonians, without loop corrections.
    pub fn component_hamiltonian(&self) -> Operator {
        self.whole.h.clone()
    }

    /// `A[i, o] = 1` when internal output `o` feeds internal input `i`
    /// (both indexed in edge order, so this is the identity pattern).
    pub fn adjacency(&self) -> Mat<c64> {
        let m = self.edges.len();
        Mat::identity(m, m)
    }

    /// `S_ii`: rows internal outputs, columns internal inputs.
    pub fn internal_scattering(&self) -> Mat<c64> {
        self.block(&self.internal_outputs, &self.internal_inputs)
    }

    /// `S_ei`: rows external outputs, columns internal inputs.
    pub fn external_internal_scattering(&self) -> Mat<c64> {
        self.block(&self.external_outputs, &self.internal_inputs)
    }

    /// Coupling operators of the internal output ports.
    pub fn internal_coupling(&self) -> Vec<Operator> {
        self.internal_outputs.iter().map(|&p| self.whole.l[p].clone()).collect()
    }

    fn block(&self, rows: &[usize], cols: &[usize]) -> Mat<c64> {
        Mat::from_fn(rows.len(), cols.len(), |i, j| self.whole.s[(rows[i], cols[j])])
    }

    /// `(I - S_ii A)` with its condition number.
    pub fn loop_matrix(&self) -> Result<(Mat<c64>, f64)> {
        let m = self.edges.len();
        let loop_m = &Mat::<c64>::identity(m, m) - &(&self.internal_scattering() * &self.adjacency());
        if m == 0 {
            return Ok((loop_m, 1.0));
        }
        let sv = linalg::singular_values(&loop_m)?;
        let (hi, lo) = (sv[0], *sv.last().unwrap());
        if !(lo > 1e-14 * hi.max(1e-300)) {
            return Err(Error::SingularNetwork);
        }
        Ok((loop_m, hi / lo))
    }
}

/// Eliminates all internal edges (Markovian limit).
///
/// With `M = A (I - S_ii A)^-1` the internal input fields are `x = M L_int`
/// plus external-input terms, giving
/// `S' = S_ee + S_ei M S_ie`, `L' = L_e + S_ei M L_int` and
/// `H' = H + Im(sum_k L_k^dag (S_{k,int} x))`.
pub fn eliminate_loops(net: &NetworkGraph) -> Result<SlhTriplet> {
    let (loop_m, condition) = net.loop_matrix()?;
    if condition > MAX_CONDITION {
        return Err(Error::IllConditionedNetwork(condition));
    }
    let space = net.whole.space.clone();
    let feed = &net.adjacency() * &linalg::inverse(&loop_m);
    let x_int = scattered(&feed, &net.internal_coupling(), &space);

    let ext_out = &net.external_outputs;
    let ext_in = &net.external_inputs;
    let s_ei = net.external_internal_scattering();
    let s_ie = net.block(&net.internal_outputs, ext_in);
    let s_ee = net.block(ext_out, ext_in);
    let s = &s_ee + &(&(&s_ei * &feed) * &s_ie);

    let to_ext = scattered(&s_ei, &x_int, &space);
    let l: Vec<Operator> = ext_out.iter().zip(&to_ext).map(|(&p, t)| &net.whole.l[p] + t).collect();

    let s_all_int = net.block(&(0..net.whole.n_ports()).collect::<Vec<_>>(), &net.internal_inputs);
    let driven = scattered(&s_all_int, &x_int, &space);
    let mut cross = Operator::zeros(&space);
    for (lk, dk) in net.whole.l.iter().zip(&driven) {
        cross = &cross + &(&lk.adjoint() * dk);
    }
    let h = &net.whole.h + &imaginary_part(&cross);
    Ok(SlhTriplet { space, s, l, h })
}

/// Coefficient of `mode` in `op` under the Frobenius inner product.
pub fn mode_coefficient(op: &Operator, mode: &Operator) -> Result<c64> {
    let norm = mode.inner(mode)?;
    if norm.norm() == 0.0 {
        return Err(Error::InvalidParameter("zero mode operator".into()));
    }
    Ok(mode.inner(op)? / norm)
}

/// One qubit coupled to one cavity mode, with the parameters entering the
/// decay amplitude `sqrt(kappa) g / (delta_c - delta_q + i kappa/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityCoupling {
    pub qubit_site: usize,
    pub cavity_site: usize,
    pub g: c64,
    pub kappa: f64,
    pub cavity_detuning: f64,
    pub qubit_detuning: f64,
}

impl CavityCoupling {
    fn denominator(&self) -> c64 {
        c64::new(self.cavity_detuning - self.qubit_detuning, self.kappa / 2.0)
    }

    pub fn decay_amplitude(&self) -> c64 {
        self.g * self.kappa.sqrt() / self.denominator()
    }

    /// `|g| / |delta_c - delta_q + i kappa/2|`; elimination needs it small.
    pub fn validity_ratio(&self) -> f64 {
        self.g.norm() / self.denominator().norm()
    }
}

/// Ratio above which elimination results should be treated with suspicion.
pub const VALIDITY_WARN: f64 = 0.3;

#[derive(Clone, Debug)]
pub struct Elimination {
    pub amplitudes: Vec<c64>,
    pub validity_ratios: Vec<f64>,
    pub reduced: LindbladModel,
}

impl Elimination {
    pub fn warn(&self) -> bool {
        self.validity_ratios.iter().any(|&r| r > VALIDITY_WARN)
    }
}

struct Layout {
    full: HilbertSpace,
    qubit_sites: Vec<usize>,
    cavity_sites: Vec<usize>,
    reduced: HilbertSpace,
}

impl Layout {
    fn new(full: &HilbertSpace, couplings: &[CavityCoupling]) -> Result<Self> {
        let cav: BTreeSet<usize> = couplings.iter().map(|c| c.cavity_site).collect();
        for c in couplings {
            if c.qubit_site >= full.n_sites() || c.cavity_site >= full.n_sites() {
                return Err(Error::SiteOutOfRange {
                    site: c.qubit_site.max(c.cavity_site),
                    n_sites: full.n_sites(),
                });
            }
            if cav.contains(&c.qubit_site) || full.dims()[c.qubit_site] != 2 {
                return Err(Error::UnsupportedStructure(format!("site {} is not a qubit", c.qubit_site)));
            }
        }
        let qubit_sites: Vec<usize> = (0..full.n_sites()).filter(|s| !cav.contains(s)).collect();
        let reduced = HilbertSpace::new(qubit_sites.iter().map(|&s| full.dims()[s]).collect())?;
        Ok(Self { full: full.clone(), qubit_sites, cavity_sites: cav.into_iter().collect(), reduced })
    }

    fn full_index(&self, q: usize, occupation: &[usize]) -> usize {
        let dims = self.full.dims();
        let mut digits = vec![0; dims.len()];
        let mut rest = q;
        for &site in self.qubit_sites.iter().rev() {
            digits[site] = rest % dims[site];
            rest /= dims[site];
        }
        for (&site, &n) in self.cavity_sites.iter().zip(occupation) {
            digits[site] = n;
        }
        digits.iter().zip(dims).fold(0, |acc, (&k, &d)| acc * d + k)
    }

    fn block(&self, op: &Operator, row_occ: &[usize], col_occ: &[usize]) -> Operator {
        Operator::from_fn(&self.reduced, |i, j| {
            op.get(self.full_index(i, row_occ), self.full_index(j, col_occ))
        })
    }

    fn single(&self, c: usize) -> Vec<usize> {
        (0..self.cavity_sites.len()).map(|k| usize::from(k == c)).collect()
    }

    fn mode(&self, c: usize) -> Result<Operator> {
        let site = self.cavity_sites[c];
        embed(&bosonic_annihilator(self.full.dims()[site])?, &self.full, site)
    }

    fn lift(&self, q: &Operator) -> Operator {
        Operator::from_fn(&self.full, |r, c| {
            let (rq, rocc) = self.split(r);
            let (cq, cocc) = self.split(c);
            if rocc == cocc {
                q.get(rq, cq)
            } else {
                ZERO
            }
        })
    }

    fn split(&self, idx: usize) -> (usize, Vec<usize>) {
        let dims = self.full.dims();
        let mut digits = vec![0; dims.len()];
        let mut rest = idx;
        for s in (0..dims.len()).rev() {
            digits[s] = rest % dims[s];
            rest /= dims[s];
        }
        let q = self.qubit_sites.iter().fold(0, |acc, &s| acc * dims[s] + digits[s]);
        (q, self.cavity_sites.iter().map(|&s| digits[s]).collect())
    }
}

fn structure_check(label: &str, original: &Operator, rebuilt: &Operator) -> Result<()> {
    let scale = linalg::max_abs(original.matrix()).max(1.0);
    let err = original.distance(rebuilt)?;
    if err > 1e-9 * scale {
        return Err(Error::UnsupportedStructure(format!(
            "{label} is not linear in the cavity modes (residual {err:.2e})"
        )));
    }
    Ok(())
}

/// Replaces every cavity mode `a_c` in the collapse operators and in the
/// network part of the Hamiltonian by `sum_j (s_j / sqrt(kappa_c)) sigma_j^-`
/// over the qubits coupled to that cavity.
///
/// The full model must be a qubit Hamiltonian plus `delta_c a_c^dag a_c`,
/// Jaynes-Cummings couplings `g_j (sigma_j^- a_c^dag + h.c.)` and bilinear
/// cavity terms, with collapse operators linear in the modes.
pub fn adiabatic_eliminate(full: &LindbladModel, couplings: &[CavityCoupling]) -> Result<Elimination> {
    let layout = Layout::new(full.space(), couplings)?;
    let n_cav = layout.cavity_sites.len();
    let mut amplitudes = Vec::with_capacity(couplings.len());
    let mut ratios = Vec::with_capacity(couplings.len());
    for (k, c) in couplings.iter().enumerate() {
        let ratio = c.validity_ratio();
        if !(ratio < 1.0) {
            return Err(Error::EliminationInvalid { qubit: k, ratio });
        }
        if !(c.kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("kappa {} must be positive", c.kappa)));
        }
        amplitudes.push(c.decay_amplitude());
        ratios.push(ratio);
    }

    let modes: Vec<Operator> = (0..n_cav).map(|c| layout.mode(c)).collect::<Result<_>>()?;
    let reduced_qubit = |site: usize| -> Result<Operator> {
        let pos = layout.qubit_sites.iter().position(|&s| s == site).unwrap();
        embed(&qubit_op(QubitOp::Lower), &layout.reduced, pos)
    };
    let mut substitutes = vec![Operator::zeros(&layout.reduced); n_cav];
    let mut cavity_params: Vec<Option<(f64, f64)>> = vec![None; n_cav];
    for (c, s) in couplings.iter().zip(&amplitudes) {
        let idx = layout.cavity_sites.iter().position(|&x| x == c.cavity_site).unwrap();
        match cavity_params[idx] {
            Some((k, d)) if k != c.kappa || d != c.cavity_detuning => {
                return Err(Error::InvalidParameter(format!(
                    "inconsistent kappa/detuning for cavity site {}",
                    c.cavity_site
                )));
            }
            _ => cavity_params[idx] = Some((c.kappa, c.cavity_detuning)),
        }
        let term = reduced_qubit(c.qubit_site)?.scale(*s / c.kappa.sqrt());
        substitutes[idx] = &substitutes[idx] + &term;
    }

    let vacuum = vec![0; n_cav];
    let mut collapse = Vec::new();
    for (k, l) in full.collapse_ops().iter().enumerate() {
        let rest = layout.block(l, &vacuum, &vacuum);
        let mut rebuilt = layout.lift(&rest);
        let mut reduced = rest;
        for c in 0..n_cav {
            let blk = layout.block(l, &vacuum, &layout.single(c));
            let lambda = blk.trace() / blk.dim() as f64;
            rebuilt = &rebuilt + &modes[c].scale(lambda);
            reduced = &reduced + &substitutes[c].scale(lambda);
        }
        structure_check(&format!("collapse operator {k}"), l, &rebuilt)?;
        collapse.push(reduced);
    }

    let mut h_rest = full.hamiltonian().clone();
    for (c, mode) in modes.iter().enumerate() {
        let (_, delta) = cavity_params[c].unwrap();
        h_rest = &h_rest - &(&mode.adjoint() * mode).scale_re(delta);
    }
    for c in couplings {
        let idx = layout.cavity_sites.iter().position(|&x| x == c.cavity_site).unwrap();
        let sm = embed(&qubit_op(QubitOp::Lower), full.space(), c.qubit_site)?;
        let jc = &(&sm * &modes[idx].adjoint()).scale(c.g);
        h_rest = &(&h_rest - jc) - &jc.adjoint();
    }
    let h_q = layout.block(&h_rest, &vacuum, &vacuum);
    let base = h_q.trace() / h_q.dim() as f64;
    let mut rebuilt = layout.lift(&h_q);
    let mut reduced_h = h_q;
    for c in 0..n_cav {
        for c2 in 0..n_cav {
            let blk = layout.block(&h_rest, &layout.single(c), &layout.single(c2));
            let mut coef = blk.trace() / blk.dim() as f64;
            if c == c2 {
                coef -= base;
            }
            if coef.norm() == 0.0 {
                continue;
            }
            rebuilt = &rebuilt + &(&modes[c].adjoint() * &modes[c2]).scale(coef);
            reduced_h = &reduced_h + &(&substitutes[c].adjoint() * &substitutes[c2]).scale(coef);
        }
    }
    structure_check("Hamiltonian", &h_rest, &rebuilt)?;
    let reduced_h = linalg_hermitian(&reduced_h);
    Ok(Elimination {
        amplitudes,
        validity_ratios: ratios,
        reduced: LindbladModel::new(reduced_h, collapse)?,
    })
}

fn linalg_hermitian(op: &Operator) -> Operator {
    Operator::new(op.space().clone(), linalg::hermitian_part(op.matrix())).expect("same shape")
}

/// A single-mode cavity as a one-port triplet with reflection
/// convention `S = -1`, `L = sqrt(kappa) a`.
pub fn cavity(mode: &Operator, kappa: f64, hamiltonian: Operator) -> Result<SlhTriplet> {
    let s = Mat::from_fn(1, 1, |_, _| -ONE);
    SlhTriplet::new(s, vec![mode.scale_re(kappa.sqrt())], hamiltonian)
}

