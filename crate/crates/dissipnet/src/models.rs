//! Builders for the three two-qubit architectures, closed-form recipes and
//! the analytic dark state.
//!
//! Decay amplitudes `s_j` and intrinsic-loss `gamma` values are operator
//! prefactors (amplitudes), not rates. Closed-form recipes are quoted in
//! "reported" units and converted by [`ReportedParams::to_pair_params`].

use std::f64::consts::PI;

use faer::c64;

use crate::error::{Error, Result};
use crate::lindblad::{liouvillian, steady_state, DensityMatrix, LindbladModel, Schedule};
use crate::linalg::{ONE, ZERO};
use crate::metrics::concurrence;
use crate::operators::{bosonic_annihilator, embed, qubit_op, HilbertSpace, Operator, QubitOp};
use crate::slh::{
    self, adiabatic_eliminate, cavity, concatenate, eliminate_loops, series, unitary_beam_splitter,
    CavityCoupling, NetworkGraph, SlhTriplet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    SingleCavity,
    Cascaded,
    Bidirectional,
}

impl Architecture {
    pub const ALL: [Architecture; 3] =
        [Architecture::SingleCavity, Architecture::Cascaded, Architecture::Bidirectional];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::SingleCavity => "single_cavity",
            Architecture::Cascaded => "cascaded",
            Architecture::Bidirectional => "bidirectional",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }
}

/// Parameters of the reduced two-qubit models, in model units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairParams {
    pub alpha1: c64,
    pub alpha2: c64,
    pub delta1: f64,
    pub delta2: f64,
    pub s1: c64,
    pub s2: c64,
    pub gamma_r1: f64,
    pub gamma_r2: f64,
    pub gamma_phi1: f64,
    pub gamma_phi2: f64,
    pub eta_mag: f64,
    pub phi: f64,
    pub architecture: Architecture,
}

impl Default for PairParams {
    fn default() -> Self {
        Self {
            alpha1: ONE,
            alpha2: ONE,
            delta1: 0.0,
            delta2: 0.0,
            s1: ONE,
            s2: ONE,
            gamma_r1: 0.0,
            gamma_r2: 0.0,
            gamma_phi1: 0.0,
            gamma_phi2: 0.0,
            eta_mag: 1.0,
            phi: 0.0,
            architecture: Architecture::SingleCavity,
        }
    }
}

impl PairParams {
    /// Channel amplitude `|eta| e^{i phi}`.
    pub fn eta(&self) -> c64 {
        c64::from_polar(self.eta_mag, self.phi)
    }

    /// Loss parameter `sqrt(1 - |eta|^2)`.
    pub fn loss(&self) -> f64 {
        (1.0 - self.eta_mag.clamp(0.0, 1.0).powi(2)).sqrt()
    }

    /// Sets `eta_mag` from the loss parameter `l`.
    pub fn with_loss(mut self, l: f64) -> Self {
        self.eta_mag = (1.0 - l * l).max(0.0).sqrt();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta_mag) {
            return Err(Error::InvalidParameter(format!("eta_mag {} outside [0, 1]", self.eta_mag)));
        }
        for (name, g) in [
            ("gamma_r1", self.gamma_r1),
            ("gamma_r2", self.gamma_r2),
            ("gamma_phi1", self.gamma_phi1),
            ("gamma_phi2", self.gamma_phi2),
        ] {
            if !(g >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {g} must be >= 0")));
            }
        }
        Ok(())
    }

    /// Rescales all rates so that `|s1| = 1`; the steady state is unchanged.
    pub fn normalized_to_s1(&self) -> Self {
        let c = self.s1.norm();
        if c == 0.0 {
            return *self;
        }
        let rate = 1.0 / (c * c);
        Self {
            alpha1: self.alpha1 * rate,
            alpha2: self.alpha2 * rate,
            delta1: self.delta1 * rate,
            delta2: self.delta2 * rate,
            s1: self.s1 / c,
            s2: self.s2 / c,
            gamma_r1: self.gamma_r1 / c,
            gamma_r2: self.gamma_r2 / c,
            gamma_phi1: self.gamma_phi1 / c,
            gamma_phi2: self.gamma_phi2 / c,
            ..*self
        }
    }
}

/// Parameters in the units in which closed-form recipes are quoted: decay
/// entries `s_j` are rates (the collapse amplitude is `sqrt|s_j|` with the
/// phase of `s_j`), detunings are half the model detuning, and intrinsic
/// losses are amplitude ratios `gamma / |s_j|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportedParams {
    pub architecture: Architecture,
    pub alpha: [c64; 2],
    pub delta: [f64; 2],
    pub decay: [c64; 2],
    pub relaxation_ratio: [f64; 2],
    pub dephasing_ratio: [f64; 2],
    pub eta_mag: f64,
    pub phi: f64,
}

impl ReportedParams {
    pub fn to_pair_params(&self) -> PairParams {
        let amp = |s: c64| {
            let r = s.norm();
            if r == 0.0 {
                ZERO
            } else {
                s / r * r.sqrt()
            }
        };
        let (s1, s2) = (amp(self.decay[0]), amp(self.decay[1]));
        PairParams {
            alpha1: self.alpha[0],
            alpha2: self.alpha[1],
            delta1: 2.0 * self.delta[0],
            delta2: 2.0 * self.delta[1],
            s1,
            s2,
            gamma_r1: self.relaxation_ratio[0] * s1.norm(),
            gamma_r2: self.relaxation_ratio[1] * s2.norm(),
            gamma_phi1: self.dephasing_ratio[0] * s1.norm(),
            gamma_phi2: self.dephasing_ratio[1] * s2.norm(),
            eta_mag: self.eta_mag,
            phi: self.phi,
            architecture: self.architecture,
        }
    }
}

/// Cavity-level parameters for the full (pre-elimination) models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    pub g1: c64,
    pub g2: c64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub cav_delta1: f64,
    pub cav_delta2: f64,
    pub drive: PairParams,
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa1 > 0.0 && self.kappa2 > 0.0) {
            return Err(Error::InvalidParameter("cavity decay rates must be positive".into()));
        }
        self.drive.validate()
    }
}

fn drive_hamiltonian(space: &HilbertSpace, p: &PairParams) -> Result<Operator> {
    let mut h = Operator::zeros(space);
    for (site, alpha, delta) in [(0, p.alpha1, p.delta1), (1, p.alpha2, p.delta2)] {
        let sm = embed(&qubit_op(QubitOp::Lower), space, site)?;
        let sp = sm.adjoint();
        h = &h + &sp.scale(alpha);
        h = &h + &sm.scale(alpha.conj());
        h = &h + &(&sp * &sm).scale_re(delta);
    }
    Ok(h)
}

fn intrinsic_ops(space: &HilbertSpace, p: &PairParams) -> Result<Vec<Operator>> {
    let mut ops = Vec::new();
    for (site, gr, gphi) in [(0, p.gamma_r1, p.gamma_phi1), (1, p.gamma_r2, p.gamma_phi2)] {
        if gr != 0.0 {
            ops.push(embed(&qubit_op(QubitOp::Lower), space, site)?.scale_re(gr));
        }
        if gphi != 0.0 {
            ops.push(embed(&qubit_op(QubitOp::Z), space, site)?.scale_re(gphi));
        }
    }
    Ok(ops)
}

/// Collapse operators and Hamiltonian correction for two local jump
/// operators `j1`, `j2` connected by the given architecture.
///
/// Cascaded: `c1 = eta j1`, `c2 = j2`, `L = [c1 + c2, l j1]` and the
/// directional exchange `(c2^dag c1 - c1^dag c2) / 2i`.
///
/// Bidirectional: `L = [eta j1 + j2, j1 + eta j2] / sqrt(1 + |eta|^2)` plus
/// the loop-induced terms `Im(eta)/l^2 (j1^dag j2 + h.c.)` and
/// `Im(eta^2)/(l^2 (1+|eta|^2)) (j1^dag j1 + j2^dag j2)`, i.e. the loop
/// elimination result rescaled by the same factor as the collapse operators.
pub fn network_terms(
    architecture: Architecture,
    eta: c64,
    j1: &Operator,
    j2: &Operator,
) -> Result<(Vec<Operator>, Operator)> {
    let space = j1.space().clone();
    let zero_h = Operator::zeros(&space);
    let eta_mag = eta.norm();
    if eta_mag > 1.0 + 1e-15 {
        return Err(Error::InvalidParameter(format!("|eta| = {eta_mag} exceeds 1")));
    }
    let l = (1.0 - eta_mag.min(1.0).powi(2)).sqrt();
    match architecture {
        Architecture::SingleCavity => Ok((vec![j1 + j2], zero_h)),
        Architecture::Cascaded => {
            let c1 = j1.scale(eta);
            let exchange = &(&j2.adjoint() * &c1) - &(&c1.adjoint() * j2);
            let h = exchange.scale(c64::new(0.0, -0.5));
            Ok((vec![&c1 + j2, j1.scale_re(l)], h))
        }
        Architecture::Bidirectional => {
            let norm = 1.0 / (1.0 + eta_mag * eta_mag).sqrt();
            let l1 = (&j1.scale(eta) + j2).scale_re(norm);
            let l2 = (j1 + &j2.scale(eta)).scale_re(norm);
            let weight = 1.0 + eta_mag * eta_mag;
            // Phases within rounding of 0 or pi count as real.
            let (hop, lamb) = (eta.im, (eta * eta).im);
            let hop = if hop.abs() > 1e-14 { hop } else { 0.0 };
            let lamb = if lamb.abs() > 1e-14 { lamb } else { 0.0 };
            let mut h = Operator::zeros(&space);
            if hop != 0.0 || lamb != 0.0 {
                if l == 0.0 {
                    return Err(Error::InvalidParameter(
                        "lossless loop with complex eta has no finite normalization".into(),
                    ));
                }
                let exchange = &(&j1.adjoint() * j2) + &(&j2.adjoint() * j1);
                let pops = &(&j1.adjoint() * j1) + &(&j2.adjoint() * j2);
                h = &exchange.scale_re(hop / (l * l)) + &pops.scale_re(lamb / (l * l * weight));
            }
            Ok((vec![l1, l2], h))
        }
    }
}

pub fn qubit_pair() -> HilbertSpace {
    HilbertSpace::qubits(2)
}

/// Reduced two-qubit Lindblad model.
pub fn build_reduced(p: &PairParams) -> Result<LindbladModel> {
    p.validate()?;
    let space = qubit_pair();
    let j1 = embed(&qubit_op(QubitOp::Lower), &space, 0)?.scale(p.s1);
    let j2 = embed(&qubit_op(QubitOp::Lower), &space, 1)?.scale(p.s2);
    let (mut ops, h_net) = network_terms(p.architecture, p.eta(), &j1, &j2)?;
    ops.extend(intrinsic_ops(&space, p)?);
    let h = &drive_hamiltonian(&space, p)? + &h_net;
    LindbladModel::new(h, ops)
}

pub fn steady(p: &PairParams) -> Result<DensityMatrix> {
    steady_state(&liouvillian(&build_reduced(p)?)?)
}

/// Steady-state concurrence of the reduced model.
pub fn steady_concurrence(p: &PairParams) -> Result<f64> {
    concurrence(&steady(p)?)
}

fn jaynes_cummings(space: &HilbertSpace, qubit: usize, mode: &Operator, g: c64) -> Result<Operator> {
    let sm = embed(&qubit_op(QubitOp::Lower), space, qubit)?;
    let term = (&sm * &mode.adjoint()).scale(g);
    Ok(&term + &term.adjoint())
}

/// Qubit-cavity couplings of the full model, in the site layout used by
/// [`build_full`]: qubits at sites 0 and 1, cavities after them.
pub fn cavity_couplings(p: &CavityParams, architecture: Architecture) -> Vec<CavityCoupling> {
    let d = &p.drive;
    let shared = architecture == Architecture::SingleCavity;
    let (kappa2, cav_delta2) = if shared { (p.kappa1, p.cav_delta1) } else { (p.kappa2, p.cav_delta2) };
    vec![
        CavityCoupling {
            qubit_site: 0,
            cavity_site: 2,
            g: p.g1,
            kappa: p.kappa1,
            cavity_detuning: p.cav_delta1,
            qubit_detuning: d.delta1,
        },
        CavityCoupling {
            qubit_site: 1,
            cavity_site: if shared { 2 } else { 3 },
            g: p.g2,
            kappa: kappa2,
            cavity_detuning: cav_delta2,
            qubit_detuning: d.delta2,
        },
    ]
}

/// Qubits plus cavity modes before elimination. Remote architectures are
/// composed through the SLH module.
pub fn build_full(p: &CavityParams, architecture: Architecture, n_max: usize) -> Result<LindbladModel> {
    p.validate()?;
    bosonic_annihilator(n_max)?;
    let d = &p.drive;
    if architecture == Architecture::SingleCavity {
        let space = HilbertSpace::new(vec![2, 2, n_max])?;
        let a = embed(&bosonic_annihilator(n_max)?, &space, 2)?;
        let mut h = drive_hamiltonian(&space, d)?;
        h = &h + &(&a.adjoint() * &a).scale_re(p.cav_delta1);
        h = &h + &jaynes_cummings(&space, 0, &a, p.g1)?;
        h = &h + &jaynes_cummings(&space, 1, &a, p.g2)?;
        let mut ops = vec![a.scale_re(p.kappa1.sqrt())];
        ops.extend(intrinsic_ops(&space, d)?);
        return LindbladModel::new(h, ops);
    }

    let space = HilbertSpace::new(vec![2, 2, n_max, n_max])?;
    let a1 = embed(&bosonic_annihilator(n_max)?, &space, 2)?;
    let a2 = embed(&bosonic_annihilator(n_max)?, &space, 3)?;
    let drive = drive_hamiltonian(&space, d)?;
    // Drives are attached to the first cavity's triplet; any placement gives
    // the same total Hamiltonian.
    let h1 = &(&drive + &(&a1.adjoint() * &a1).scale_re(p.cav_delta1)) + &jaynes_cummings(&space, 0, &a1, p.g1)?;
    let h2 = &(&a2.adjoint() * &a2).scale_re(p.cav_delta2) + &jaynes_cummings(&space, 1, &a2, p.g2)?;
    let cav1 = cavity(&a1, p.kappa1, h1)?;
    let cav2 = cavity(&a2, p.kappa2, h2)?;
    let eta = d.eta();
    let composed = match architecture {
        Architecture::Cascaded => cascade_network(&space, &cav1, &cav2, eta)?,
        Architecture::Bidirectional => {
            bidirectional_network(&space, &cav1, &cav2, eta, &[(&a1, p.kappa1), (&a2, p.kappa2)])?
        }
        Architecture::SingleCavity => unreachable!(),
    };
    let mut ops = composed.coupling().to_vec();
    ops.extend(intrinsic_ops(&space, d)?);
    LindbladModel::new(composed.hamiltonian().clone(), ops)
}

/// cavity 1 -> beam splitter -> cavity 2, each cavity padded with a
/// pass-through port for the splitter's loss output.
pub fn cascade_network(space: &HilbertSpace, cav1: &SlhTriplet, cav2: &SlhTriplet, eta: c64) -> Result<SlhTriplet> {
    let pad = SlhTriplet::identity(space, 1);
    let up = concatenate(cav1, &pad)?;
    let down = concatenate(cav2, &pad)?;
    let bs = unitary_beam_splitter(space, eta)?;
    series(&down, &series(&bs, &up)?)
}

/// The looped two-cavity network: cavity 1 (port 0), splitter A (ports 1,2),
/// cavity 2 (port 3), splitter B (ports 4,5). The cavities' reflection sign
/// is folded into the line amplitude, so the splitters carry `-eta`.
pub fn bidirectional_graph(space: &HilbertSpace, cav1: &SlhTriplet, cav2: &SlhTriplet, eta: c64) -> Result<NetworkGraph> {
    let bs = unitary_beam_splitter(space, -eta)?;
    NetworkGraph::new(vec![cav1.clone(), bs.clone(), cav2.clone(), bs], vec![(0, 1), (1, 3), (3, 4), (4, 0)])
}

/// Eliminates the loop, then rescales so that each mode's summed decay
/// weight equals its `kappa`. The loop-induced Hamiltonian is scaled by the
/// same squared factor. Channels are returned as
/// `[eta a1 + a2, a1 + eta a2]` (up to the `sqrt(kappa)` weights).
pub fn bidirectional_network(
    space: &HilbertSpace,
    cav1: &SlhTriplet,
    cav2: &SlhTriplet,
    eta: c64,
    modes: &[(&Operator, f64)],
) -> Result<SlhTriplet> {
    let net = bidirectional_graph(space, cav1, cav2, eta)?;
    let raw = eliminate_loops(&net)?;
    let (mode, kappa) = modes[0];
    let weight: f64 = raw
        .coupling()
        .iter()
        .map(|l| slh::mode_coefficient(l, mode).map(|c| c.norm_sqr()))
        .sum::<Result<f64>>()?;
    if weight == 0.0 {
        return Err(Error::InvalidParameter("loop leaves no external decay channel".into()));
    }
    let f2 = kappa / weight;
    let f = f2.sqrt();
    let base = net.component_hamiltonian();
    let correction = &raw.hamiltonian().clone() - &base;
    let h = &base + &correction.scale_re(f2);
    let l = raw.coupling();
    // External outputs are ports 2 and 5; port 5 carries eta a1 + a2.
    let ordered = vec![l[1].scale_re(f), l[0].scale_re(f)];
    let s = raw.scattering();
    let s = faer::Mat::from_fn(2, 2, |i, j| s[(1 - i, 1 - j)]);
    SlhTriplet::new(s, ordered, h)
}

/// Full-model steady concurrence with the truncation rule: start at
/// `n_start`, add a level until the concurrence changes by less than 1e-3,
/// stop at `n_cap`. Returns the concurrence and the truncation used.
pub fn full_steady_concurrence(
    p: &CavityParams,
    architecture: Architecture,
    n_start: usize,
    n_cap: usize,
) -> Result<(f64, usize)> {
    let solve = |n: usize| -> Result<f64> {
        let full = build_full(p, architecture, n)?;
        let rho = steady_state(&liouvillian(&full)?)?;
        concurrence(&partial_trace_qubits(&rho, 2)?)
    };
    let mut n = n_start;
    let mut c = solve(n)?;
    while n < n_cap {
        let next = solve(n + 1)?;
        let delta = (next - c).abs();
        n += 1;
        c = next;
        if delta < 1e-3 {
            break;
        }
    }
    Ok((c, n))
}

/// Reduces a state on `qubits` leading qubit sites plus trailing modes to the
/// qubit part.
pub fn partial_trace_qubits(rho: &DensityMatrix, qubits: usize) -> Result<DensityMatrix> {
    let dims = rho.space().dims();
    if dims.len() < qubits || dims[..qubits].iter().any(|&d| d != 2) {
        return Err(Error::InvalidState(format!("expected {qubits} leading qubits in {dims:?}")));
    }
    let dq = 1usize << qubits;
    let rest: usize = dims[qubits..].iter().product();
    let m = rho.matrix();
    let red = faer::Mat::from_fn(dq, dq, |i, j| (0..rest).map(|k| m[(i * rest + k, j * rest + k)]).sum());
    DensityMatrix::new(HilbertSpace::qubits(qubits), red)
}

/// Eliminates the cavities of a full model back to the qubit pair.
pub fn reduce_full(p: &CavityParams, architecture: Architecture, n_max: usize) -> Result<slh::Elimination> {
    let full = build_full(p, architecture, n_max)?;
    adiabatic_eliminate(&full, &cavity_couplings(p, architecture))
}

/// `Delta|00> + alpha|01> - alpha|10>`, normalized, and its concurrence
/// `2 alpha^2 / (Delta^2 + 2 alpha^2)`. Index 0 is the ground state.
pub fn analytic_steady_state(delta: f64, alpha: f64) -> Result<(Vec<c64>, f64)> {
    let norm2 = delta * delta + 2.0 * alpha * alpha;
    if norm2 == 0.0 {
        return Err(Error::InvalidParameter("delta and alpha both zero".into()));
    }
    let k = 1.0 / norm2.sqrt();
    let psi = vec![c64::new(delta * k, 0.0), c64::new(alpha * k, 0.0), c64::new(-alpha * k, 0.0), ZERO];
    Ok((psi, 2.0 * alpha * alpha / norm2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    SingleFirstOrder,
    CascadedLowLoss,
    CascadedHighLoss,
    BidirLowLoss,
    BidirHighLoss,
}

impl Regime {
    pub const ALL: [Regime; 5] = [
        Regime::SingleFirstOrder,
        Regime::CascadedLowLoss,
        Regime::CascadedHighLoss,
        Regime::BidirLowLoss,
        Regime::BidirHighLoss,
    ];

    pub fn architecture(self) -> Architecture {
        match self {
            Regime::SingleFirstOrder => Architecture::SingleCavity,
            Regime::CascadedLowLoss | Regime::CascadedHighLoss => Architecture::Cascaded,
            Regime::BidirLowLoss | Regime::BidirHighLoss => Architecture::Bidirectional,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::SingleFirstOrder => "single_first_order",
            Regime::CascadedLowLoss => "cascaded_low_loss",
            Regime::CascadedHighLoss => "cascaded_high_loss",
            Regime::BidirLowLoss => "bidir_low_loss",
            Regime::BidirHighLoss => "bidir_high_loss",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recipe {
    pub regime: Regime,
    pub loss: f64,
    pub params: ReportedParams,
    pub warning: Option<String>,
}

fn real2(a: f64, b: f64) -> [c64; 2] {
    [c64::new(a, 0.0), c64::new(b, 0.0)]
}

/// Closed-form parameter assignment in reported units. For the single-cavity
/// recipe `l` is the intrinsic-relaxation ratio; otherwise it is the channel
/// loss `sqrt(1 - eta^2)`. Silent members are zero (phase 0, no intrinsic
/// loss), with the recipe's own `s` or `s1` as reference rate.
pub fn analytic_recipe(regime: Regime, l: f64) -> Result<Recipe> {
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::InvalidParameter(format!("loss {l} outside [0, 1]")));
    }
    let eta = (1.0 - l * l).sqrt();
    let base = ReportedParams {
        architecture: regime.architecture(),
        alpha: real2(1.0, 1.0),
        delta: [0.0, 0.0],
        decay: real2(1.0, 1.0),
        relaxation_ratio: [0.0, 0.0],
        dephasing_ratio: [0.0, 0.0],
        eta_mag: eta,
        phi: 0.0,
    };
    let low_warn = (l > 0.5).then(|| format!("low-loss recipe used at l = {l}"));
    let high_warn = (eta > 0.5).then(|| format!("high-loss recipe used at eta = {eta:.3}"));
    let (params, warning) = match regime {
        Regime::SingleFirstOrder => {
            let ratio = (l / 2.0).sqrt();
            (
                ReportedParams {
                    delta: [ratio, -ratio],
                    decay: real2(2.0, 2.0),
                    relaxation_ratio: [l, 0.0],
                    eta_mag: 1.0,
                    ..base
                },
                None,
            )
        }
        Regime::CascadedLowLoss => {
            let s2 = 0.2 + 2.0 * l.sqrt() + l;
            (ReportedParams { decay: real2(s2 + 8.0 * l * l, s2), ..base }, low_warn)
        }
        Regime::CascadedHighLoss => (
            ReportedParams {
                alpha: real2(0.75, 0.25 - eta),
                decay: real2(1.0, 5.0 - 2.0 * eta.sqrt()),
                ..base
            },
            high_warn,
        ),
        Regime::BidirLowLoss => (
            ReportedParams { alpha: real2(1.7, -1.7), delta: [l, -l], phi: PI, ..base },
            low_warn,
        ),
        Regime::BidirHighLoss => (
            ReportedParams {
                alpha: real2(1.0 - eta.sqrt(), 0.0),
                decay: real2(1.0, 1.7),
                phi: PI,
                ..base
            },
            high_warn,
        ),
    };
    Ok(Recipe { regime, loss: l, params, warning })
}

/// [`analytic_recipe`] converted to model units.
pub fn analytic_solution(regime: Regime, l: f64) -> Result<PairParams> {
    Ok(analytic_recipe(regime, l)?.params.to_pair_params())
}

/// Antisymmetric detunings `delta1 = -delta2 = target + excess e^{-rate t}`
/// on top of `base`, held constant over steps of `spacing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningSchedule {
    pub base: PairParams,
    pub target: f64,
    pub excess: f64,
    pub rate: f64,
    pub spacing: f64,
}

impl DetuningSchedule {
    /// Starts at `target + alpha` (reported units) and relaxes to the
    /// first-order detuning at the rate `alpha sqrt(l/2)` it settles on.
    pub fn first_order(l: f64) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::InvalidParameter(format!("schedule needs l > 0, got {l}")));
        }
        let base = analytic_solution(Regime::SingleFirstOrder, l)?;
        let alpha = base.alpha1.norm();
        let rate = alpha * (l / 2.0).sqrt();
        // Reported detunings are half the model ones.
        Ok(Self { base, target: base.delta1, excess: 2.0 * alpha, rate, spacing: 0.05 / rate })
    }

    /// The same operating point with the detuning fixed at its target.
    pub fn frozen(&self) -> Self {
        Self { excess: 0.0, ..*self }
    }

    pub fn params_at(&self, t: f64) -> PairParams {
        let d = self.target + self.excess * (-self.rate * t).exp();
        PairParams { delta1: d, delta2: -d, ..self.base }
    }
}

impl Schedule for DetuningSchedule {
    fn model_at(&self, t: f64) -> Result<LindbladModel> {
        build_reduced(&self.params_at(t))
    }
    fn final_model(&self) -> Result<LindbladModel> {
        build_reduced(&self.params_at(f64::INFINITY))
    }
    fn switch_spacing(&self) -> Option<f64> {
        (self.excess != 0.0).then_some(self.spacing)
    }
}

/// Amplitude efficiency `eta` of a line with power loss `attenuation` dB per
/// unit length over `distance`.
pub fn distance_to_efficiency(distance: f64, attenuation: f64) -> Result<f64> {
    if !(distance >= 0.0 && attenuation >= 0.0) {
        return Err(Error::InvalidParameter("distance and attenuation must be >= 0".into()));
    }
    Ok(10f64.powf(-attenuation * distance / 10.0).sqrt())
}
