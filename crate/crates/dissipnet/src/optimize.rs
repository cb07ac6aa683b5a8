//! Bounded Nelder-Mead search for maximal steady-state concurrence.

use std::f64::consts::PI;

use faer::c64;

use crate::error::{Error, Result};
use crate::lindblad::{liouvillian, steady_state, LindbladModel};
use crate::linalg::{ONE, ZERO};
use crate::metrics::concurrence;
use crate::models::{analytic_solution, network_terms, qubit_pair, steady_concurrence, Architecture, PairParams, Regime};
use crate::operators::{embed, Operator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmOptions {
    pub tol_f: f64,
    pub tol_x: f64,
    pub max_evals: usize,
    /// Initial simplex edge, relative to the bound width.
    pub initial_step: f64,
}

impl Default for NmOptions {
    fn default() -> Self {
        Self { tol_f: 1e-8, tol_x: 1e-8, max_evals: 2000, initial_step: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub budget_exhausted: bool,
}

/// Maximizes `objective` from `x0` inside the box `[lower, upper]`.
///
/// Standard simplex moves (reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5) with trial points clamped to the box. Non-finite values
/// are treated as `-inf` after the start point.
pub fn nelder_mead(
    mut objective: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &NmOptions,
) -> Result<NmResult> {
    let n = x0.len();
    if lower.len() != n || upper.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: lower.len().min(upper.len()) });
    }
    if lower.iter().zip(upper).any(|(l, u)| !(l <= u)) {
        return Err(Error::InvalidParameter("empty bound interval".into()));
    }
    let clamp = |x: &mut Vec<f64>| {
        for ((v, l), u) in x.iter_mut().zip(lower).zip(upper) {
            *v = v.clamp(*l, *u);
        }
    };
    let mut start = x0.to_vec();
    clamp(&mut start);
    let f0 = objective(&start);
    if !f0.is_finite() {
        return Err(Error::NonFiniteObjective);
    }
    let mut evals = 1;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(start.clone(), f0)];
    for i in 0..n {
        let width = upper[i] - lower[i];
        let mut step = opts.initial_step * if width.is_finite() { width } else { 1.0 };
        if step == 0.0 {
            step = 1e-3;
        }
        let mut x = start.clone();
        x[i] = if x[i] + step <= upper[i] { x[i] + step } else { x[i] - step };
        clamp(&mut x);
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }

    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(ai, bi)| ai + t * (bi - ai)).collect()
    };

    loop {
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let spread = simplex[0].1 - simplex[n].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread.abs() < opts.tol_f && diameter < opts.tol_x {
            break;
        }
        if evals >= opts.max_evals {
            let (x, value) = simplex.swap_remove(0);
            return Ok(NmResult { x, value, evals, budget_exhausted: true });
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let mut reflected = combine(&centroid, &worst.0, -1.0);
        clamp(&mut reflected);
        let fr = eval(&reflected, &mut evals);

        if fr > simplex[0].1 {
            let mut expanded = combine(&centroid, &worst.0, -2.0);
            clamp(&mut expanded);
            let fe = eval(&expanded, &mut evals);
            simplex[n] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr > simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (mut contracted, outside) = if fr > worst.1 {
            (combine(&centroid, &reflected, 0.5), true)
        } else {
            (combine(&centroid, &worst.0, 0.5), false)
        };
        clamp(&mut contracted);
        let fc = eval(&contracted, &mut evals);
        if (outside && fc >= fr) || (!outside && fc > worst.1) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for item in simplex.iter_mut().skip(1) {
            let mut x = combine(&best, &item.0, 0.5);
            clamp(&mut x);
            let v = eval(&x, &mut evals);
            *item = (x, v);
        }
    }
    let (x, value) = simplex.swap_remove(0);
    Ok(NmResult { x, value, evals, budget_exhausted: false })
}

/// A real coordinate of [`PairParams`] that the optimizer may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FreeParam {
    Alpha1,
    Alpha2,
    Alpha1Im,
    Alpha2Im,
    Delta1,
    Delta2,
    S1,
    S2,
    Phi,
}

impl FreeParam {
    pub fn name(self) -> &'static str {
        match self {
            FreeParam::Alpha1 => "alpha1",
            FreeParam::Alpha2 => "alpha2",
            FreeParam::Alpha1Im => "alpha1_im",
            FreeParam::Alpha2Im => "alpha2_im",
            FreeParam::Delta1 => "delta1",
            FreeParam::Delta2 => "delta2",
            FreeParam::S1 => "s1",
            FreeParam::S2 => "s2",
            FreeParam::Phi => "phi",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        use FreeParam::*;
        [Alpha1, Alpha2, Alpha1Im, Alpha2Im, Delta1, Delta2, S1, S2, Phi].into_iter().find(|p| p.name() == name)
    }

    pub fn default_bounds(self) -> (f64, f64) {
        match self {
            FreeParam::Alpha1
            | FreeParam::Alpha2
            | FreeParam::Alpha1Im
            | FreeParam::Alpha2Im
            | FreeParam::Delta1
            | FreeParam::Delta2 => (-10.0, 10.0),
            FreeParam::S1 | FreeParam::S2 => (0.0, 10.0),
            FreeParam::Phi => (0.0, 2.0 * PI),
        }
    }

    pub fn get(self, p: &PairParams) -> f64 {
        match self {
            FreeParam::Alpha1 => p.alpha1.re,
            FreeParam::Alpha2 => p.alpha2.re,
            FreeParam::Alpha1Im => p.alpha1.im,
            FreeParam::Alpha2Im => p.alpha2.im,
            FreeParam::Delta1 => p.delta1,
            FreeParam::Delta2 => p.delta2,
            FreeParam::S1 => p.s1.re,
            FreeParam::S2 => p.s2.re,
            FreeParam::Phi => p.phi,
        }
    }

    pub fn set(self, p: &mut PairParams, v: f64) {
        match self {
            FreeParam::Alpha1 => p.alpha1.re = v,
            FreeParam::Alpha2 => p.alpha2.re = v,
            FreeParam::Alpha1Im => p.alpha1.im = v,
            FreeParam::Alpha2Im => p.alpha2.im = v,
            FreeParam::Delta1 => p.delta1 = v,
            FreeParam::Delta2 => p.delta2 = v,
            FreeParam::S1 => p.s1.re = v,
            FreeParam::S2 => p.s2.re = v,
            FreeParam::Phi => p.phi = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeSpec {
    pub free: Vec<FreeParam>,
    pub bounds: Vec<(f64, f64)>,
    /// Start points; empty means the architecture's closed-form recipes.
    pub seeds: Vec<PairParams>,
    pub restarts: usize,
    pub nm: NmOptions,
}

impl OptimizeSpec {
    /// Complex drives, both detunings and a real `s2`, with `s1 = 1` fixed
    /// (local phase rotations make `s1`, `s2` real without loss); the
    /// bidirectional architecture also frees `phi`.
    pub fn for_architecture(architecture: Architecture) -> Self {
        use FreeParam::*;
        let mut free = vec![Alpha1, Alpha2, Alpha1Im, Alpha2Im, Delta1, Delta2, S2];
        if architecture == Architecture::Bidirectional {
            free.push(Phi);
        }
        let bounds = free.iter().map(|p| p.default_bounds()).collect();
        Self { free, bounds, seeds: Vec::new(), restarts: 5, nm: NmOptions::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.free.is_empty() || self.free.len() != self.bounds.len() {
            return Err(Error::InvalidParameter("free parameters and bounds must match and be nonempty".into()));
        }
        if self.bounds.iter().any(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidParameter("empty bound interval".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub params: PairParams,
    pub concurrence: f64,
    pub evals: usize,
    pub budget_exhausted: bool,
}

/// Concurrence with failed solves scored as 0.
pub fn score(p: &PairParams) -> f64 {
    steady_concurrence(p).unwrap_or(0.0)
}

/// Closed-form start points for an architecture at loss `l`, rescaled to
/// `s1 = 1`, plus a symmetric generic point. For the single cavity `l` is
/// the relaxation ratio of qubit 1 and only enters through these seeds.
pub fn default_seeds(architecture: Architecture, l: f64) -> Result<Vec<PairParams>> {
    let regimes: &[Regime] = match architecture {
        Architecture::SingleCavity => &[Regime::SingleFirstOrder],
        Architecture::Cascaded => &[Regime::CascadedLowLoss, Regime::CascadedHighLoss],
        Architecture::Bidirectional => &[Regime::BidirLowLoss, Regime::BidirHighLoss],
    };
    let mut seeds = Vec::new();
    for &r in regimes {
        let mut p = analytic_solution(r, l)?.normalized_to_s1();
        if architecture != Architecture::SingleCavity {
            p = p.with_loss(l);
        }
        seeds.push(p);
    }
    let generic = PairParams {
        architecture,
        delta1: 0.2,
        delta2: -0.2,
        phi: if architecture == Architecture::Bidirectional { PI } else { 0.0 },
        gamma_r1: if architecture == Architecture::SingleCavity { l } else { 0.0 },
        ..PairParams::default()
    };
    seeds.push(generic.with_loss(l));
    Ok(seeds)
}

/// Best concurrence over all seeds; each seed is refined by Nelder-Mead and
/// the overall best is restarted `restarts - 1` more times.
pub fn optimize_concurrence(architecture: Architecture, l: f64, spec: &OptimizeSpec) -> Result<Optimum> {
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::InvalidParameter(format!("loss {l} outside [0, 1]")));
    }
    spec.validate()?;
    let seeds = if spec.seeds.is_empty() { default_seeds(architecture, l)? } else { spec.seeds.clone() };
    let lower: Vec<f64> = spec.bounds.iter().map(|b| b.0).collect();
    let upper: Vec<f64> = spec.bounds.iter().map(|b| b.1).collect();

    let mut best: Option<Optimum> = None;
    let mut total_evals = 0;
    let mut exhausted = false;
    let run = |base: &PairParams, total_evals: &mut usize, exhausted: &mut bool| -> Result<(PairParams, f64)> {
        let mut base = *base;
        base.architecture = architecture;
        if architecture != Architecture::SingleCavity {
            base = base.with_loss(l);
        }
        let seed_value = score(&base);
        let x0: Vec<f64> = spec.free.iter().map(|f| f.get(&base)).collect();
        let apply = |x: &[f64]| {
            let mut p = base;
            for (f, v) in spec.free.iter().zip(x) {
                f.set(&mut p, *v);
            }
            p
        };
        let res = nelder_mead(|x| score(&apply(x)), &x0, &lower, &upper, &spec.nm)?;
        *total_evals += res.evals;
        *exhausted |= res.budget_exhausted;
        let candidate = apply(&res.x);
        // Clamping the seed into the box can lose value; never return less
        // than the seed itself.
        if res.value >= seed_value {
            Ok((candidate, res.value))
        } else {
            Ok((base, seed_value))
        }
    };

    for seed in &seeds {
        let (p, v) = run(seed, &mut total_evals, &mut exhausted)?;
        if best.as_ref().is_none_or(|b| v > b.concurrence) {
            best = Some(Optimum { params: p, concurrence: v, evals: 0, budget_exhausted: false });
        }
    }
    for _ in 1..spec.restarts {
        let start = best.as_ref().unwrap().params;
        let (p, v) = run(&start, &mut total_evals, &mut exhausted)?;
        if v > best.as_ref().unwrap().concurrence {
            best = Some(Optimum { params: p, concurrence: v, evals: 0, budget_exhausted: false });
        } else {
            break;
        }
    }
    let mut best = best.expect("at least one seed");
    let fresh = score(&best.params);
    if (fresh - best.concurrence).abs() > 1e-9 {
        return Err(Error::Eigen(format!(
            "recomputed concurrence {fresh} differs from search value {}",
            best.concurrence
        )));
    }
    best.concurrence = fresh;
    best.evals = total_evals;
    best.budget_exhausted = exhausted;
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub losses: Vec<f64>,
    pub points: Vec<Result<Optimum>>,
}

impl SweepResult {
    /// Concurrence per grid point, `NaN` for failed points.
    pub fn concurrences(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.as_ref().map_or(f64::NAN, |o| o.concurrence)).collect()
    }
}

/// Optimizes along a strictly increasing loss grid, warm-starting each point
/// from the previous optimum in addition to the closed-form seeds.
pub fn sweep_loss(architecture: Architecture, grid: &[f64], spec: &OptimizeSpec) -> Result<SweepResult> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("loss grid must be strictly increasing".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    let mut previous: Option<PairParams> = None;
    for &l in grid {
        let mut point_spec = spec.clone();
        if point_spec.seeds.is_empty() {
            point_spec.seeds = default_seeds(architecture, l)?;
        }
        if let Some(prev) = previous {
            point_spec.seeds.push(prev);
        }
        let result = optimize_concurrence(architecture, l, &point_spec);
        if let Ok(o) = &result {
            previous = Some(o.params);
        }
        points.push(result);
    }
    Ok(SweepResult { losses: grid.to_vec(), points })
}

/// Parameters of the general two-channel search: arbitrary single-qubit jump
/// operators, traceless local Hamiltonians and the channel phase.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralLindblad {
    /// Row-major 2x2 entries of each jump operator, unit Frobenius norm.
    pub jump1: [c64; 4],
    pub jump2: [c64; 4],
    /// Amplitude of the second jump operator relative to the first.
    pub strength2: f64,
    /// `(x, y, z)` of `[[-z, x - iy], [x + iy, z]]` per qubit.
    pub local1: [f64; 3],
    pub local2: [f64; 3],
    pub phi: f64,
    pub eta_mag: f64,
}

const N_GENERAL: usize = 24;

impl GeneralLindblad {
    /// The bidirectional model's parameters in this family.
    pub fn from_pair(p: &PairParams) -> Self {
        let s1 = p.s1.norm().max(1e-300);
        let lower = [ZERO, ONE, ZERO, ZERO];
        let phase = |s: c64| if s.norm() == 0.0 { ONE } else { s / s.norm() };
        let j1 = lower.map(|z| z * phase(p.s1));
        let j2 = lower.map(|z| z * phase(p.s2));
        let local = |a: c64, d: f64| [a.re / (s1 * s1), a.im / (s1 * s1), d / (2.0 * s1 * s1)];
        Self {
            jump1: j1,
            jump2: j2,
            strength2: p.s2.norm() / s1,
            local1: local(p.alpha1, p.delta1),
            local2: local(p.alpha2, p.delta2),
            phi: p.phi,
            eta_mag: p.eta_mag,
        }
    }

    fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(N_GENERAL);
        for z in self.jump1.iter().chain(&self.jump2) {
            v.push(z.re);
            v.push(z.im);
        }
        v.push(self.strength2);
        v.extend(self.local1);
        v.extend(self.local2);
        v.push(self.phi);
        v
    }

    fn from_vec(x: &[f64], eta_mag: f64) -> Self {
        let jump = |o: usize| {
            let mut j = [ZERO; 4];
            for (k, z) in j.iter_mut().enumerate() {
                *z = c64::new(x[o + 2 * k], x[o + 2 * k + 1]);
            }
            let norm = j.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                j.iter_mut().for_each(|z| *z /= norm);
            }
            j
        };
        Self {
            jump1: jump(0),
            jump2: jump(8),
            strength2: x[16],
            local1: [x[17], x[18], x[19]],
            local2: [x[20], x[21], x[22]],
            phi: x[23],
            eta_mag,
        }
    }

    pub fn model(&self) -> Result<LindbladModel> {
        let space = qubit_pair();
        let local_op = |m: [c64; 4], site: usize| -> Result<Operator> {
            let op = Operator::from_fn(&crate::operators::HilbertSpace::qubit(), |i, j| m[2 * i + j]);
            embed(&op, &space, site)
        };
        let herm = |h: [f64; 3]| {
            [c64::new(-h[2], 0.0), c64::new(h[0], -h[1]), c64::new(h[0], h[1]), c64::new(h[2], 0.0)]
        };
        let j1 = local_op(self.jump1, 0)?;
        let j2 = local_op(self.jump2, 1)?.scale_re(self.strength2);
        let (ops, h_net) = network_terms(Architecture::Bidirectional, c64::from_polar(self.eta_mag, self.phi), &j1, &j2)?;
        let h = &(&local_op(herm(self.local1), 0)? + &local_op(herm(self.local2), 1)?) + &h_net;
        LindbladModel::new(h, ops)
    }

    pub fn concurrence(&self) -> Result<f64> {
        concurrence(&steady_state(&liouvillian(&self.model()?)?)?)
    }
}

/// Searches the general two-channel family at loss `l`, seeded from `seeds`
/// (typically the bidirectional optimum). Returns the best member found.
pub fn optimize_general_lindblad(l: f64, seeds: &[PairParams], spec: &OptimizeSpec) -> Result<(GeneralLindblad, f64)> {
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::InvalidParameter(format!("loss {l} outside [0, 1]")));
    }
    spec.validate()?;
    let eta_mag = (1.0 - l * l).sqrt();
    let mut lower = vec![-1.0; N_GENERAL];
    let mut upper = vec![1.0; N_GENERAL];
    lower[16] = 0.0;
    upper[16] = 10.0;
    for k in 17..23 {
        lower[k] = -10.0;
        upper[k] = 10.0;
    }
    lower[23] = 0.0;
    upper[23] = 2.0 * PI;
    let objective = |x: &[f64]| GeneralLindblad::from_vec(x, eta_mag).concurrence().unwrap_or(0.0);

    let mut best: Option<(Vec<f64>, f64)> = None;
    for seed in seeds {
        let start = GeneralLindblad::from_pair(&PairParams { eta_mag, ..*seed });
        let mut x = start.to_vec();
        for r in 0..spec.restarts {
            let res = nelder_mead(objective, &x, &lower, &upper, &spec.nm)?;
            let improved = best.as_ref().is_none_or(|b| res.value > b.1);
            if improved {
                best = Some((res.x.clone(), res.value));
            }
            if r > 0 && !improved {
                break;
            }
            x = res.x;
        }
    }
    let (x, value) = best.ok_or_else(|| Error::InvalidParameter("no seeds given".into()))?;
    let found = GeneralLindblad::from_vec(&x, eta_mag);
    let fresh = found.concurrence().unwrap_or(0.0);
    if (fresh - value).abs() > 1e-9 {
        return Err(Error::Eigen(format!("recomputed concurrence {fresh} differs from search value {value}")));
    }
    Ok((found, fresh))
}
