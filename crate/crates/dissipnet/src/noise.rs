//! Telegraph noise on the drives and static calibration scans.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lindblad::{liouvillian, spectral_gap, steady_state, Stepper};
use crate::metrics::concurrence;
use crate::models::{build_reduced, steady_concurrence, PairParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symmetry {
    /// `alpha1 (1 + e)`, `alpha2 (1 - e)`.
    Antisymmetric,
    /// Both drives `(1 + e)`.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtnProcess {
    /// Fractional deviation, 0.1 for 10 %.
    pub amplitude: f64,
    /// Mean switching rate (inverse correlation time).
    pub switch_rate: f64,
    pub seed: u64,
    pub symmetry: Symmetry,
}

impl RtnProcess {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.switch_rate >= 0.0) {
            return Err(Error::InvalidParameter("amplitude and switch rate must be >= 0".into()));
        }
        Ok(())
    }
}

/// Telegraph signal on the grid `k * step`, `k < ceil(duration / step)`,
/// for trajectory `stream`.
pub fn sample_rtn_stream(process: &RtnProcess, duration: f64, step: f64, stream: u64) -> Result<Vec<f64>> {
    process.validate()?;
    if !(duration > 0.0 && step > 0.0) {
        return Err(Error::InvalidParameter("duration and step must be positive".into()));
    }
    let n = (duration / step).ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(process.seed);
    rng.set_stream(stream);
    let mut positive = rng.random_bool(0.5);
    let holding = (process.switch_rate > 0.0)
        .then(|| Exp::new(process.switch_rate).expect("positive rate"));
    let mut next_switch = holding.as_ref().map_or(f64::INFINITY, |d| d.sample(&mut rng));
    let mut signal = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 * step;
        while t >= next_switch {
            positive = !positive;
            next_switch += holding.as_ref().unwrap().sample(&mut rng);
        }
        signal.push(if positive { process.amplitude } else { -process.amplitude });
    }
    Ok(signal)
}

pub fn sample_rtn(process: &RtnProcess, duration: f64, step: f64) -> Result<Vec<f64>> {
    sample_rtn_stream(process, duration, step, 0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseResult {
    pub mean_concurrence: f64,
    pub std_error: f64,
    pub n_trajectories: usize,
    pub time_window: f64,
    pub noiseless: f64,
    pub gap: f64,
}

/// Drive-perturbed copy of `p` for a noise value `e`.
pub fn perturbed_drives(p: &PairParams, e: f64, symmetry: Symmetry) -> PairParams {
    let second = match symmetry {
        Symmetry::Antisymmetric => 1.0 - e,
        Symmetry::Symmetric => 1.0 + e,
    };
    PairParams { alpha1: p.alpha1 * (1.0 + e), alpha2: p.alpha2 * second, ..*p }
}

/// Dissipative gap of the noiseless model.
pub fn noiseless_gap(p: &PairParams) -> Result<f64> {
    spectral_gap(&liouvillian(&build_reduced(p)?)?)
}

/// Trajectory-averaged concurrence under telegraph noise on the drives.
/// Each trajectory starts in the noiseless steady state, runs a burn-in of
/// `20 / gap` and averages over `window` (default `50 / gap`). Trajectory
/// `k` uses RNG stream `k`, so results do not depend on scheduling.
pub fn noisy_steady_concurrence(
    p: &PairParams,
    process: &RtnProcess,
    n_traj: usize,
    window: Option<f64>,
) -> Result<NoiseResult> {
    process.validate()?;
    if n_traj == 0 {
        return Err(Error::InvalidParameter("need at least one trajectory".into()));
    }
    let base = liouvillian(&build_reduced(p)?)?;
    let rho_ss = steady_state(&base)?;
    let noiseless = concurrence(&rho_ss)?;
    let gap = spectral_gap(&base)?;
    let window = window.unwrap_or(50.0 / gap);
    let burn_in = 20.0 / gap;
    let mut dt = 0.05 / gap;
    if process.switch_rate > 0.0 {
        dt = dt.min(0.1 / process.switch_rate);
    }
    let n_burn = (burn_in / dt).ceil() as usize;
    let n_window = ((window / dt).ceil() as usize).max(1);
    let stride = (n_window / 1000).max(1);

    let stepper_for = |e: f64| -> Result<Stepper> {
        let model = build_reduced(&perturbed_drives(p, e, process.symmetry))?;
        Ok(Stepper::new(&liouvillian(&model)?, dt))
    };
    let plus = stepper_for(process.amplitude)?;
    let minus = stepper_for(-process.amplitude)?;

    let trajectory = |k: usize| -> Result<f64> {
        let signal = sample_rtn_stream(process, (n_burn + n_window) as f64 * dt, dt, k as u64)?;
        let mut rho = rho_ss.clone();
        let mut acc = 0.0;
        let mut count = 0usize;
        for (i, e) in signal.iter().enumerate().take(n_burn + n_window) {
            rho = if *e >= 0.0 { plus.step(&rho) } else { minus.step(&rho) };
            if i >= n_burn && (i - n_burn) % stride == 0 {
                acc += concurrence(&rho)?;
                count += 1;
            }
        }
        Ok(acc / count as f64)
    };
    let means: Vec<f64> = (0..n_traj).into_par_iter().map(trajectory).collect::<Result<_>>()?;
    let n = means.len() as f64;
    let mean = means.iter().sum::<f64>() / n;
    let var = if means.len() > 1 {
        means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(NoiseResult {
        mean_concurrence: mean,
        std_error: (var / n).sqrt(),
        n_trajectories: means.len(),
        time_window: window,
        noiseless,
        gap,
    })
}

/// A parameter that a calibration scan perturbs by the factor `(1 + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CalibField {
    Alpha1,
    Alpha2,
    Delta1,
    Delta2,
    /// Decay amplitude `s_j`.
    S1,
    S2,
    /// Decay rate `|s_j|^2`, i.e. the amplitude scales by `sqrt(1 + d)`.
    DecayRate1,
    DecayRate2,
}

impl CalibField {
    pub fn name(self) -> &'static str {
        match self {
            CalibField::Alpha1 => "alpha1",
            CalibField::Alpha2 => "alpha2",
            CalibField::Delta1 => "delta1",
            CalibField::Delta2 => "delta2",
            CalibField::S1 => "s1",
            CalibField::S2 => "s2",
            CalibField::DecayRate1 => "decay_rate1",
            CalibField::DecayRate2 => "decay_rate2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        use CalibField::*;
        [Alpha1, Alpha2, Delta1, Delta2, S1, S2, DecayRate1, DecayRate2]
            .into_iter()
            .find(|f| f.name() == name)
    }

    pub fn apply(self, p: &mut PairParams, d: f64) {
        let k = 1.0 + d;
        match self {
            CalibField::Alpha1 => p.alpha1 *= k,
            CalibField::Alpha2 => p.alpha2 *= k,
            CalibField::Delta1 => p.delta1 *= k,
            CalibField::Delta2 => p.delta2 *= k,
            CalibField::S1 => p.s1 *= k,
            CalibField::S2 => p.s2 *= k,
            CalibField::DecayRate1 => p.s1 *= k.sqrt(),
            CalibField::DecayRate2 => p.s2 *= k.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibSurface {
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    /// `values[i][j]` at `(axis1[i], axis2[j])`.
    pub values: Vec<Vec<f64>>,
    /// Points whose steady-state solve failed and were scored 0.
    pub failed: Vec<Vec<bool>>,
    pub reference: f64,
}

/// Steady concurrence with two fields perturbed over a deviation grid.
pub fn calibration_scan(
    p: &PairParams,
    axis1: (CalibField, &[f64]),
    axis2: (CalibField, &[f64]),
) -> Result<CalibSurface> {
    for &d in axis1.1.iter().chain(axis2.1) {
        if !(d > -1.0) {
            return Err(Error::InvalidParameter(format!("deviation {d} must exceed -1")));
        }
    }
    let reference = steady_concurrence(p)?;
    let rows: Vec<Vec<(f64, bool)>> = axis1
        .1
        .par_iter()
        .map(|&d1| {
            axis2
                .1
                .iter()
                .map(|&d2| {
                    let mut q = *p;
                    axis1.0.apply(&mut q, d1);
                    axis2.0.apply(&mut q, d2);
                    match steady_concurrence(&q) {
                        Ok(c) => (c, false),
                        Err(_) => (0.0, true),
                    }
                })
                .collect()
        })
        .collect();
    Ok(CalibSurface {
        axis1: axis1.1.to_vec(),
        axis2: axis2.1.to_vec(),
        values: rows.iter().map(|r| r.iter().map(|x| x.0).collect()).collect(),
        failed: rows.iter().map(|r| r.iter().map(|x| x.1).collect()).collect(),
        reference,
    })
}
