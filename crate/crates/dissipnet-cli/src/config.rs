//! Run configuration: a TOML file with a strict schema.
//!
//! Every section rejects unknown keys, and each experiment rejects sections
//! it does not read. Rates are given in units of `reference_rate`; decay and
//! loss amplitudes (square roots of rates) in units of its square root.

use std::path::PathBuf;

use clap::ValueEnum;
use dissipnet::c64;
use dissipnet::models::{analytic_solution, Architecture, CavityParams, PairParams, Regime, ReportedParams};
use dissipnet::noise::{CalibField, Symmetry};
use dissipnet::optimize::{FreeParam, NmOptions, OptimizeSpec};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    SteadyState,
    Optimize,
    Sweep,
    GeneralLindblad,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::Fig6 => "fig6",
            Experiment::SteadyState => "steady_state",
            Experiment::Optimize => "optimize",
            Experiment::Sweep => "sweep",
            Experiment::GeneralLindblad => "general_lindblad",
        }
    }

    fn sections(self) -> &'static [&'static str] {
        match self {
            Experiment::Fig2 => &["grid"],
            Experiment::Fig3 => &["grid", "convergence"],
            Experiment::Fig4 => &["grid", "optimizer"],
            Experiment::Fig5 => &["model", "noise"],
            Experiment::Fig6 => &["model", "calibration"],
            Experiment::SteadyState => &["model", "cavity"],
            Experiment::Optimize => &["model", "optimizer"],
            Experiment::Sweep => &["model", "grid", "optimizer"],
            Experiment::GeneralLindblad => &["grid", "optimizer"],
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Option<Experiment>,
    pub reference_rate: f64,
    pub seed: Option<u64>,
    pub output: Option<OutputSection>,
    pub model: Option<ModelSection>,
    pub cavity: Option<CavitySection>,
    pub grid: Option<GridSection>,
    pub optimizer: Option<OptimizerSection>,
    pub noise: Option<NoiseSection>,
    pub calibration: Option<CalibrationSection>,
    pub convergence: Option<ConvergenceSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    /// Amplitudes and detunings exactly as they enter the generator.
    #[default]
    Model,
    /// Decay rates `|s|^2`, half detunings, and intrinsic loss as a ratio to
    /// `|s_j|`; the convention of the closed-form recipes.
    Reported,
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Complex {
    Real(f64),
    Pair([f64; 2]),
}

impl Complex {
    fn value(self) -> c64 {
        match self {
            Complex::Real(x) => c64::new(x, 0.0),
            Complex::Pair([re, im]) => c64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchitectureName {
    SingleCavity,
    Cascaded,
    Bidirectional,
}

impl From<ArchitectureName> for Architecture {
    fn from(a: ArchitectureName) -> Self {
        match a {
            ArchitectureName::SingleCavity => Architecture::SingleCavity,
            ArchitectureName::Cascaded => Architecture::Cascaded,
            ArchitectureName::Bidirectional => Architecture::Bidirectional,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecipeName {
    SingleFirstOrder,
    CascadedLowLoss,
    CascadedHighLoss,
    BidirLowLoss,
    BidirHighLoss,
}

impl From<RecipeName> for Regime {
    fn from(r: RecipeName) -> Self {
        match r {
            RecipeName::SingleFirstOrder => Regime::SingleFirstOrder,
            RecipeName::CascadedLowLoss => Regime::CascadedLowLoss,
            RecipeName::CascadedHighLoss => Regime::CascadedHighLoss,
            RecipeName::BidirLowLoss => Regime::BidirLowLoss,
            RecipeName::BidirHighLoss => Regime::BidirHighLoss,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default)]
    pub units: Units,
    pub architecture: Option<ArchitectureName>,
    /// Start from a closed-form recipe at `loss`; excludes explicit fields.
    pub recipe: Option<RecipeName>,
    pub alpha1: Option<Complex>,
    pub alpha2: Option<Complex>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub s1: Option<Complex>,
    pub s2: Option<Complex>,
    pub gamma_r1: Option<f64>,
    pub gamma_r2: Option<f64>,
    pub gamma_phi1: Option<f64>,
    pub gamma_phi2: Option<f64>,
    pub eta_mag: Option<f64>,
    /// `sqrt(1 - eta_mag^2)`; for the single cavity, the relaxation ratio
    /// used by recipes and optimizer seeds.
    pub loss: Option<f64>,
    pub phi: Option<f64>,
}

impl ModelSection {
    fn explicit_fields(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut check = |present: bool, name: &'static str| {
            if present {
                out.push(name);
            }
        };
        check(self.alpha1.is_some(), "alpha1");
        check(self.alpha2.is_some(), "alpha2");
        check(self.delta1.is_some(), "delta1");
        check(self.delta2.is_some(), "delta2");
        check(self.s1.is_some(), "s1");
        check(self.s2.is_some(), "s2");
        check(self.gamma_r1.is_some(), "gamma_r1");
        check(self.gamma_r2.is_some(), "gamma_r2");
        check(self.gamma_phi1.is_some(), "gamma_phi1");
        check(self.gamma_phi2.is_some(), "gamma_phi2");
        check(self.eta_mag.is_some(), "eta_mag");
        check(self.phi.is_some(), "phi");
        out
    }

    pub fn has_explicit_params(&self) -> bool {
        self.recipe.is_some() || !self.explicit_fields().is_empty()
    }

    pub fn architecture(&self) -> Architecture {
        match (self.architecture, self.recipe) {
            (Some(a), _) => a.into(),
            (None, Some(r)) => Regime::from(r).architecture(),
            (None, None) => Architecture::SingleCavity,
        }
    }

    /// Model-unit parameters, rates divided by `reference`.
    pub fn pair_params(&self, reference: f64) -> Result<PairParams, CliError> {
        let architecture = self.architecture();
        if let Some(recipe) = self.recipe {
            let regime = Regime::from(recipe);
            if let Some(field) = self.explicit_fields().first() {
                return Err(CliError::config(format!("model.{field} cannot be combined with model.recipe")));
            }
            if regime.architecture() != architecture {
                return Err(CliError::config(format!(
                    "model.recipe {} belongs to architecture {}",
                    regime.name(),
                    regime.architecture().name()
                )));
            }
            let loss = self.loss.ok_or_else(|| CliError::config("model.recipe needs model.loss"))?;
            return analytic_solution(regime, loss).map_err(|e| CliError::config(format!("model.recipe: {e}")));
        }
        if self.loss.is_some() && self.eta_mag.is_some() {
            return Err(CliError::config("model.loss and model.eta_mag are mutually exclusive"));
        }
        let rate = |x: f64| x / reference;
        let amp = |z: c64| z / reference.sqrt();
        let alpha = [self.alpha1, self.alpha2].map(|a| a.map_or(c64::new(1.0, 0.0), Complex::value) / reference);
        let delta = [self.delta1, self.delta2].map(|d| rate(d.unwrap_or(0.0)));
        let s = [self.s1, self.s2].map(|s| s.map_or(c64::new(1.0, 0.0), Complex::value));
        let gamma_r = [self.gamma_r1, self.gamma_r2].map(|g| g.unwrap_or(0.0));
        let gamma_phi = [self.gamma_phi1, self.gamma_phi2].map(|g| g.unwrap_or(0.0));
        let mut p = match self.units {
            Units::Model => PairParams {
                alpha1: alpha[0],
                alpha2: alpha[1],
                delta1: delta[0],
                delta2: delta[1],
                s1: amp(s[0]),
                s2: amp(s[1]),
                gamma_r1: gamma_r[0] / reference.sqrt(),
                gamma_r2: gamma_r[1] / reference.sqrt(),
                gamma_phi1: gamma_phi[0] / reference.sqrt(),
                gamma_phi2: gamma_phi[1] / reference.sqrt(),
                eta_mag: self.eta_mag.unwrap_or(1.0),
                phi: self.phi.unwrap_or(0.0),
                architecture,
            },
            Units::Reported => ReportedParams {
                architecture,
                alpha,
                delta,
                decay: s.map(|z| z / reference),
                relaxation_ratio: gamma_r,
                dephasing_ratio: gamma_phi,
                eta_mag: self.eta_mag.unwrap_or(1.0),
                phi: self.phi.unwrap_or(0.0),
            }
            .to_pair_params(),
        };
        if let Some(l) = self.loss {
            if !(0.0..=1.0).contains(&l) {
                return Err(CliError::config(format!("model.loss {l} outside [0, 1]")));
            }
            if architecture != Architecture::SingleCavity {
                p = p.with_loss(l);
            }
        }
        p.validate().map_err(|e| CliError::config(format!("model: {e}")))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub g1: f64,
    pub g2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    #[serde(default)]
    pub cav_delta1: f64,
    #[serde(default)]
    pub cav_delta2: f64,
    pub n_start: Option<usize>,
    pub n_cap: Option<usize>,
}

impl CavitySection {
    pub fn params(&self, drive: PairParams, reference: f64) -> CavityParams {
        CavityParams {
            g1: c64::new(self.g1 / reference, 0.0),
            g2: c64::new(self.g2 / reference, 0.0),
            kappa1: self.kappa1 / reference,
            kappa2: self.kappa2 / reference,
            cav_delta1: self.cav_delta1 / reference,
            cav_delta2: self.cav_delta2 / reference,
            drive,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

/// Either explicit `values` or `min`, `max`, `points` and `spacing`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub values: Option<Vec<f64>>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: Option<usize>,
    pub spacing: Option<Spacing>,
}

pub fn spaced(min: f64, max: f64, points: usize, spacing: Spacing) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    (0..points)
        .map(|k| {
            let t = k as f64 / (points - 1) as f64;
            if k == points - 1 {
                return max;
            }
            match spacing {
                Spacing::Linear => min + t * (max - min),
                Spacing::Log if k == 0 => min,
                Spacing::Log => (min.ln() + t * (max.ln() - min.ln())).exp(),
            }
        })
        .collect()
}

impl GridSection {
    /// Grid points, falling back to `default` for missing range keys.
    pub fn resolve(section: Option<&GridSection>, default: (f64, f64, usize, Spacing)) -> Result<Vec<f64>, CliError> {
        let g = section.cloned().unwrap_or_default();
        let values = match g.values {
            Some(v) => {
                if g.min.is_some() || g.max.is_some() || g.points.is_some() || g.spacing.is_some() {
                    return Err(CliError::config("grid.values excludes grid.min/max/points/spacing"));
                }
                v
            }
            None => {
                let min = g.min.unwrap_or(default.0);
                let max = g.max.unwrap_or(default.1);
                let points = g.points.unwrap_or(default.2);
                let spacing = g.spacing.unwrap_or(default.3);
                if points == 0 || !(min <= max) {
                    return Err(CliError::config(format!("grid: need points >= 1 and min <= max, got {min}..{max} x {points}")));
                }
                if spacing == Spacing::Log && !(min > 0.0) {
                    return Err(CliError::config("grid: log spacing needs min > 0"));
                }
                spaced(min, max, points, spacing)
            }
        };
        if values.is_empty() || values.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(CliError::config("grid: loss values must lie in [0, 1]"));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CliError::config("grid: values must be strictly increasing"));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub restarts: Option<usize>,
    pub max_evals: Option<usize>,
    pub tol_f: Option<f64>,
    pub tol_x: Option<f64>,
    pub initial_step: Option<f64>,
    pub free: Option<Vec<String>>,
    pub bounds: Option<Vec<[f64; 2]>>,
}

impl OptimizerSection {
    pub fn spec(section: Option<&OptimizerSection>, architecture: Architecture) -> Result<OptimizeSpec, CliError> {
        let o = section.cloned().unwrap_or_default();
        let mut spec = OptimizeSpec::for_architecture(architecture);
        if let Some(names) = &o.free {
            spec.free = names
                .iter()
                .map(|n| FreeParam::from_name(n).ok_or_else(|| CliError::config(format!("optimizer.free: unknown parameter {n:?}"))))
                .collect::<Result<_, _>>()?;
            spec.bounds = spec.free.iter().map(|f| f.default_bounds()).collect();
        }
        if let Some(bounds) = &o.bounds {
            if bounds.len() != spec.free.len() {
                return Err(CliError::config(format!(
                    "optimizer.bounds has {} entries for {} free parameters",
                    bounds.len(),
                    spec.free.len()
                )));
            }
            spec.bounds = bounds.iter().map(|b| (b[0], b[1])).collect();
        }
        let d = NmOptions::default();
        spec.nm = NmOptions {
            tol_f: o.tol_f.unwrap_or(d.tol_f),
            tol_x: o.tol_x.unwrap_or(d.tol_x),
            max_evals: o.max_evals.unwrap_or(d.max_evals),
            initial_step: o.initial_step.unwrap_or(d.initial_step),
        };
        spec.restarts = o.restarts.unwrap_or(spec.restarts);
        spec.validate().map_err(|e| CliError::config(format!("optimizer: {e}")))?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryName {
    Antisymmetric,
    Symmetric,
}

impl From<SymmetryName> for Symmetry {
    fn from(s: SymmetryName) -> Self {
        match s {
            SymmetryName::Antisymmetric => Symmetry::Antisymmetric,
            SymmetryName::Symmetric => Symmetry::Symmetric,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// Fractional drive deviations.
    pub amplitudes: Option<Vec<f64>>,
    /// Mean switching rates in units of the noiseless dissipative gap.
    pub switch_rates: Option<Vec<f64>>,
    pub trajectories: Option<usize>,
    /// Averaging window in units of the inverse gap.
    pub window: Option<f64>,
    pub symmetry: Option<SymmetryName>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    pub field1: Option<String>,
    pub field2: Option<String>,
    pub deviations: Option<Vec<f64>>,
    pub max_deviation: Option<f64>,
    pub points: Option<usize>,
}

impl CalibrationSection {
    pub fn resolve(section: Option<&CalibrationSection>) -> Result<(CalibField, CalibField, Vec<f64>), CliError> {
        let c = section.cloned().unwrap_or_default();
        let field = |name: Option<&String>, default: CalibField, key: &str| match name {
            None => Ok(default),
            Some(n) => CalibField::from_name(n)
                .ok_or_else(|| CliError::config(format!("calibration.{key}: unknown field {n:?}"))),
        };
        let f1 = field(c.field1.as_ref(), CalibField::DecayRate1, "field1")?;
        let f2 = field(c.field2.as_ref(), CalibField::DecayRate2, "field2")?;
        let grid = match c.deviations {
            Some(v) => {
                if c.max_deviation.is_some() || c.points.is_some() {
                    return Err(CliError::config("calibration.deviations excludes max_deviation/points"));
                }
                v
            }
            None => {
                let m = c.max_deviation.unwrap_or(0.3);
                let n = c.points.unwrap_or(13);
                if !(m >= 0.0) || n < 2 {
                    return Err(CliError::config("calibration: need max_deviation >= 0 and points >= 2"));
                }
                spaced(-m, m, n, Spacing::Linear)
            }
        };
        if grid.is_empty() || grid.iter().any(|d| !(*d > -1.0 && d.is_finite())) {
            return Err(CliError::config("calibration: deviations must be finite and exceed -1"));
        }
        Ok((f1, f2, grid))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    pub epsilon: Option<f64>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Config = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        if !(config.reference_rate > 0.0 && config.reference_rate.is_finite()) {
            return Err(CliError::config("reference_rate must be a positive number"));
        }
        Ok(config)
    }

    /// Rejects sections the experiment does not read.
    pub fn check_for(&self, experiment: Experiment) -> Result<(), CliError> {
        if let Some(e) = self.experiment {
            if e != experiment {
                return Err(CliError::config(format!(
                    "config is for experiment {}, not {}",
                    e.name(),
                    experiment.name()
                )));
            }
        }
        let present = [
            ("model", self.model.is_some()),
            ("cavity", self.cavity.is_some()),
            ("grid", self.grid.is_some()),
            ("optimizer", self.optimizer.is_some()),
            ("noise", self.noise.is_some()),
            ("calibration", self.calibration.is_some()),
            ("convergence", self.convergence.is_some()),
        ];
        for (name, here) in present {
            if here && !experiment.sections().contains(&name) {
                return Err(CliError::config(format!(
                    "section [{name}] is not used by experiment {}",
                    experiment.name()
                )));
            }
        }
        Ok(())
    }
}
