//! The figure and utility experiments. Each returns its artifacts in memory;
//! nothing is written until the whole run has succeeded.

use dissipnet::lindblad::{convergence_time, liouvillian, spectral_gap, DensityMatrix};
use dissipnet::metrics::{bell_fidelity, concurrence, purity, singlet, state_fidelity};
use dissipnet::models::{
    analytic_recipe, analytic_solution, full_steady_concurrence, qubit_pair, reduce_full, steady, steady_concurrence,
    Architecture, DetuningSchedule, PairParams, Regime,
};
use dissipnet::noise::{calibration_scan, noisy_steady_concurrence, RtnProcess, Symmetry};
use dissipnet::optimize::{optimize_concurrence, optimize_general_lindblad, sweep_loss, Optimum, SweepResult};
use rayon::prelude::*;

use crate::config::{
    spaced, CalibrationSection, Config, Experiment, GridSection, OptimizerSection, Spacing, Units,
};
use crate::output::{heatmap, line_plot, num, Heatmap, LinePlot, Series, Table};
use crate::CliError;

pub enum Artifact {
    Csv(String, Table),
    Svg(String, String),
}

pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Lines for standard output.
    pub summary: Vec<String>,
}

const DEFAULT_LOSS_GRID: (f64, f64, usize, Spacing) = (0.01, 0.95, 25, Spacing::Log);

fn solver(context: String) -> impl FnOnce(dissipnet::Error) -> CliError {
    move |e| CliError::Solver(format!("{context}: {e}"))
}

pub fn run(experiment: Experiment, config: &Config, seed: u64) -> Result<Outcome, CliError> {
    config.check_for(experiment)?;
    match experiment {
        Experiment::Fig2 => fig2(config),
        Experiment::Fig3 => fig3(config),
        Experiment::Fig4 => fig4(config),
        Experiment::Fig5 => fig5(config, seed),
        Experiment::Fig6 => fig6(config),
        Experiment::SteadyState => steady_state_run(config),
        Experiment::Optimize => optimize_run(config),
        Experiment::Sweep => sweep_run(config),
        Experiment::GeneralLindblad => general_run(config),
    }
}

fn series(name: &str, xs: &[f64], ys: impl IntoIterator<Item = f64>) -> Series {
    Series { name: name.into(), points: xs.iter().copied().zip(ys).collect() }
}

fn fig2(config: &Config) -> Result<Outcome, CliError> {
    let grid = GridSection::resolve(config.grid.as_ref(), DEFAULT_LOSS_GRID)?;
    let rows: Vec<[f64; 3]> = grid
        .par_iter()
        .map(|&l| {
            let recipe = analytic_recipe(Regime::SingleFirstOrder, l).map_err(solver(format!("fig2 at l={l}")))?;
            let alpha = recipe.params.alpha[0].re;
            let mut naive = recipe.params.clone();
            naive.delta = [0.01 * alpha, -0.01 * alpha];
            let mut dephasing = recipe.params.clone();
            dephasing.relaxation_ratio = [0.0, 0.0];
            dephasing.dephasing_ratio = [l, 0.0];
            let c = |p: PairParams| steady_concurrence(&p).map_err(solver(format!("fig2 at l={l}")));
            Ok([
                c(naive.to_pair_params())?,
                c(recipe.params.to_pair_params())?,
                c(dephasing.to_pair_params())?,
            ])
        })
        .collect::<Result<_, CliError>>()?;
    let mut table = Table::new(&["loss", "naive_relaxation", "recipe_relaxation", "recipe_dephasing"]);
    for (l, r) in grid.iter().zip(&rows) {
        table.push_numbers(&[*l, r[0], r[1], r[2]]);
    }
    let plot = LinePlot {
        title: "Steady concurrence vs intrinsic loss ratio",
        x_label: "intrinsic loss ratio",
        y_label: "concurrence",
        log_x: true,
        log_y: false,
        series: vec![
            series("naive, relaxation", &grid, rows.iter().map(|r| r[0])),
            series("first order, relaxation", &grid, rows.iter().map(|r| r[1])),
            series("first order, dephasing", &grid, rows.iter().map(|r| r[2])),
        ],
    };
    Ok(Outcome {
        artifacts: vec![Artifact::Csv("fig2.csv".into(), table), Artifact::Svg("fig2.svg".into(), line_plot(&plot))],
        summary: vec![format!("fig2: {} loss points", grid.len())],
    })
}

fn fig3(config: &Config) -> Result<Outcome, CliError> {
    let grid = GridSection::resolve(config.grid.as_ref(), (0.001, 0.1, 8, Spacing::Log))?;
    if grid[0] <= 0.0 {
        return Err(CliError::config("fig3: loss values must be positive"));
    }
    let epsilon = config.convergence.as_ref().and_then(|c| c.epsilon).unwrap_or(1e-2);
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CliError::config("convergence.epsilon must lie in (0, 1)"));
    }
    let scale = 1.0 / config.reference_rate;
    let rows: Vec<[f64; 3]> = grid
        .par_iter()
        .map(|&l| {
            let ctx = || format!("fig3 at l={l}");
            let schedule = DetuningSchedule::first_order(l).map_err(solver(ctx()))?;
            let rho0 = DensityMatrix::from_pure(qubit_pair(), &qubit_pair().basis_state(&[0, 0]).expect("valid index"))
                .map_err(solver(ctx()))?;
            let c = steady_concurrence(&schedule.base).map_err(solver(ctx()))?;
            let t_static = convergence_time(&schedule.frozen(), &rho0, epsilon, None).map_err(solver(ctx()))?;
            let t_sched = convergence_time(&schedule, &rho0, epsilon, None).map_err(solver(ctx()))?;
            Ok([c, t_static.time * scale, t_sched.time * scale])
        })
        .collect::<Result<_, CliError>>()?;
    let mut table = Table::new(&["loss", "concurrence", "time_static", "time_scheduled", "speedup"]);
    for (l, r) in grid.iter().zip(&rows) {
        table.push_numbers(&[*l, r[0], r[1], r[2], r[1] / r[2]]);
    }
    let cs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let plot = LinePlot {
        title: "Convergence time vs achievable concurrence",
        x_label: "steady concurrence",
        y_label: "convergence time",
        log_x: false,
        log_y: true,
        series: vec![
            series("static detuning", &cs, rows.iter().map(|r| r[1])),
            series("scheduled detuning", &cs, rows.iter().map(|r| r[2])),
        ],
    };
    Ok(Outcome {
        artifacts: vec![Artifact::Csv("fig3.csv".into(), table), Artifact::Svg("fig3.svg".into(), line_plot(&plot))],
        summary: rows
            .iter()
            .zip(&grid)
            .map(|(r, l)| format!("fig3: l={} speedup {:.3}", num(*l), r[1] / r[2]))
            .collect(),
    })
}

/// Recipe concurrence per loss point; `None` where the recipe has no unique
/// steady state (a recipe used far outside its regime can switch a drive off).
fn recipe_curve(regime: Regime, grid: &[f64]) -> Result<Vec<Option<f64>>, CliError> {
    grid.par_iter()
        .map(|&l| {
            let p = analytic_solution(regime, l).map_err(solver(format!("{} recipe at l={l}", regime.name())))?;
            match steady_concurrence(&p) {
                Ok(c) => Ok(Some(c)),
                Err(dissipnet::Error::DegenerateSteadyState { .. }) => Ok(None),
                Err(e) => Err(solver(format!("{} recipe at l={l}", regime.name()))(e)),
            }
        })
        .collect()
}

fn sweep_values(sweep: &SweepResult, label: &str) -> Result<Vec<f64>, CliError> {
    sweep
        .points
        .iter()
        .zip(&sweep.losses)
        .map(|(p, l)| match p {
            Ok(o) => Ok(o.concurrence),
            Err(e) => Err(CliError::Solver(format!("{label} at l={l}: {e}"))),
        })
        .collect()
}

fn fig4(config: &Config) -> Result<Outcome, CliError> {
    let grid = GridSection::resolve(config.grid.as_ref(), DEFAULT_LOSS_GRID)?;
    let specs = [Architecture::Cascaded, Architecture::Bidirectional]
        .map(|a| OptimizerSection::spec(config.optimizer.as_ref(), a));
    let [cs, bs] = specs;
    let (cs, bs) = (cs?, bs?);
    let (cascaded, bidirectional) = rayon::join(
        || sweep_loss(Architecture::Cascaded, &grid, &cs),
        || sweep_loss(Architecture::Bidirectional, &grid, &bs),
    );
    let cascaded = cascaded.map_err(solver("fig4 cascaded sweep".into()))?;
    let bidirectional = bidirectional.map_err(solver("fig4 bidirectional sweep".into()))?;

    let mut artifacts = Vec::new();
    let mut plot_series = Vec::new();
    let mut summary = Vec::new();
    for (arch, sweep, low, high) in [
        ("cascaded", &cascaded, Regime::CascadedLowLoss, Regime::CascadedHighLoss),
        ("bidirectional", &bidirectional, Regime::BidirLowLoss, Regime::BidirHighLoss),
    ] {
        let opt = sweep_values(sweep, arch)?;
        let lo = recipe_curve(low, &grid)?;
        let hi = recipe_curve(high, &grid)?;
        let mut table = Table::new(&["loss", "concurrence_analytic_low", "concurrence_analytic_high", "concurrence_optimized"]);
        let cell = |v: Option<f64>| v.map_or(String::new(), num);
        for k in 0..grid.len() {
            table.push(vec![num(grid[k]), cell(lo[k]), cell(hi[k]), num(opt[k])]);
        }
        let undefined = lo.iter().chain(&hi).filter(|v| v.is_none()).count();
        if undefined > 0 {
            summary.push(format!("fig4: {arch} recipes undefined at {undefined} points (empty cells)"));
        }
        artifacts.push(Artifact::Csv(format!("fig4_{arch}.csv"), table));
        plot_series.push(series(&format!("{arch} optimized"), &grid, opt.iter().copied()));
        let defined = |v: &[Option<f64>]| v.iter().map(|x| x.unwrap_or(f64::NAN)).collect::<Vec<_>>();
        plot_series.push(series(&format!("{arch} low-loss recipe"), &grid, defined(&lo)));
        plot_series.push(series(&format!("{arch} high-loss recipe"), &grid, defined(&hi)));
        summary.push(format!("fig4: {arch} optimized C from {:.4} to {:.4}", opt[0], opt[opt.len() - 1]));
    }
    let plot = LinePlot {
        title: "Steady concurrence vs channel loss",
        x_label: "channel loss",
        y_label: "concurrence",
        log_x: true,
        log_y: false,
        series: plot_series,
    };
    artifacts.push(Artifact::Svg("fig4.svg".into(), line_plot(&plot)));
    Ok(Outcome { artifacts, summary })
}

/// `[model]` if given, otherwise the single-cavity first-order point at a
/// relaxation ratio of 0.15.
fn model_or_default(config: &Config) -> Result<PairParams, CliError> {
    match &config.model {
        Some(m) => m.pair_params(config.reference_rate),
        None => analytic_solution(Regime::SingleFirstOrder, 0.15).map_err(solver("default model".into())),
    }
}

fn fig5(config: &Config, seed: u64) -> Result<Outcome, CliError> {
    let p = model_or_default(config)?;
    let n = config.noise.clone().unwrap_or_default();
    let amplitudes = n.amplitudes.unwrap_or_else(|| spaced(0.0, 0.1, 6, Spacing::Linear));
    let rates = n.switch_rates.unwrap_or_else(|| spaced(0.01, 100.0, 8, Spacing::Log));
    let trajectories = n.trajectories.unwrap_or(100);
    let window = n.window.unwrap_or(50.0);
    let symmetry: Symmetry = n.symmetry.map_or(Symmetry::Antisymmetric, Into::into);
    if amplitudes.is_empty() || amplitudes.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
        return Err(CliError::config("noise.amplitudes must be finite and >= 0"));
    }
    if rates.is_empty() || rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(CliError::config("noise.switch_rates must be finite and > 0"));
    }
    if trajectories == 0 || !(window > 0.0) {
        return Err(CliError::config("noise: need trajectories >= 1 and window > 0"));
    }
    let model = dissipnet::models::build_reduced(&p).map_err(solver("fig5 model".into()))?;
    let gap = spectral_gap(&liouvillian(&model).map_err(solver("fig5 model".into()))?).map_err(solver("fig5 model".into()))?;

    let mut table = Table::new(&["amplitude", "switch_rate_over_gap", "mean_concurrence", "std_error", "noiseless"]);
    let mut surface = vec![vec![0.0; rates.len()]; amplitudes.len()];
    for (i, &a) in amplitudes.iter().enumerate() {
        for (j, &r) in rates.iter().enumerate() {
            let process = RtnProcess {
                amplitude: a,
                switch_rate: r * gap,
                seed: seed.wrapping_add((i * rates.len() + j) as u64),
                symmetry,
            };
            let res = noisy_steady_concurrence(&p, &process, trajectories, Some(window / gap))
                .map_err(solver(format!("fig5 at amplitude={a}, switch_rate={r}")))?;
            table.push_numbers(&[a, r, res.mean_concurrence, res.std_error, res.noiseless]);
            surface[i][j] = res.mean_concurrence;
        }
    }
    let log_rates: Vec<f64> = rates.iter().map(|r| r.log10()).collect();
    let svg = heatmap(&Heatmap {
        title: "Mean concurrence under telegraph noise",
        x_label: "noise amplitude",
        y_label: "log10 switching rate / gap",
        xs: &amplitudes,
        ys: &log_rates,
        values: &surface,
    });
    Ok(Outcome {
        artifacts: vec![Artifact::Csv("fig5.csv".into(), table), Artifact::Svg("fig5.svg".into(), svg)],
        summary: vec![format!("fig5: {}x{} grid, gap {}", amplitudes.len(), rates.len(), num(gap * config.reference_rate))],
    })
}

fn fig6(config: &Config) -> Result<Outcome, CliError> {
    let p = model_or_default(config)?;
    let (f1, f2, grid) = CalibrationSection::resolve(config.calibration.as_ref())?;
    let surface = calibration_scan(&p, (f1, &grid), (f2, &grid)).map_err(solver("fig6 reference point".into()))?;
    let mut table = Table::new(&[&format!("deviation_{}", f1.name()), &format!("deviation_{}", f2.name()), "concurrence", "failed"]);
    for (i, d1) in grid.iter().enumerate() {
        for (j, d2) in grid.iter().enumerate() {
            table.push(vec![num(*d1), num(*d2), num(surface.values[i][j]), (surface.failed[i][j] as u8).to_string()]);
        }
    }
    let failed = surface.failed.iter().flatten().filter(|f| **f).count();
    let svg = heatmap(&Heatmap {
        title: "Steady concurrence under calibration drift",
        x_label: &format!("relative deviation of {}", f1.name()),
        y_label: &format!("relative deviation of {}", f2.name()),
        xs: &grid,
        ys: &grid,
        values: &surface.values,
    });
    let mut summary = vec![format!("fig6: reference concurrence {:.6}", surface.reference)];
    if failed > 0 {
        summary.push(format!("fig6: {failed} grid points failed to solve and were recorded as 0"));
    }
    Ok(Outcome { artifacts: vec![Artifact::Csv("fig6.csv".into(), table), Artifact::Svg("fig6.svg".into(), svg)], summary })
}

/// Parameters back in config units (model convention).
fn param_rows(p: &PairParams, reference: f64) -> Vec<(&'static str, f64)> {
    let r = reference;
    let q = r.sqrt();
    vec![
        ("alpha1_re", p.alpha1.re * r),
        ("alpha1_im", p.alpha1.im * r),
        ("alpha2_re", p.alpha2.re * r),
        ("alpha2_im", p.alpha2.im * r),
        ("delta1", p.delta1 * r),
        ("delta2", p.delta2 * r),
        ("s1_re", p.s1.re * q),
        ("s1_im", p.s1.im * q),
        ("s2_re", p.s2.re * q),
        ("s2_im", p.s2.im * q),
        ("gamma_r1", p.gamma_r1 * q),
        ("gamma_r2", p.gamma_r2 * q),
        ("gamma_phi1", p.gamma_phi1 * q),
        ("gamma_phi2", p.gamma_phi2 * q),
        ("eta_mag", p.eta_mag),
        ("phi", p.phi),
    ]
}

fn steady_state_run(config: &Config) -> Result<Outcome, CliError> {
    let m = config.model.as_ref().ok_or_else(|| CliError::config("steady_state needs a [model] section"))?;
    let p = m.pair_params(config.reference_rate)?;
    let rho = steady(&p).map_err(solver("steady state".into()))?;
    let model = dissipnet::models::build_reduced(&p).map_err(solver("steady state".into()))?;
    let gap = spectral_gap(&liouvillian(&model).map_err(solver("steady state".into()))?).map_err(solver("spectral gap".into()))?;
    let c = concurrence(&rho).map_err(solver("concurrence".into()))?;
    let mut table = Table::new(&["quantity", "value"]);
    let mut push = |k: &str, v: f64| table.push(vec![k.into(), num(v)]);
    push("concurrence", c);
    push("purity", purity(&rho));
    push("singlet_fidelity", state_fidelity(&rho, &singlet()).map_err(solver("fidelity".into()))?);
    push("bell_fidelity", bell_fidelity(&rho).map_err(solver("fidelity".into()))?);
    push("gap", gap * config.reference_rate);
    let mut summary = vec![format!("concurrence {c:.6}")];
    if let Some(cav) = &config.cavity {
        let cp = cav.params(p, config.reference_rate);
        let n_start = cav.n_start.unwrap_or(3);
        let n_cap = cav.n_cap.unwrap_or(6);
        if n_start < 1 || n_cap < n_start {
            return Err(CliError::config("cavity: need 1 <= n_start <= n_cap"));
        }
        let arch = p.architecture;
        let e = reduce_full(&cp, arch, n_start).map_err(solver("adiabatic elimination".into()))?;
        let (full, n) = full_steady_concurrence(&cp, arch, n_start, n_cap).map_err(solver("full cavity model".into()))?;
        push("full_concurrence", full);
        push("fock_cutoff", n as f64);
        for (k, ratio) in e.validity_ratios.iter().enumerate() {
            push(&format!("validity_ratio{}", k + 1), *ratio);
        }
        let eliminated = PairParams { s1: e.amplitudes[0], s2: e.amplitudes[1], ..p };
        push("eliminated_concurrence", steady_concurrence(&eliminated).map_err(solver("eliminated model".into()))?);
        summary.push(format!("full cavity concurrence {full:.6} (Fock cutoff {n})"));
        if e.warn() {
            summary.push(format!("warning: validity ratios {:?} exceed the dispersive regime", e.validity_ratios));
        }
    }
    Ok(Outcome { artifacts: vec![Artifact::Csv("steady_state.csv".into(), table)], summary })
}

fn optimum_table(o: &Optimum, reference: f64) -> Table {
    let mut table = Table::new(&["quantity", "value"]);
    table.push(vec!["concurrence".into(), num(o.concurrence)]);
    table.push(vec!["evals".into(), o.evals.to_string()]);
    table.push(vec!["budget_exhausted".into(), (o.budget_exhausted as u8).to_string()]);
    for (k, v) in param_rows(&o.params, reference) {
        table.push(vec![k.into(), num(v)]);
    }
    table
}

fn optimize_run(config: &Config) -> Result<Outcome, CliError> {
    let m = config.model.clone().unwrap_or_default();
    let arch = m.architecture();
    let l = m.loss.unwrap_or(0.0);
    let mut spec = OptimizerSection::spec(config.optimizer.as_ref(), arch)?;
    if m.has_explicit_params() {
        spec.seeds = vec![m.pair_params(config.reference_rate)?];
    }
    let o = optimize_concurrence(arch, l, &spec).map_err(solver(format!("optimize at l={l}")))?;
    let mut summary = vec![format!("optimized concurrence {:.6} after {} evaluations", o.concurrence, o.evals)];
    if o.budget_exhausted {
        summary.push("warning: evaluation budget exhausted".into());
    }
    Ok(Outcome { artifacts: vec![Artifact::Csv("optimize.csv".into(), optimum_table(&o, config.reference_rate))], summary })
}

fn sweep_run(config: &Config) -> Result<Outcome, CliError> {
    let m = config.model.clone().unwrap_or_default();
    if m.has_explicit_params() || m.loss.is_some() || m.units != Units::Model {
        return Err(CliError::config("sweep reads only model.architecture"));
    }
    let arch = m.architecture();
    let grid = GridSection::resolve(config.grid.as_ref(), DEFAULT_LOSS_GRID)?;
    let spec = OptimizerSection::spec(config.optimizer.as_ref(), arch)?;
    let sweep = sweep_loss(arch, &grid, &spec).map_err(solver("sweep".into()))?;
    let values = sweep_values(&sweep, "sweep")?;
    let names: Vec<&str> = param_rows(&PairParams::default(), 1.0).iter().map(|r| r.0).collect();
    let mut header = vec!["loss", "concurrence", "evals", "budget_exhausted"];
    header.extend(names);
    let mut table = Table::new(&header);
    for (l, point) in grid.iter().zip(&sweep.points) {
        let o = point.as_ref().expect("checked above");
        let mut row = vec![num(*l), num(o.concurrence), o.evals.to_string(), (o.budget_exhausted as u8).to_string()];
        row.extend(param_rows(&o.params, config.reference_rate).into_iter().map(|(_, v)| num(v)));
        table.push(row);
    }
    let plot = LinePlot {
        title: &format!("Optimized concurrence, {}", arch.name()),
        x_label: "loss",
        y_label: "concurrence",
        log_x: true,
        log_y: false,
        series: vec![series(arch.name(), &grid, values)],
    };
    Ok(Outcome {
        artifacts: vec![Artifact::Csv("sweep.csv".into(), table), Artifact::Svg("sweep.svg".into(), line_plot(&plot))],
        summary: vec![format!("sweep: {} points", grid.len())],
    })
}

fn general_run(config: &Config) -> Result<Outcome, CliError> {
    let grid = match &config.grid {
        Some(g) => GridSection::resolve(Some(g), DEFAULT_LOSS_GRID)?,
        None => vec![0.2, 0.5, 0.8],
    };
    let spec = OptimizerSection::spec(config.optimizer.as_ref(), Architecture::Bidirectional)?;
    let sweep = sweep_loss(Architecture::Bidirectional, &grid, &spec).map_err(solver("bidirectional sweep".into()))?;
    let bidir = sweep_values(&sweep, "bidirectional sweep")?;
    let general: Vec<f64> = grid
        .par_iter()
        .zip(&sweep.points)
        .map(|(&l, o)| {
            let seed = o.as_ref().expect("checked above").params;
            optimize_general_lindblad(l, &[seed], &spec)
                .map(|r| r.1)
                .map_err(solver(format!("general search at l={l}")))
        })
        .collect::<Result<_, CliError>>()?;
    let mut table = Table::new(&["loss", "concurrence_bidirectional", "concurrence_general", "excess"]);
    for k in 0..grid.len() {
        table.push_numbers(&[grid[k], bidir[k], general[k], general[k] - bidir[k]]);
    }
    let plot = LinePlot {
        title: "General two-channel search vs bidirectional optimum",
        x_label: "loss",
        y_label: "concurrence",
        log_x: false,
        log_y: false,
        series: vec![series("bidirectional", &grid, bidir.iter().copied()), series("general", &grid, general.iter().copied())],
    };
    Ok(Outcome {
        artifacts: vec![
            Artifact::Csv("general_lindblad.csv".into(), table),
            Artifact::Svg("general_lindblad.svg".into(), line_plot(&plot)),
        ],
        summary: grid
            .iter()
            .zip(bidir.iter().zip(&general))
            .map(|(l, (b, g))| format!("general_lindblad: l={} bidirectional {b:.4} general {g:.4}", num(*l)))
            .collect(),
    })
}
