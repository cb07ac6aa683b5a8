mod common;

use common::*;
use dissipnet::c64;
use dissipnet::lindblad::*;
use dissipnet::linalg;
use dissipnet::metrics::{concurrence, purity, state_fidelity};
use dissipnet::models::*;
use dissipnet::operators::*;
use dissipnet::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

fn re(x: f64) -> c64 {
    c64::new(x, 0.0)
}

fn symmetric(architecture: Architecture, delta: f64, alpha: f64, s: f64) -> PairParams {
    PairParams {
        alpha1: re(alpha),
        alpha2: re(alpha),
        delta1: delta,
        delta2: -delta,
        s1: re(s),
        s2: re(s),
        architecture,
        ..Default::default()
    }
}

fn lowering(site: usize) -> Operator {
    embed(&qubit_op(QubitOp::Lower), &HilbertSpace::qubits(2), site).unwrap()
}

#[test]
fn single_cavity_reaches_dark_state() {
    let p = symmetric(Architecture::SingleCavity, 0.3, 1.2, 1.7);
    let (psi, c) = analytic_steady_state(0.3, 1.2).unwrap();
    let rho = steady(&p).unwrap();
    assert!(state_fidelity(&rho, &psi).unwrap() >= 1.0 - 1e-9);
    assert!(close(concurrence(&rho).unwrap(), c, 1e-9));
}

#[test]
fn analytic_state_limits() {
    let (psi, c) = analytic_steady_state(0.0, 2.0).unwrap();
    assert!(close(c, 1.0, 1e-15));
    assert!((psi[1] - re(std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-15);
    assert!(close(analytic_steady_state(0.1, 1.0).unwrap().1, 2.0 / 2.01, 1e-15));
    assert!(analytic_steady_state(0.0, 0.0).is_err());
}

/// At unit efficiency the cascade keeps its directional exchange term, so
/// its generator differs from the shared-cavity one by exactly that term.
#[test]
fn transparent_cascade_adds_only_the_exchange() {
    let single = build_reduced(&symmetric(Architecture::SingleCavity, 0.2, 1.0, 1.3)).unwrap();
    let cascaded = build_reduced(&symmetric(Architecture::Cascaded, 0.2, 1.0, 1.3)).unwrap();
    let ops = cascaded.collapse_ops();
    assert!(ops[0].distance(&single.collapse_ops()[0]).unwrap() < 1e-12);
    assert!(ops[1].frobenius_norm() < 1e-12);
    let (c1, c2) = (lowering(0).scale_re(1.3), lowering(1).scale_re(1.3));
    let exchange = (&(&c2.adjoint() * &c1) - &(&c1.adjoint() * &c2)).scale(c64::new(0.0, -0.5));
    let diff = cascaded.hamiltonian() - single.hamiltonian();
    assert!(diff.distance(&exchange).unwrap() < 1e-12);
    assert!(exchange.frobenius_norm() > 0.1);
}

#[test]
fn transparent_loop_gives_correlated_decay() {
    let m = build_reduced(&symmetric(Architecture::Bidirectional, 0.2, 1.0, 1.3)).unwrap();
    let target = &lowering(0) + &lowering(1);
    for l in m.collapse_ops() {
        let k = target.inner(l).unwrap() / target.inner(&target).unwrap();
        assert!(l.distance(&target.scale(k)).unwrap() < 1e-12);
    }
    assert!(m.hamiltonian().distance(&build_reduced(&symmetric(Architecture::SingleCavity, 0.2, 1.0, 1.3)).unwrap().hamiltonian().clone()).unwrap() < 1e-12);
}

#[test]
fn lossless_complex_loop_rejected() {
    let p = PairParams { phi: 0.7, ..symmetric(Architecture::Bidirectional, 0.2, 1.0, 1.0) };
    assert!(matches!(build_reduced(&p), Err(Error::InvalidParameter(_))));
    assert!(build_reduced(&PairParams { phi: PI, ..p }).is_ok());
}

#[test]
fn intrinsic_operators_are_appended() {
    let p = PairParams { gamma_r1: 0.3, gamma_phi2: 0.2, ..symmetric(Architecture::SingleCavity, 0.2, 1.0, 1.0) };
    let m = build_reduced(&p).unwrap();
    assert_eq!(m.collapse_ops().len(), 3);
    assert!(m.collapse_ops()[1].distance(&lowering(0).scale_re(0.3)).unwrap() < 1e-15);
    let z2 = embed(&qubit_op(QubitOp::Z), &HilbertSpace::qubits(2), 1).unwrap();
    assert!(m.collapse_ops()[2].distance(&z2.scale_re(0.2)).unwrap() < 1e-15);
    assert!(build_reduced(&PairParams { gamma_r2: -0.1, ..p }).is_err());
    assert!(build_reduced(&PairParams { eta_mag: 1.2, ..p }).is_err());
}

#[test]
fn naive_detuning_loses_purity_to_intrinsic_decay() {
    let naive = PairParams { gamma_r1: 0.15, ..symmetric(Architecture::SingleCavity, 0.01, 1.0, 1.0) };
    let tuned = PairParams { delta1: (0.075f64).sqrt(), delta2: -(0.075f64).sqrt(), ..naive };
    assert!(purity(&steady(&naive).unwrap()) < purity(&steady(&tuned).unwrap()));
}

#[test]
fn recipes_in_reported_units() {
    let r = analytic_recipe(Regime::SingleFirstOrder, 0.02).unwrap();
    assert!(close(r.params.delta[0] / r.params.alpha[0].re, 0.1, 1e-12));
    assert!(close(r.params.decay[0].re, 2.0, 0.0));
    assert!(close(r.params.relaxation_ratio[0], 0.02, 0.0));

    let r = analytic_recipe(Regime::CascadedLowLoss, 0.04).unwrap();
    assert!(close(r.params.decay[1].re, 0.64, 1e-12));
    assert!(close(r.params.decay[0].re, 0.6528, 1e-12));
    assert!(close(r.params.phi, 0.0, 0.0) && r.params.relaxation_ratio == [0.0, 0.0]);

    let r = analytic_recipe(Regime::BidirLowLoss, 0.1).unwrap();
    assert!(close(r.params.phi, PI, 0.0));
    assert_eq!(r.params.delta, [0.1, -0.1]);
    assert_eq!(r.params.alpha, [re(1.7), re(-1.7)]);

    let r = analytic_recipe(Regime::CascadedHighLoss, 0.8).unwrap();
    assert!(close(r.params.alpha[1].re, 0.25 - 0.6, 1e-12));
    assert!(close(r.params.decay[1].re, 5.0 - 2.0 * 0.6f64.sqrt(), 1e-12));

    let r = analytic_recipe(Regime::BidirHighLoss, 0.8).unwrap();
    assert!(close(r.params.alpha[0].re, 1.0 - 0.6f64.sqrt(), 1e-12));
    assert!(close(r.params.decay[1].re, 1.7, 0.0));
}

#[test]
fn reported_units_convert_rates_to_amplitudes() {
    let p = analytic_solution(Regime::SingleFirstOrder, 0.02).unwrap();
    assert!(close(p.s1.re, 2f64.sqrt(), 1e-15));
    assert!(close(p.delta1, 0.2, 1e-15) && close(p.delta2, -0.2, 1e-15));
    assert!(close(p.gamma_r1, 0.02 * 2f64.sqrt(), 1e-15));
    let q = p.normalized_to_s1();
    assert!(close(q.s1.re, 1.0, 1e-15));
    assert!(close(steady_concurrence(&p).unwrap(), steady_concurrence(&q).unwrap(), 1e-9));
}

#[test]
fn recipe_warnings_and_range() {
    assert!(analytic_recipe(Regime::CascadedLowLoss, 0.6).unwrap().warning.is_some());
    assert!(analytic_recipe(Regime::CascadedLowLoss, 0.3).unwrap().warning.is_none());
    assert!(analytic_recipe(Regime::BidirHighLoss, 0.5).unwrap().warning.is_some());
    assert!(analytic_recipe(Regime::BidirHighLoss, 0.95).unwrap().warning.is_none());
    assert!(analytic_recipe(Regime::BidirLowLoss, 1.5).is_err());
    for r in Regime::ALL {
        assert_eq!(Regime::from_name(r.name()), Some(r));
    }
}

#[test]
fn asymmetric_single_cavity_benchmark() {
    let reported = ReportedParams {
        architecture: Architecture::SingleCavity,
        alpha: [re(0.88 * 0.8), re(0.79 * 0.8)],
        delta: [0.28 * 0.8, 0.48 * 0.8],
        decay: [re(0.8), re(1.0)],
        relaxation_ratio: [0.02, 0.0],
        dephasing_ratio: [0.0, 0.0],
        eta_mag: 1.0,
        phi: 0.0,
    };
    assert!(steady_concurrence(&reported.to_pair_params()).unwrap() >= 0.93);
}

#[test]
fn efficiency_from_cable_loss() {
    assert_eq!(distance_to_efficiency(0.0, 0.1).unwrap(), 1.0);
    assert!(close(distance_to_efficiency(10.0, 0.1).unwrap().powi(2), 10f64.powf(-0.1), 1e-15));
    assert!(close(distance_to_efficiency(10.0, 0.1).unwrap(), 0.891, 1e-3));
    assert!(close(distance_to_efficiency(30.0, 0.1).unwrap().powi(2), 0.501, 1e-3));
    assert!(distance_to_efficiency(-1.0, 0.1).is_err());
}

fn cavity_params(g: f64, kappa: f64, drive: PairParams) -> CavityParams {
    CavityParams { g1: re(g), g2: re(g), kappa1: kappa, kappa2: kappa, cav_delta1: 0.0, cav_delta2: 0.0, drive }
}

#[test]
fn uncoupled_full_model_relaxes_to_vacuum() {
    let drive = PairParams { alpha1: re(0.0), alpha2: re(0.0), gamma_r1: 0.5, gamma_r2: 0.5, ..Default::default() };
    let full = build_full(&cavity_params(0.0, 1.0, drive), Architecture::SingleCavity, 3).unwrap();
    let rho = steady_state(&liouvillian(&full).unwrap()).unwrap();
    assert!(close(rho.matrix()[(0, 0)].re, 1.0, 1e-10));
}

#[test]
fn dispersive_single_cavity_matches_reduced() {
    let drive = symmetric(Architecture::SingleCavity, 0.1, 1.0, 1.0);
    let cp = cavity_params(20.0, 400.0, drive);
    let e = reduce_full(&cp, Architecture::SingleCavity, 3).unwrap();
    assert!(close(e.validity_ratios[0], 0.1, 1e-6));
    let (full, n) = full_steady_concurrence(&cp, Architecture::SingleCavity, 3, 4).unwrap();
    assert!(n <= 4);
    let reduced = steady_concurrence(&PairParams { s1: e.amplitudes[0], s2: e.amplitudes[1], ..drive }).unwrap();
    assert!(close(full, reduced, 0.02), "{full} vs {reduced}");
}

#[test]
fn dispersive_cascade_matches_reduced() {
    let drive = PairParams { eta_mag: 0.9, ..symmetric(Architecture::Cascaded, 0.1, 1.0, 1.0) };
    let cp = cavity_params(20.0, 400.0, drive);
    let e = reduce_full(&cp, Architecture::Cascaded, 3).unwrap();
    let (full, _) = full_steady_concurrence(&cp, Architecture::Cascaded, 3, 3).unwrap();
    let reduced = steady_concurrence(&PairParams { s1: e.amplitudes[0], s2: e.amplitudes[1], ..drive }).unwrap();
    assert!(close(full, reduced, 0.02), "{full} vs {reduced}");
}

/// Eliminating the cavities of the looped network reproduces the reduced
/// generator exactly, including the loop-induced Hamiltonian.
#[test]
fn looped_elimination_reproduces_reduced_generator() {
    let drive = PairParams { eta_mag: 0.8, phi: 2.1, ..symmetric(Architecture::Bidirectional, 0.1, 0.5, 1.0) };
    let cp = cavity_params(0.5, 40.0, drive);
    let e = reduce_full(&cp, Architecture::Bidirectional, 3).unwrap();
    let reduced = build_reduced(&PairParams { s1: e.amplitudes[0], s2: e.amplitudes[1], ..drive }).unwrap();
    let a = liouvillian(&e.reduced).unwrap();
    let b = liouvillian(&reduced).unwrap();
    assert!(linalg::max_abs(&(a.matrix() - b.matrix())) < 1e-10);
}

#[test]
fn partial_trace_of_product_state() {
    let space = HilbertSpace::new(vec![2, 2, 3]).unwrap();
    let psi = space.basis_state(&[1, 0, 2]).unwrap();
    let rho = DensityMatrix::from_pure(space, &psi).unwrap();
    let q = partial_trace_qubits(&rho, 2).unwrap();
    assert!(close(q.matrix()[(2, 2)].re, 1.0, 1e-15));
    assert!(partial_trace_qubits(&rho, 3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn joint_phase_rotation_leaves_concurrence(theta in 0.0f64..6.3, a1 in 0.3f64..2.0, a2 in 0.3f64..2.0, d in 0.05f64..0.5, s2 in 0.5f64..2.0) {
        let base = PairParams {
            alpha1: re(a1),
            alpha2: re(a2),
            delta1: d,
            delta2: -0.7 * d,
            s1: re(1.0),
            s2: re(s2),
            gamma_r1: 0.05,
            ..Default::default()
        };
        let ph = c64::from_polar(1.0, theta);
        let rotated = PairParams { alpha1: base.alpha1 * ph, alpha2: base.alpha2 * ph, s1: base.s1 * ph, s2: base.s2 * ph, ..base };
        let (c0, c1) = (steady_concurrence(&base).unwrap(), steady_concurrence(&rotated).unwrap());
        prop_assert!((c0 - c1).abs() <= 1e-9);
    }

    #[test]
    fn every_architecture_gives_valid_states(arch in 0usize..3, l in 0.0f64..0.95, phi in 0.0f64..6.3, d in 0.05f64..1.0) {
        let architecture = Architecture::ALL[arch];
        let p = PairParams { phi, ..symmetric(architecture, d, 1.0, 1.0) }.with_loss(l.max(0.05));
        let rho = steady(&p).unwrap();
        prop_assert!(rho.min_eigenvalue().unwrap() >= -1e-8);
        let c = concurrence(&rho).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
    }
}

#[test]
fn detuning_schedule_converges_faster_than_static() {
    let s = DetuningSchedule::first_order(0.01).unwrap();
    assert!(close(s.params_at(0.0).delta1, s.target + s.excess, 1e-15));
    assert!(close(s.params_at(f64::INFINITY).delta1, s.base.delta1, 0.0));
    assert_eq!(s.params_at(3.0).delta2, -s.params_at(3.0).delta1);
    assert!(s.frozen().switch_spacing().is_none());
    assert!(DetuningSchedule::first_order(0.0).is_err());
    let space = qubit_pair();
    let rho0 = DensityMatrix::from_pure(space.clone(), &space.basis_state(&[0, 0]).unwrap()).unwrap();
    let t_static = convergence_time(&s.frozen(), &rho0, 1e-2, None).unwrap().time;
    let t_sched = convergence_time(&s, &rho0, 1e-2, None).unwrap().time;
    assert!(t_sched < t_static, "{t_sched} vs {t_static}");
}
