mod common;

use common::*;
use dissipnet::c64;
use dissipnet::lindblad::LindbladModel;
use dissipnet::linalg::{ONE, ZERO};
use dissipnet::models::{bidirectional_network, cascade_network};
use dissipnet::operators::*;
use dissipnet::slh::*;
use dissipnet::{Error, Mat};
use proptest::prelude::*;

const I: c64 = c64 { re: 0.0, im: 1.0 };

struct Modes {
    space: HilbertSpace,
    a1: Operator,
    a2: Operator,
}

fn modes() -> Modes {
    let space = HilbertSpace::new(vec![3, 3]).unwrap();
    let a = bosonic_annihilator(3).unwrap();
    Modes { a1: embed(&a, &space, 0).unwrap(), a2: embed(&a, &space, 1).unwrap(), space }
}

fn bare_cavity(m: &Modes, mode: &Operator, kappa: f64) -> SlhTriplet {
    cavity(mode, kappa, Operator::zeros(&m.space)).unwrap()
}

fn coef(op: &Operator, mode: &Operator) -> c64 {
    mode_coefficient(op, mode).unwrap()
}

fn cascade(m: &Modes, eta: f64, k1: f64, k2: f64) -> SlhTriplet {
    let c1 = bare_cavity(m, &m.a1, k1);
    let c2 = bare_cavity(m, &m.a2, k2);
    cascade_network(&m.space, &c1, &c2, c64::new(eta, 0.0)).unwrap()
}

/// Heisenberg drift `i[H, X] + sum L^dag X L - {L^dag L, X}/2`.
fn drift(h: &Operator, ls: &[Operator], x: &Operator) -> Operator {
    let mut d = h.commutator(x).unwrap().scale(I);
    for l in ls {
        let ld = l.adjoint();
        d = &d + &(&(&ld * x) * l);
        let n = &ld * l;
        d = &d - &(&(&n * x) + &(x * &n)).scale_re(0.5);
    }
    d
}

#[test]
fn concatenation_stacks_ports() {
    let m = modes();
    let a = bare_cavity(&m, &m.a1, 1.0);
    let bs = beam_splitter(&m.space, c64::new(0.6, 0.0)).unwrap();
    let empty = SlhTriplet::identity(&m.space, 0);
    let same = concatenate(&a, &empty).unwrap();
    assert_eq!(same.n_ports(), 1);
    assert_eq!(same.coupling()[0].distance(&a.coupling()[0]).unwrap(), 0.0);
    let both = concatenate(&bs, &bs).unwrap();
    assert_eq!(both.n_ports(), 4);
    let s = both.scattering();
    for i in 0..4 {
        for j in 0..4 {
            let expected = if i / 2 == j / 2 { bs.scattering()[(i % 2, j % 2)] } else { ZERO };
            assert_eq!(s[(i, j)], expected);
        }
    }
    let other = HilbertSpace::qubits(2);
    assert!(matches!(concatenate(&a, &SlhTriplet::identity(&other, 1)), Err(Error::SpaceMismatch { .. })));
}

#[test]
fn series_with_identity_is_neutral() {
    let m = modes();
    let a = bare_cavity(&m, &m.a1, 2.0);
    let id = SlhTriplet::identity(&m.space, 1);
    for g in [series(&a, &id).unwrap(), series(&id, &a).unwrap()] {
        assert!(g.coupling()[0].distance(&a.coupling()[0]).unwrap() < 1e-15);
        assert!(g.hamiltonian().frobenius_norm() < 1e-15);
        assert_eq!(g.scattering()[(0, 0)], a.scattering()[(0, 0)]);
    }
    assert!(matches!(series(&a, &SlhTriplet::identity(&m.space, 2)), Err(Error::PortMismatch { .. })));
}

#[test]
fn beam_splitter_limits() {
    let sp = HilbertSpace::qubit();
    let s = beam_splitter(&sp, ONE).unwrap();
    assert_eq!(s.scattering()[(0, 0)], ONE);
    assert_eq!(s.scattering()[(0, 1)], ZERO);
    let s = beam_splitter(&sp, ZERO).unwrap();
    assert_eq!(s.scattering()[(0, 0)], ZERO);
    assert_eq!(s.scattering()[(1, 0)], I);
    for eta in [0.0, 0.3, 0.8, 1.0] {
        assert!(beam_splitter(&sp, c64::new(eta, 0.0)).unwrap().unitarity_defect() < 1e-12);
    }
    assert!(matches!(beam_splitter(&sp, c64::new(1.1, 0.0)), Err(Error::InvalidParameter(_))));
}

/// The literal `eta I + i l sigma_x` loses unitarity once `eta` is complex;
/// moving the phase outside restores it.
#[test]
fn complex_channel_needs_an_overall_phase() {
    let sp = HilbertSpace::qubit();
    let eta = c64::from_polar(0.7, 1.1);
    assert!(beam_splitter(&sp, eta).unwrap().unitarity_defect() > 1e-2);
    let u = unitary_beam_splitter(&sp, eta).unwrap();
    assert!(u.unitarity_defect() < 1e-12);
    assert!((u.scattering()[(0, 0)] - eta).norm() < 1e-15);
}

#[test]
fn lossless_cascade_has_no_loss_channel() {
    let m = modes();
    let g = cascade(&m, 1.0, 1.5, 0.7);
    let l = g.coupling();
    let ratio = coef(&l[0], &m.a2) / coef(&l[0], &m.a1);
    assert!((ratio - c64::new(-(0.7f64 / 1.5).sqrt(), 0.0)).norm() < 1e-12);
    assert!(l[1].frobenius_norm() < 1e-15);
}

/// Output field `0.8 a1 - a2` (up to a global sign), loss field `0.6 a1`
/// (up to a phase) and a directional exchange `-0.4 i (a1^dag a2 - a2^dag a1)`.
#[test]
fn cascade_at_eta_0_8() {
    let m = modes();
    let g = cascade(&m, 0.8, 1.0, 1.0);
    let l = g.coupling();
    let sign = coef(&l[0], &m.a1) / 0.8;
    assert!((sign.norm() - 1.0).abs() < 1e-12);
    assert!((coef(&l[0], &m.a2) + sign).norm() < 1e-12);
    assert!((coef(&l[1], &m.a1).norm() - 0.6).abs() < 1e-12);
    assert!(coef(&l[1], &m.a2).norm() < 1e-15);
    let hop = &(&m.a1.adjoint() * &m.a2) - &(&m.a2.adjoint() * &m.a1);
    let expected = hop.scale(c64::new(0.0, -0.4));
    assert!(g.hamiltonian().distance(&expected).unwrap() < 1e-12);
}

#[test]
fn cascade_conserves_upstream_decay_weight() {
    let m = modes();
    for (eta, k1, k2) in [(0.3, 1.0, 2.0), (0.9, 0.4, 0.1), (0.0, 2.0, 1.0)] {
        let g = cascade(&m, eta, k1, k2);
        let w: f64 = g.coupling().iter().map(|l| coef(l, &m.a1).norm_sqr()).sum();
        assert!((w - k1).abs() < 1e-12);
    }
}

#[test]
fn cascade_is_directional() {
    let m = modes();
    let g = cascade(&m, 0.7, 1.3, 0.8);
    let d = drift(g.hamiltonian(), g.coupling(), &m.a1);
    assert!(d.commutator(&m.a2).unwrap().frobenius_norm() < 1e-12);
    assert!(d.commutator(&m.a2.adjoint()).unwrap().frobenius_norm() < 1e-12);
    // The upstream cavity only decays.
    assert!(d.distance(&m.a1.scale_re(-0.65)).unwrap() < 1e-12);
}

#[test]
fn doubled_exchange_breaks_directionality() {
    let m = modes();
    let g = cascade(&m, 0.7, 1.3, 0.8);
    let h = g.hamiltonian().scale_re(2.0);
    let d = drift(&h, g.coupling(), &m.a1);
    assert!(d.commutator(&m.a2.adjoint()).unwrap().frobenius_norm() > 1e-3);
}

fn looped(m: &Modes, eta: c64, k1: f64, k2: f64) -> SlhTriplet {
    let c1 = bare_cavity(m, &m.a1, k1);
    let c2 = bare_cavity(m, &m.a2, k2);
    bidirectional_network(&m.space, &c1, &c2, eta, &[(&m.a1, k1), (&m.a2, k2)]).unwrap()
}

/// Normalized loop result: `[eta sqrt(k1) a1 + sqrt(k2) a2, sqrt(k1) a1 + eta sqrt(k2) a2]`
/// over `sqrt(1 + |eta|^2)`, up to one common phase per channel, plus the
/// exchange and frequency-shift terms.
#[test]
fn loop_elimination_closed_form() {
    let m = modes();
    for (eta, k1, k2) in [
        (c64::from_polar(0.9, 0.4), 1.0, 1.0),
        (c64::from_polar(0.5, 2.0), 0.7, 1.8),
        (c64::from_polar(0.95, -2.5), 2.0, 0.5),
    ] {
        let g = looped(&m, eta, k1, k2);
        let w = (1.0 + eta.norm_sqr()).sqrt();
        let targets = [
            (eta * k1.sqrt() / w, c64::new(k2.sqrt() / w, 0.0)),
            (c64::new(k1.sqrt() / w, 0.0), eta * k2.sqrt() / w),
        ];
        for (l, (t1, t2)) in g.coupling().iter().zip(targets) {
            let (c1, c2) = (coef(l, &m.a1), coef(l, &m.a2));
            let phase = if t1.norm() > t2.norm() { c1 / t1 } else { c2 / t2 };
            assert!((phase.norm() - 1.0).abs() < 1e-12);
            assert!((c1 - phase * t1).norm() < 1e-12 && (c2 - phase * t2).norm() < 1e-12);
        }
        let l2 = 1.0 - eta.norm_sqr();
        let exchange = eta.im / l2 * (k1 * k2).sqrt();
        let shift = (eta * eta).im / (l2 * w.powi(2));
        let hop = &(&m.a1.adjoint() * &m.a2) + &(&m.a2.adjoint() * &m.a1);
        let pops = &(&m.a1.adjoint() * &m.a1).scale_re(k1) + &(&m.a2.adjoint() * &m.a2).scale_re(k2);
        let expected = &hop.scale_re(exchange) + &pops.scale_re(shift);
        assert!(g.hamiltonian().distance(&expected).unwrap() < 1e-12, "eta={eta}");
        assert!(g.hamiltonian().is_hermitian(1e-12));
    }
}

#[test]
fn opaque_channel_gives_independent_decay() {
    let m = modes();
    let g = looped(&m, ZERO, 0.8, 1.7);
    let l = g.coupling();
    assert!(coef(&l[0], &m.a1).norm() < 1e-15 && (coef(&l[0], &m.a2).norm() - 1.7f64.sqrt()).abs() < 1e-12);
    assert!(coef(&l[1], &m.a2).norm() < 1e-15 && (coef(&l[1], &m.a1).norm() - 0.8f64.sqrt()).abs() < 1e-12);
}

#[test]
fn near_transparent_loop_approaches_correlated_decay() {
    let m = modes();
    let g = looped(&m, c64::new(1.0 - 1e-7, 0.0), 1.0, 1.0);
    for l in g.coupling() {
        let r = coef(l, &m.a2) / coef(l, &m.a1);
        assert!((r - ONE).norm() < 1e-6);
    }
}

#[test]
fn lossless_loop_is_singular() {
    let m = modes();
    let c1 = bare_cavity(&m, &m.a1, 1.0);
    let c2 = bare_cavity(&m, &m.a2, 1.0);
    let net = dissipnet::models::bidirectional_graph(&m.space, &c1, &c2, ONE).unwrap();
    assert!(matches!(eliminate_loops(&net), Err(Error::SingularNetwork) | Err(Error::IllConditionedNetwork(_))));
}

/// With `eta sqrt(k1) = sqrt(k2)` the second channel deviates from the
/// symmetric form by `l^2`, so the squared deviation scales as `l^4`.
#[test]
fn loop_asymmetry_is_quadratic_in_loss() {
    let m = modes();
    let mut points = Vec::new();
    for l in [0.05f64, 0.1, 0.2] {
        let eta = (1.0 - l * l).sqrt();
        let k1 = 1.0;
        let k2 = eta * eta * k1;
        let g = looped(&m, c64::new(eta, 0.0), k1, k2);
        let ch = &g.coupling()[1];
        let (c1, c2) = (coef(ch, &m.a1), coef(ch, &m.a2));
        let dev = (c2 - c1).norm_sqr() / c1.norm_sqr();
        points.push((l.ln(), dev.ln()));
    }
    let slope = (points[2].1 - points[0].1) / (points[2].0 - points[0].0);
    assert!((slope / 2.0 - 2.0).abs() <= 0.2, "exponent {}", slope / 2.0);
}

fn jc_pair(g: f64, kappa: f64, detuning: f64) -> (LindbladModel, Vec<CavityCoupling>) {
    let space = HilbertSpace::new(vec![2, 2, 3]).unwrap();
    let a = embed(&bosonic_annihilator(3).unwrap(), &space, 2).unwrap();
    let mut h = (&a.adjoint() * &a).scale_re(detuning);
    for q in 0..2 {
        let sm = embed(&qubit_op(QubitOp::Lower), &space, q).unwrap();
        let t = (&sm * &a.adjoint()).scale_re(g);
        h = &h + &(&t + &t.adjoint());
    }
    let model = LindbladModel::new(h, vec![a.scale_re(kappa.sqrt())]).unwrap();
    let couplings = (0..2)
        .map(|q| CavityCoupling {
            qubit_site: q,
            cavity_site: 2,
            g: c64::new(g, 0.0),
            kappa,
            cavity_detuning: detuning,
            qubit_detuning: 0.0,
        })
        .collect();
    (model, couplings)
}

#[test]
fn resonant_elimination_amplitude() {
    let (g, kappa) = (0.3, 4.0);
    let (model, couplings) = jc_pair(g, kappa, 0.0);
    let e = adiabatic_eliminate(&model, &couplings).unwrap();
    let expected = c64::new(0.0, -2.0 * g / kappa.sqrt());
    for s in &e.amplitudes {
        assert!((s - expected).norm() < 1e-14);
    }
    let space = HilbertSpace::qubits(2);
    let lsum = &embed(&qubit_op(QubitOp::Lower), &space, 0).unwrap() + &embed(&qubit_op(QubitOp::Lower), &space, 1).unwrap();
    assert!(e.reduced.collapse_ops()[0].distance(&lsum.scale(expected)).unwrap() < 1e-12);
    assert!(e.reduced.hamiltonian().frobenius_norm() < 1e-12);
    assert!(!e.warn());
}

#[test]
fn uncoupled_qubit_drops_out() {
    let (model, mut couplings) = jc_pair(0.0, 4.0, 0.5);
    couplings[1].g = ZERO;
    let e = adiabatic_eliminate(&model, &couplings).unwrap();
    assert!(e.amplitudes.iter().all(|s| s.norm() == 0.0));
    assert!(e.reduced.collapse_ops()[0].frobenius_norm() < 1e-15);
}

#[test]
fn strong_coupling_rejected_or_flagged() {
    let (model, couplings) = jc_pair(1.5, 2.0, 0.0);
    assert!(matches!(adiabatic_eliminate(&model, &couplings), Err(Error::EliminationInvalid { .. })));
    let (model, couplings) = jc_pair(0.4, 2.0, 0.0);
    assert!(adiabatic_eliminate(&model, &couplings).unwrap().warn());
}

fn random_triplet(space: &HilbertSpace, v: &[c64]) -> SlhTriplet {
    // Unitary S from a normalized complex pair.
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt().max(1e-9);
    let (a, b) = (v[0] / norm, v[1] / norm);
    let s = Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => a,
        (0, 1) => -b.conj(),
        (1, 0) => b,
        _ => a.conj(),
    });
    let l = vec![op_from(space, &v[2..6]), op_from(space, &v[6..10])];
    SlhTriplet::new(s, l, hermitian_from(space, &v[10..14])).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_is_associative(v1 in proptest::collection::vec(cplx(), 14), v2 in proptest::collection::vec(cplx(), 14), v3 in proptest::collection::vec(cplx(), 14)) {
        let sp = HilbertSpace::qubit();
        let (g1, g2, g3) = (random_triplet(&sp, &v1), random_triplet(&sp, &v2), random_triplet(&sp, &v3));
        let left = series(&series(&g3, &g2).unwrap(), &g1).unwrap();
        let right = series(&g3, &series(&g2, &g1).unwrap()).unwrap();
        for (a, b) in left.coupling().iter().zip(right.coupling()) {
            prop_assert!(a.distance(b).unwrap() < 1e-10);
        }
        prop_assert!(left.hamiltonian().distance(right.hamiltonian()).unwrap() < 1e-10);
        let ds = left.scattering() - right.scattering();
        prop_assert!(dissipnet::linalg::max_abs(&ds) < 1e-10);
    }

    #[test]
    fn unitary_splitter_for_any_phase(mag in 0.0f64..=1.0, phase in 0.0f64..6.3) {
        let sp = HilbertSpace::qubit();
        prop_assert!(unitary_beam_splitter(&sp, c64::from_polar(mag, phase)).unwrap().unitarity_defect() < 1e-12);
    }
}
