mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use common::*;
use proptest::prelude::*;
use r2tr_core::hamiltonian::RotatingFrameHamiltonian;
use r2tr_core::linalg::{expm_hermitian, max_abs, zeros};
use r2tr_core::propagator::*;
use r2tr_core::spin::{spin_operator, Axis};
use r2tr_core::units::hz_to_angular;
use r2tr_core::{BasisLabel, GateMatrix, QuantumState, RfDrive};

fn basis(s: &str) -> QuantumState {
    QuantumState::basis(&s.parse::<BasisLabel>().unwrap())
}

#[test]
fn constant_hamiltonian_is_exact() {
    let w = 2.0e4;
    let iz = spin_operator(2, 0, Axis::Z).unwrap();
    let h = iz.scale(w);
    let t = 3.7e-4;
    for integ in [Integrator::Midpoint, Integrator::Magnus4] {
        let u = segment_propagator(|_| h.clone(), 0.0, t, 17, integ).unwrap();
        let exact = expm_hermitian(&iz, w * t);
        assert!(max_abs(&(u.matrix() - exact)) < 1e-12);
    }
}

#[test]
fn zero_hamiltonian_is_identity() {
    let u = segment_propagator(|_| zeros(4), 0.0, 1.0, 10, Integrator::Magnus4).unwrap();
    assert!(u.distance(&GateMatrix::identity(2)) < 1e-15);
}

#[test]
fn segment_argument_checks() {
    assert!(segment_propagator(|_| zeros(4), 1.0, 0.0, 10, Integrator::Magnus4).is_err());
    assert!(segment_propagator(|_| zeros(4), 0.0, 1.0, 0, Integrator::Magnus4).is_err());
    let nan = |_| zeros(4).map(|_| num_complex::Complex64::new(f64::NAN, 0.0));
    assert!(segment_propagator(nan, 0.0, 1.0, 4, Integrator::Magnus4).is_err());
}

fn fig3a_period_propagator(steps: usize, integ: Integrator) -> GateMatrix {
    let sys = glycine();
    let drive = RfDrive::new(hz_to_angular(FIG3A_RF_HZ)).unwrap();
    let ham = RotatingFrameHamiltonian::new(&sys, Some(&drive), true).unwrap();
    segment_propagator(|t| ham.at(t), 0.0, sys.rotor_period(), steps, integ).unwrap()
}

#[test]
fn step_doubling_converges() {
    let a = fig3a_period_propagator(1000, Integrator::Magnus4);
    let b = fig3a_period_propagator(2000, Integrator::Magnus4);
    let diff = max_abs(&(a.matrix() - b.matrix()));
    println!("Magnus4 step doubling: {diff:.2e}");
    assert!(diff < 1e-8);
    assert!(a.unitarity_error() < 1e-10 && b.unitarity_error() < 1e-10);
}

#[test]
fn midpoint_converges_at_second_order() {
    let a = fig3a_period_propagator(1000, Integrator::Midpoint);
    let b = fig3a_period_propagator(2000, Integrator::Midpoint);
    let c = fig3a_period_propagator(4000, Integrator::Midpoint);
    let d1 = max_abs(&(a.matrix() - b.matrix()));
    let d2 = max_abs(&(b.matrix() - c.matrix()));
    assert!((d1 / d2 - 4.0).abs() < 0.2, "ratio {}", d1 / d2);
}

#[test]
fn ideal_pulse_examples() {
    let pi_x = IdealRotation::new(vec![0], PulseAxis::X, PI);
    let flipped = apply_ideal_pulse(&basis("00"), &pi_x).unwrap();
    assert!((flipped.population(&"10".parse().unwrap()) - 1.0).abs() < 1e-12);

    let half = IdealRotation::new(vec![0, 1], PulseAxis::Y, FRAC_PI_2);
    let diag = QuantumState::new(basis("00").rho().scale(0.7) + basis("11").rho().scale(0.3)).unwrap();
    let out = apply_ideal_pulse(&diag, &half).unwrap();
    assert!(out.hygiene_error() < 1e-12);
    let ix = spin_operator(2, 0, Axis::X).unwrap();
    let sx = spin_operator(2, 1, Axis::X).unwrap();
    assert!((out.expectation(&ix) - out.expectation(&sx)).norm() < 1e-12);
    assert!(out.expectation(&ix).re.abs() > 0.1);

    let twice = apply_ideal_pulse(&flipped, &pi_x).unwrap();
    for label in BasisLabel::all(2) {
        assert!((twice.population(&label) - basis("00").population(&label)).abs() < 1e-12);
    }
    assert!(IdealRotation::new(vec![], PulseAxis::X, PI).gate(2).is_err());
}

#[test]
fn empty_sequence_gives_identity() {
    let u = extract_gate(&glycine(), &[], &PropagatorConfig::default(), true).unwrap();
    assert!(u.distance(&GateMatrix::identity(2)) < 1e-15);
}

#[test]
fn two_half_pulses_make_a_pi_pulse() {
    let half = PulseEvent::Rotation(IdealRotation::new(vec![1], PulseAxis::X, FRAC_PI_2));
    let u = extract_gate(&glycine(), &[half.clone(), half], &PropagatorConfig::default(), false).unwrap();
    let pi = IdealRotation::new(vec![1], PulseAxis::X, PI).gate(2).unwrap();
    assert!(u.distance(&pi) < 1e-12);
}

#[test]
fn invalid_events_are_rejected() {
    let sys = glycine();
    let bad = PulseEvent::Delay { duration: -1.0, dipolar_on: true };
    assert!(run_sequence(&basis("00"), &sys, &[bad], 1e-5, &PropagatorConfig::default()).is_err());
    let ok = PulseEvent::Delay { duration: 1e-4, dipolar_on: true };
    assert!(run_sequence(&basis("00"), &sys, &[ok], 0.0, &PropagatorConfig::default()).is_err());
    let three = QuantumState::basis(&"000".parse().unwrap());
    assert!(run_sequence(&three, &sys, &[], 1e-5, &PropagatorConfig::default()).is_err());
}

#[test]
fn trajectory_grid_and_csv() {
    let sys = glycine();
    let events = [invert_i(), cw(FIG3A_RF_HZ, 5e-4), PulseEvent::Delay { duration: 2.5e-4, dipolar_on: true }];
    let traj = run_sequence(&basis("00"), &sys, &events, 5e-5, &PropagatorConfig::default()).unwrap();
    assert_eq!(traj.len(), 16);
    assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    assert!(traj.hygiene_error < 1e-10);
    // Sample at t = 0 is taken after the instantaneous inversion.
    assert!((traj.spin(0)[0] + 0.5).abs() < 1e-12);
    let csv = traj.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t_s,Iz,Sz"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 3);
    // 12 significant digits: d.ddddddddddde±x
    assert_eq!(row[1].split('e').next().unwrap().trim_start_matches('-').len(), 13);
}

#[test]
fn event_serialization_round_trip() {
    let events = vec![invert_i(), cw(FIG3A_RF_HZ, 1e-3), PulseEvent::Delay { duration: 1e-4, dipolar_on: false }];
    let json = serde_json::to_string(&events).unwrap();
    let back: Vec<PulseEvent> = serde_json::from_str(&json).unwrap();
    assert_eq!(events, back);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sequences_preserve_state_hygiene(
        rf in 0.0..12_000.0f64,
        dur in 0.0..4e-4f64,
        angle in -PI..PI,
        dip in any::<bool>(),
    ) {
        let sys = glycine();
        let events = [
            PulseEvent::Rotation(IdealRotation::new(vec![0, 1], PulseAxis::Y, angle)),
            cw(rf, dur),
            PulseEvent::Delay { duration: dur, dipolar_on: dip },
        ];
        let cfg = PropagatorConfig { steps_per_period: 64, ..Default::default() };
        let traj = run_sequence(&basis("01"), &sys, &events, 2e-5, &cfg).unwrap();
        prop_assert!(traj.hygiene_error < 1e-10);
        prop_assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        let u = extract_gate(&sys, &events, &cfg, false).unwrap();
        prop_assert!(u.unitarity_error() < 1e-9);
    }
}
