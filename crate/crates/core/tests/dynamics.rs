//! Full time-dependent simulations of the glycine pair.

mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use common::*;
use r2tr_core::analysis::{fit_sinusoid, max_deviation, max_transfer, rms};
use r2tr_core::gates::{iswap, locally_equivalent, makhlin_invariants};
use r2tr_core::hamiltonian::{average_hamiltonian, AverageHamiltonianSpec, ConditionClass, DipolarConstants};
use r2tr_core::linalg::expm_hermitian;
use r2tr_core::propagator::*;
use r2tr_core::units::hz_to_angular;
use r2tr_core::{BasisLabel, GateMatrix, QuantumState, RfDrive, SpinSystem};

fn basis(s: &str) -> QuantumState {
    QuantumState::basis(&s.parse::<BasisLabel>().unwrap())
}

fn fig3a_spec(sys: &SpinSystem) -> AverageHamiltonianSpec {
    let drive = RfDrive::new(hz_to_angular(FIG3A_RF_HZ)).unwrap();
    AverageHamiltonianSpec::for_drive(sys, &drive, ConditionClass::FlipFlop, 2).unwrap()
}

fn analytic_period(sys: &SpinSystem) -> f64 {
    let spec = fig3a_spec(sys);
    let k = DipolarConstants::for_pair(sys.pair(0, 1).unwrap());
    TAU / (spec.b_factor.abs() * k.omega_d2)
}

fn exchange(sys: &SpinSystem, rf_hz: f64, duration: f64, sample: f64) -> Trajectory {
    run_sequence(&basis("00"), sys, &[invert_i(), cw(rf_hz, duration)], sample, &PropagatorConfig::default())
        .unwrap()
}

#[test]
fn fig3a_exchange_period_and_amplitude() {
    let sys = glycine();
    let predicted = analytic_period(&sys);
    let traj = exchange(&sys, FIG3A_RF_HZ, 2.0 * predicted, 20e-6);
    let fit = fit_sinusoid(&traj.times, traj.spin(0), predicted, None).unwrap();
    println!("fitted {:.4} ms, analytic {:.4} ms", fit.period * 1e3, predicted * 1e3);
    assert!((fit.period - 3.3e-3).abs() / 3.3e-3 < 0.10);
    assert!((fit.period - predicted).abs() / predicted < 0.05);
    assert!(max_transfer(&traj, 0, 1) >= 0.9);
    assert!(traj.hygiene_error < 1e-10);
}

#[test]
fn fig3a_follows_average_hamiltonian() {
    let sys = glycine();
    let predicted = analytic_period(&sys);
    let traj = exchange(&sys, FIG3A_RF_HZ, predicted, 20e-6);
    let w = TAU / predicted;
    let dev_i = traj.times.iter().zip(traj.spin(0)).map(|(t, z)| z + 0.5 * (w * t).cos());
    let dev_s = traj.times.iter().zip(traj.spin(1)).map(|(t, z)| z - 0.5 * (w * t).cos());
    let r = rms(dev_i.chain(dev_s));
    println!("average-Hamiltonian rms {r:.4}");
    assert!(r <= 0.05);
}

#[test]
fn fig3a_with_s_trim_omitted_still_exchanges() {
    let sys = glycine();
    let predicted = analytic_period(&sys);
    let mut seg = CwSegment::trimmed(RfDrive::new(hz_to_angular(FIG3A_RF_HZ)).unwrap(), 0.5 * predicted);
    seg.skip_trim = vec![1];
    let traj = run_sequence(&basis("00"), &sys, &[invert_i(), PulseEvent::Cw(seg)], 20e-6, &PropagatorConfig::default())
        .unwrap();
    assert!(max_transfer(&traj, 0, 1) >= 0.9);
}

#[test]
fn fig3b_off_condition_transfers_little() {
    let sys = glycine();
    let traj = exchange(&sys, FIG3B_RF_HZ, 5e-3, 20e-6);
    let transfer = max_transfer(&traj, 0, 1);
    println!("fig3b transfer {transfer:.4}, I deviation {:.4}", max_deviation(&traj, 0));
    assert!(transfer < 0.05);
}

fn free_evolution(offsets_hz: [f64; 2]) -> f64 {
    let sys = glycine_with(offsets_hz, 0.0);
    let events = [invert_i(), PulseEvent::Delay { duration: 5e-3, dipolar_on: true }];
    let traj = run_sequence(&basis("00"), &sys, &events, 10e-6, &PropagatorConfig::default()).unwrap();
    assert!(traj.hygiene_error < 1e-10);
    max_transfer(&traj, 0, 1)
}

#[test]
fn default_off_without_rf() {
    // Equal offsets, and offsets separated by 1.5 ω_R (between rotational
    // resonance orders).
    for offsets in [[2000.0, 2000.0], [2000.0, 13826.0]] {
        let t = free_evolution(offsets);
        println!("default-off {offsets:?}: {t:.4}");
        assert!(t < 0.05);
    }
}

#[test]
fn default_off_breaks_down_near_rotational_resonance() {
    // Shift difference 16.7 kHz is within 1 kHz of 2ω_R: free MAS evolution
    // alone then exchanges a sizeable fraction.
    let t = free_evolution([2000.0, 18699.0]);
    println!("glycine offsets, no RF: {t:.4}");
    assert!(t > 0.1);
}

// The flip-flop term never touches |00⟩ or |11⟩.
#[test]
fn average_flip_flop_conserves_outer_populations() {
    let sys = glycine();
    let h = average_hamiltonian(&fig3a_spec(&sys), &sys).unwrap();
    for label in ["00", "11"] {
        for k in 1..=20 {
            let u = GateMatrix::new(expm_hermitian(&h, analytic_period(&sys) * k as f64 / 20.0)).unwrap();
            let p = basis(label).evolve(&u).population(&label.parse().unwrap());
            assert!(1.0 - p < 1e-12);
        }
    }
}

// In the full propagation the untilted single-spin parts of the dipolar term
// mix |00⟩/|11⟩ with their neighbours at ω_R − ω_eI ≈ 4.8 kHz. The loss is
// bounded and oscillatory, about 2% at worst for these parameters, which is
// above the 1% one would like; the bound below pins the measured physics.
#[test]
fn full_flip_flop_outer_population_leak_is_bounded() {
    let sys = glycine();
    let predicted = analytic_period(&sys);
    let cfg = PropagatorConfig::default();
    let mut worst: f64 = 0.0;
    for label in ["00", "11"] {
        for k in 1..=64 {
            let out = evolve_state(&basis(label), &sys, &[cw(FIG3A_RF_HZ, predicted * k as f64 / 64.0)], &cfg).unwrap();
            worst = worst.max(1.0 - out.population(&label.parse().unwrap()));
        }
    }
    println!("largest outer-population loss {worst:.4}");
    assert!(worst < 0.025);
    assert!(worst > 0.01);
}

#[test]
fn average_half_period_gate_is_iswap_class() {
    let sys = glycine();
    let h = average_hamiltonian(&fig3a_spec(&sys), &sys).unwrap();
    let u = expm_hermitian(&h, 0.5 * analytic_period(&sys));
    assert!(locally_equivalent(&u, iswap().matrix(), 1e-9).unwrap());
}

#[test]
fn extracted_half_period_gate_is_near_iswap_class() {
    let sys = glycine();
    let half = 0.5 * analytic_period(&sys);
    let cfg = PropagatorConfig::default();
    let u = extract_gate(&sys, &[cw(FIG3A_RF_HZ, half)], &cfg, true).unwrap();
    assert!(u.unitarity_error() < 1e-9);
    let g = makhlin_invariants(u.matrix()).unwrap();
    let d = g.distance(&makhlin_invariants(iswap().matrix()).unwrap());
    // Non-secular residue shifts G2 by ~5e-2 (G2 ≈ −0.95); G1 stays ≈ 0.
    println!("Makhlin distance to ISWAP: {d:.2e}, g1 = {:.2e}", g.g1);
    assert!(g.g1.norm() < 1e-2);
    assert!(d < 0.1);

    // Precession removal is local, so the class is the same without it.
    let raw = extract_gate(&sys, &[cw(FIG3A_RF_HZ, half)], &cfg, false).unwrap();
    assert!(makhlin_invariants(raw.matrix()).unwrap().distance(&g) < 1e-6);
    let off = extract_gate(&sys, &[cw(FIG3B_RF_HZ, half)], &cfg, true).unwrap();
    assert!(!locally_equivalent(off.matrix(), iswap().matrix(), 0.1).unwrap());
}

// Populations under the average Hamiltonian do not depend on φ: it enters
// only as the phase of the flip-flop term.
#[test]
fn average_dynamics_independent_of_rotor_phase() {
    let base = glycine();
    let period = analytic_period(&base);
    let start = basis("10");
    let reference: Vec<Vec<f64>> = pops_under_average(&base, &start, period);
    for phi in [FRAC_PI_4, FRAC_PI_2] {
        let other = pops_under_average(&base.with_phi(phi), &start, period);
        for (a, b) in reference.iter().flatten().zip(other.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

fn pops_under_average(sys: &SpinSystem, start: &QuantumState, period: f64) -> Vec<Vec<f64>> {
    let h = average_hamiltonian(&fig3a_spec(sys), sys).unwrap();
    (0..50)
        .map(|k| {
            let u = GateMatrix::new(expm_hermitian(&h, period * k as f64 / 50.0)).unwrap();
            let s = start.evolve(&u);
            BasisLabel::all(2).iter().map(|l| s.population(l)).collect()
        })
        .collect()
}

// The full propagation carries small non-secular wiggles that do depend on
// φ; the exchange period does not.
#[test]
fn full_dynamics_period_independent_of_rotor_phase() {
    let base = glycine();
    let predicted = analytic_period(&base);
    let periods: Vec<f64> = [0.0, FRAC_PI_4, FRAC_PI_2]
        .iter()
        .map(|&phi| {
            let traj = exchange(&base.with_phi(phi), FIG3A_RF_HZ, 2.0 * predicted, 20e-6);
            fit_sinusoid(&traj.times, traj.spin(0), predicted, None).unwrap().period
        })
        .collect();
    println!("periods by phase: {periods:?}");
    for p in &periods[1..] {
        assert!((p - periods[0]).abs() / periods[0] < 1e-3);
    }
}
