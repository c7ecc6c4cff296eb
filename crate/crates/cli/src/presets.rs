//! Built-in reproductions of the glycine experiments: the exchange curves
//! on and off the flip-flop condition and the readout truth table.

use r2tr_core::propagator::PulseAxis;

use crate::config::*;

pub const GLYCINE_OFFSETS_HZ: [f64; 2] = [2000.0, 18699.0];
pub const FIG3A_AMPLITUDE_HZ: f64 = 2339.0;
pub const FIG3B_AMPLITUDE_HZ: f64 = 8823.0;
/// Half the exchange period as read off the measured curve.
pub const REFERENCE_HALF_PERIOD_S: f64 = 1.6e-3;

fn glycine_spins() -> SpinBlock {
    SpinBlock {
        gamma: None,
        r_angstrom: Some(1.53),
        coupling_hz: None,
        theta_d_deg: 64.0,
        phi_deg: 0.0,
        spin_rate_hz: 7884.0,
        offsets_hz: Some(GLYCINE_OFFSETS_HZ.to_vec()),
        shifts_ppm: None,
        carrier_mhz: None,
        reference_ppm: 0.0,
        pairs: None,
    }
}

/// Selective π on I, then trimmed CW for `duration_s`.
pub fn exchange(amplitude_hz: f64, duration_s: f64) -> ExperimentConfig {
    ExperimentConfig {
        schema: SCHEMA_VERSION,
        spins: glycine_spins(),
        drive: Some(DriveBlock { amplitude_hz, carrier_hz: 0.0, phase_deg: 0.0, trim: true, omit_trim: Vec::new() }),
        sequence: vec![
            EventSpec::Pulse { targets: vec![0], axis: PulseAxis::X, angle_deg: 180.0 },
            EventSpec::Cw { duration_s, amplitude_hz: None },
        ],
        initial: Some("00".into()),
        integrator: IntegratorBlock::default(),
        solve: SolveBlock::default(),
        simulate: SimulateBlock::default(),
        readout: ReadoutBlock::default(),
        gate: GateBlock::default(),
    }
}

/// Two predicted exchange periods.
pub fn fig3a() -> ExperimentConfig {
    exchange(FIG3A_AMPLITUDE_HZ, 6.5e-3)
}

pub fn fig3b() -> ExperimentConfig {
    exchange(FIG3B_AMPLITUDE_HZ, 5e-3)
}

/// Preparation pulses for `label` (π about x on every spin in |1⟩), then the
/// recoupling block for `duration_s`.
pub fn fig4_run(label: &str, duration_s: f64) -> ExperimentConfig {
    let mut cfg = exchange(FIG3A_AMPLITUDE_HZ, duration_s);
    let targets: Vec<usize> = label.chars().enumerate().filter(|(_, c)| *c == '1').map(|(k, _)| k).collect();
    cfg.sequence.remove(0);
    if !targets.is_empty() {
        cfg.sequence.insert(0, EventSpec::Pulse { targets, axis: PulseAxis::X, angle_deg: 180.0 });
    }
    cfg
}
