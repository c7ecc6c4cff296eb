#![allow(dead_code)]

use std::f64::consts::PI;

use r2tr_core::propagator::{CwSegment, IdealRotation, PulseAxis, PulseEvent};
use r2tr_core::units::{hz_to_angular, GAMMA_13C, GLYCINE_CC_DISTANCE};
use r2tr_core::{RfDrive, SpinSystem};

pub const FIG3A_RF_HZ: f64 = 2339.0;
pub const FIG3B_RF_HZ: f64 = 8823.0;

pub fn glycine_with(offsets_hz: [f64; 2], phi: f64) -> SpinSystem {
    SpinSystem::two_spin(
        GAMMA_13C,
        GLYCINE_CC_DISTANCE,
        64f64.to_radians(),
        phi,
        hz_to_angular(7884.0),
        offsets_hz.map(hz_to_angular),
    )
    .unwrap()
}

pub fn glycine() -> SpinSystem {
    glycine_with([2000.0, 18699.0], 0.0)
}

pub fn invert_i() -> PulseEvent {
    PulseEvent::Rotation(IdealRotation::new(vec![0], PulseAxis::X, PI))
}

pub fn cw(rf_hz: f64, duration: f64) -> PulseEvent {
    PulseEvent::Cw(CwSegment::trimmed(RfDrive::new(hz_to_angular(rf_hz)).unwrap(), duration))
}
