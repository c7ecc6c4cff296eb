//! Boundary conversions. Everything inside the crate is rad/s and radians.

use std::f64::consts::TAU;

/// Reduced Planck constant, J·s (CODATA 2018).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Magnetic constant over 4π, T·m/A (CODATA 2018).
pub const MU0_OVER_4PI: f64 = 1.000_000_000_55e-7;

/// ¹³C gyromagnetic ratio, rad·s⁻¹·T⁻¹.
pub const GAMMA_13C: f64 = 6.7283e7;

/// Directly bonded C–C distance in glycine, metres.
pub const GLYCINE_CC_DISTANCE: f64 = 1.53e-10;

pub const ANGSTROM: f64 = 1e-10;

pub fn hz_to_angular(f: f64) -> f64 {
    TAU * f
}

pub fn angular_to_hz(w: f64) -> f64 {
    w / TAU
}

/// Chemical shift in ppm to Hz for a spectrometer frequency given in MHz.
pub fn ppm_to_hz(shift_ppm: f64, carrier_mhz: f64) -> f64 {
    shift_ppm * carrier_mhz
}
