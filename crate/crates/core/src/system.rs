//! Register geometry, spinning and RF drive parameters.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin;
use crate::units::{HBAR, MU0_OVER_4PI};

/// Dipolar prefactor (μ₀/4π)·γ²ħ/r³ in rad/s.
pub fn dipolar_prefactor(gamma: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: format!("internuclear distance must be positive, got {r}"),
        });
    }
    Ok(MU0_OVER_4PI * gamma * gamma * HBAR / r.powi(3))
}

/// Folds an angle into [0, π/2] using θ → −θ and θ → π − θ.
pub fn fold_theta(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    if t > FRAC_PI_2 {
        PI - t
    } else {
        t
    }
}

/// Coupling geometry of one spin pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipolarPair {
    pub i: usize,
    pub j: usize,
    /// (μ₀/4π)·γ²ħ/r³, rad/s.
    pub omega_full: f64,
    /// Angle between the internuclear vector and the rotor axis, in [0, π/2].
    pub theta_d: f64,
}

impl DipolarPair {
    pub fn from_distance(i: usize, j: usize, gamma: f64, r: f64, theta_d: f64) -> Result<Self> {
        Self::from_prefactor(i, j, dipolar_prefactor(gamma, r)?, theta_d)
    }

    pub fn from_prefactor(i: usize, j: usize, omega_full: f64, theta_d: f64) -> Result<Self> {
        if i == j {
            return Err(Error::SamePair(i));
        }
        if !(omega_full >= 0.0) || !omega_full.is_finite() {
            return Err(Error::InvalidParameter {
                name: "omega_full",
                reason: format!("must be finite and non-negative, got {omega_full}"),
            });
        }
        Ok(Self { i, j, omega_full, theta_d: fold_theta(theta_d) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinSystem {
    /// Gyromagnetic ratio, rad·s⁻¹·T⁻¹.
    pub gamma: f64,
    /// Initial rotor phase φ.
    pub phi: f64,
    /// Spinning angular frequency ω_R.
    pub omega_r: f64,
    /// Resonance offsets from the reference carrier, one per spin.
    pub offsets: Vec<f64>,
    pub pairs: Vec<DipolarPair>,
}

impl SpinSystem {
    pub fn new(
        gamma: f64,
        phi: f64,
        omega_r: f64,
        offsets: Vec<f64>,
        pairs: Vec<DipolarPair>,
    ) -> Result<Self> {
        spin::check_register(offsets.len())?;
        if offsets.len() < 2 {
            return Err(Error::RegisterSize(offsets.len()));
        }
        if !(omega_r > 0.0) || !omega_r.is_finite() {
            return Err(Error::InvalidParameter {
                name: "omega_r",
                reason: format!("spinning frequency must be positive, got {omega_r}"),
            });
        }
        for p in &pairs {
            for idx in [p.i, p.j] {
                if idx >= offsets.len() {
                    return Err(Error::SpinIndex { index: idx, n_spins: offsets.len() });
                }
            }
        }
        Ok(Self { gamma, phi, omega_r, offsets, pairs })
    }

    /// Two-spin register coupled through a single pair at distance `r`.
    pub fn two_spin(
        gamma: f64,
        r: f64,
        theta_d: f64,
        phi: f64,
        omega_r: f64,
        offsets: [f64; 2],
    ) -> Result<Self> {
        let pair = DipolarPair::from_distance(0, 1, gamma, r, theta_d)?;
        Self::new(gamma, phi, omega_r, offsets.to_vec(), vec![pair])
    }

    pub fn n_spins(&self) -> usize {
        self.offsets.len()
    }

    pub fn rotor_period(&self) -> f64 {
        2.0 * PI / self.omega_r
    }

    pub fn pair(&self, i: usize, j: usize) -> Option<&DipolarPair> {
        self.pairs
            .iter()
            .find(|p| (p.i == i && p.j == j) || (p.i == j && p.j == i))
    }

    pub fn with_phi(&self, phi: f64) -> Self {
        Self { phi, ..self.clone() }
    }
}

/// Continuous-wave irradiation. `carrier_shift` moves the RF carrier away
/// from the reference frame in which [`SpinSystem::offsets`] are quoted, so
/// the offsets seen during the drive are `offset − carrier_shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfDrive {
    /// ω₁, rad/s.
    pub amplitude: f64,
    pub carrier_shift: f64,
    pub phase: f64,
}

impl RfDrive {
    pub fn new(amplitude: f64) -> Result<Self> {
        Self::with_carrier(amplitude, 0.0, 0.0)
    }

    pub fn with_carrier(amplitude: f64, carrier_shift: f64, phase: f64) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidParameter {
                name: "amplitude",
                reason: format!("RF amplitude must be non-negative, got {amplitude}"),
            });
        }
        Ok(Self { amplitude, carrier_shift, phase })
    }

    pub fn offsets(&self, system: &SpinSystem) -> Vec<f64> {
        system.offsets.iter().map(|o| o - self.carrier_shift).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{angular_to_hz, GAMMA_13C, GLYCINE_CC_DISTANCE};

    #[test]
    fn glycine_prefactor() {
        let w = dipolar_prefactor(GAMMA_13C, GLYCINE_CC_DISTANCE).unwrap();
        assert!((angular_to_hz(w) - 2122.0).abs() < 1.0, "{}", angular_to_hz(w));
    }

    #[test]
    fn theta_folding() {
        assert!((fold_theta(0.3) - 0.3).abs() < 1e-15);
        assert!((fold_theta(PI - 0.3) - 0.3).abs() < 1e-15);
        assert!((fold_theta(-0.3) - 0.3).abs() < 1e-15);
        assert!((fold_theta(FRAC_PI_2) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(dipolar_prefactor(GAMMA_13C, 0.0).is_err());
        assert!(dipolar_prefactor(GAMMA_13C, -1e-10).is_err());
        assert!(SpinSystem::two_spin(GAMMA_13C, 1.5e-10, 1.0, 0.0, 0.0, [0.0, 0.0]).is_err());
        assert!(DipolarPair::from_prefactor(1, 1, 1.0, 0.0).is_err());
        let bad_pair = DipolarPair::from_prefactor(0, 2, 1.0, 0.0).unwrap();
        assert!(SpinSystem::new(GAMMA_13C, 0.0, 1.0, vec![0.0, 0.0], vec![bad_pair]).is_err());
        assert!(RfDrive::new(-1.0).is_err());
    }
}
