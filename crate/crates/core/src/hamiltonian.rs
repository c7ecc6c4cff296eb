//! Hamiltonians of a spinning homonuclear register: the MAS-modulated dipolar
//! coupling, the rotating-frame Hamiltonian under CW irradiation, the tilted
//! frame, and the zeroth-order average Hamiltonians of the two recoupling
//! classes.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian, zeros, CMatrix};
use crate::spin::{self, Axis};
use crate::state::GateMatrix;
use crate::system::{dipolar_prefactor, fold_theta, DipolarPair, RfDrive, SpinSystem};

/// Harmonic amplitudes of the spinning-modulated coupling, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipolarConstants {
    pub omega_d1: f64,
    pub omega_d2: f64,
    pub omega_full: f64,
}

impl DipolarConstants {
    pub fn from_prefactor(omega_full: f64, theta_d: f64) -> Self {
        let theta = fold_theta(theta_d);
        Self {
            omega_d1: std::f64::consts::SQRT_2 * omega_full * (2.0 * theta).sin(),
            omega_d2: omega_full * theta.sin().powi(2),
            omega_full,
        }
    }

    pub fn for_pair(pair: &DipolarPair) -> Self {
        Self::from_prefactor(pair.omega_full, pair.theta_d)
    }

    /// ω_d1 for m = 1, ω_d2 for m = 2.
    pub fn harmonic(&self, m: u32) -> Result<f64> {
        match m {
            1 => Ok(self.omega_d1),
            2 => Ok(self.omega_d2),
            other => Err(Error::Harmonic(other)),
        }
    }
}

pub fn dipolar_constants(gamma: f64, r: f64, theta_d: f64) -> Result<DipolarConstants> {
    Ok(DipolarConstants::from_prefactor(dipolar_prefactor(gamma, r)?, theta_d))
}

/// D(t) = ω_d1 cos(ω_R t + φ) + ω_d2 cos 2(ω_R t + φ).
pub fn dipolar_modulation(t: f64, system: &SpinSystem, constants: &DipolarConstants) -> f64 {
    modulation(t, system.omega_r, system.phi, constants)
}

fn modulation(t: f64, omega_r: f64, phi: f64, k: &DipolarConstants) -> f64 {
    let angle = omega_r * t + phi;
    k.omega_d1 * angle.cos() + k.omega_d2 * (2.0 * angle).cos()
}

/// Secular homonuclear coupling operator I_z S_z − ¼(I₊S₋ + I₋S₊) on a pair.
pub fn dipolar_operator(n_spins: usize, (i, j): (usize, usize)) -> Result<CMatrix> {
    let zz = spin::bilinear(n_spins, i, Axis::Z, j, Axis::Z)?;
    let pm = spin::bilinear(n_spins, i, Axis::Plus, j, Axis::Minus)?;
    let mp = spin::bilinear(n_spins, i, Axis::Minus, j, Axis::Plus)?;
    Ok(zz - (pm + mp).scale(0.25))
}

pub fn dipolar_hamiltonian(d_value: f64, n_spins: usize, pair: (usize, usize)) -> Result<CMatrix> {
    Ok(dipolar_operator(n_spins, pair)?.scale(d_value))
}

/// Time-dependent rotating-frame Hamiltonian with its static part cached.
#[derive(Debug, Clone)]
pub struct RotatingFrameHamiltonian {
    static_part: CMatrix,
    couplings: Vec<(DipolarConstants, CMatrix)>,
    omega_r: f64,
    phi: f64,
}

impl RotatingFrameHamiltonian {
    /// Offsets (shifted by the drive carrier), RF and, optionally, every
    /// dipolar pair of `system`.
    pub fn new(system: &SpinSystem, drive: Option<&RfDrive>, dipolar_on: bool) -> Result<Self> {
        let n = system.n_spins();
        let dim = spin::dimension(n);
        let mut static_part = CMatrix::zeros(dim, dim);
        let offsets = match drive {
            Some(d) => d.offsets(system),
            None => system.offsets.clone(),
        };
        for (k, off) in offsets.iter().enumerate() {
            static_part += spin::spin_operator(n, k, Axis::Z)?.scale(*off);
        }
        if let Some(d) = drive {
            if !(d.amplitude >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "amplitude",
                    reason: "RF amplitude must be non-negative".into(),
                });
            }
            let (c, s) = (d.phase.cos(), d.phase.sin());
            for k in 0..n {
                let x = spin::spin_operator(n, k, Axis::X)?;
                let y = spin::spin_operator(n, k, Axis::Y)?;
                static_part += (x.scale(c) + y.scale(s)).scale(d.amplitude);
            }
        }
        let couplings = if dipolar_on {
            system
                .pairs
                .iter()
                .map(|p| Ok((DipolarConstants::for_pair(p), dipolar_operator(n, (p.i, p.j))?)))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(Self { static_part, couplings, omega_r: system.omega_r, phi: system.phi })
    }

    pub fn at(&self, t: f64) -> CMatrix {
        let mut h = self.static_part.clone();
        for (k, op) in &self.couplings {
            let d = modulation(t, self.omega_r, self.phi, k);
            h.zip_apply(op, |a, b| *a += b * d);
        }
        h
    }

    pub fn static_part(&self) -> &CMatrix {
        &self.static_part
    }
}

/// Δω_I I_z + ω₁ I_x + Δω_S S_z + ω₁ S_x + H_D(t), RF phase rotating x towards y.
pub fn rotating_frame_hamiltonian(t: f64, system: &SpinSystem, drive: &RfDrive) -> Result<CMatrix> {
    Ok(RotatingFrameHamiltonian::new(system, Some(drive), true)?.at(t))
}

/// Magnitude and tilt (from the static-field axis) of the effective field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveField {
    pub omega_e: f64,
    pub beta: f64,
}

/// The tilt is `atan2(ω₁, Δω)`, the polar angle of the field (Δω, 0, ω₁)
/// measured from z. Zero field defines β = 0.
pub fn effective_field(delta_omega: f64, omega_1: f64) -> EffectiveField {
    let omega_e = delta_omega.hypot(omega_1);
    let beta = if omega_e == 0.0 { 0.0 } else { omega_1.atan2(delta_omega) };
    EffectiveField { omega_e, beta }
}

/// Effective fields of every spin under `drive`.
pub fn effective_fields(system: &SpinSystem, drive: &RfDrive) -> Vec<EffectiveField> {
    drive
        .offsets(system)
        .into_iter()
        .map(|d| effective_field(d, drive.amplitude))
        .collect()
}

/// Rotation taking z onto the effective-field direction of a drive with RF
/// phase `phase`: exp(−iβ(cos φ_rf I_y − sin φ_rf I_x)) on each spin.
pub fn tilt_rotation(betas: &[f64], phase: f64) -> Result<GateMatrix> {
    let n = betas.len();
    let dim = spin::dimension(n);
    let mut generator = zeros(dim);
    for (k, beta) in betas.iter().enumerate() {
        let x = spin::spin_operator(n, k, Axis::X)?;
        let y = spin::spin_operator(n, k, Axis::Y)?;
        generator += (y.scale(phase.cos()) - x.scale(phase.sin())).scale(*beta);
    }
    Ok(GateMatrix::from_trusted(expm_hermitian(&generator, 1.0)))
}

/// U = exp(−iβ_I I_y)·exp(−iβ_S S_y).
pub fn tilt_transform(beta_i: f64, beta_s: f64) -> GateMatrix {
    tilt_rotation(&[beta_i, beta_s], 0.0).expect("two-spin register")
}

/// Scaling factors (B, Q) of the flip-flop and flop-flop terms.
pub fn bq_factors(beta_i: f64, beta_s: f64) -> (f64, f64) {
    let cc = beta_i.cos() * beta_s.cos();
    let ss = beta_i.sin() * beta_s.sin();
    let b = -(1.0 + cc - 2.0 * ss) / 8.0;
    let q = (1.0 - cc + 2.0 * ss) / 8.0;
    (b, q)
}

/// The two recoupling classes: effective-field difference (zero-quantum,
/// flip-flop) or sum (double-quantum, flop-flop) matched to m·ω_R.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionClass {
    #[serde(rename = "a")]
    FlipFlop,
    #[serde(rename = "b")]
    FlopFlop,
}

impl ConditionClass {
    pub fn letter(self) -> &'static str {
        match self {
            Self::FlipFlop => "a",
            Self::FlopFlop => "b",
        }
    }

    pub fn mechanism(self) -> &'static str {
        match self {
            Self::FlipFlop => "flip-flop",
            Self::FlopFlop => "flop-flop",
        }
    }
}

impl std::str::FromStr for ConditionClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" | "flip-flop" | "flipflop" => Ok(Self::FlipFlop),
            "b" | "flop-flop" | "flopflop" => Ok(Self::FlopFlop),
            other => Err(Error::InvalidParameter {
                name: "class",
                reason: format!("unknown condition class {other:?}"),
            }),
        }
    }
}

pub fn check_harmonic(m: u32) -> Result<()> {
    match m {
        1 | 2 => Ok(()),
        other => Err(Error::Harmonic(other)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageHamiltonianSpec {
    pub condition_class: ConditionClass,
    pub m: u32,
    pub b_factor: f64,
    pub q_factor: f64,
    /// Signed ½·B·ω_dm (class a) or ½·Q·ω_dm (class b), rad/s.
    pub coupling: f64,
    /// m·φ.
    pub phase: f64,
}

impl AverageHamiltonianSpec {
    pub fn new(
        condition_class: ConditionClass,
        m: u32,
        beta_i: f64,
        beta_s: f64,
        constants: &DipolarConstants,
        phi: f64,
    ) -> Result<Self> {
        let omega_dm = constants.harmonic(m)?;
        let (b_factor, q_factor) = bq_factors(beta_i, beta_s);
        let scale = match condition_class {
            ConditionClass::FlipFlop => b_factor,
            ConditionClass::FlopFlop => q_factor,
        };
        Ok(Self {
            condition_class,
            m,
            b_factor,
            q_factor,
            coupling: 0.5 * scale * omega_dm,
            phase: m as f64 * phi,
        })
    }

    /// Spec for pair (0, 1) of `system` under `drive`.
    pub fn for_drive(
        system: &SpinSystem,
        drive: &RfDrive,
        condition_class: ConditionClass,
        m: u32,
    ) -> Result<Self> {
        let pair = system.pair(0, 1).ok_or(Error::InvalidParameter {
            name: "pairs",
            reason: "no coupling between spins 0 and 1".into(),
        })?;
        let fields = effective_fields(system, drive);
        Self::new(
            condition_class,
            m,
            fields[0].beta,
            fields[1].beta,
            &DipolarConstants::for_pair(pair),
            system.phi,
        )
    }
}

/// Zeroth-order average Hamiltonian of the recoupled pair (0, 1):
/// class a → ½Bω_dm[I₊S₋e^{−imφ} + I₋S₊e^{+imφ}],
/// class b → ½Qω_dm[I₊S₊e^{−imφ} + I₋S₋e^{+imφ}].
pub fn average_hamiltonian(spec: &AverageHamiltonianSpec, system: &SpinSystem) -> Result<CMatrix> {
    check_harmonic(spec.m)?;
    let n = system.n_spins();
    let s_axis = match spec.condition_class {
        ConditionClass::FlipFlop => (Axis::Minus, Axis::Plus),
        ConditionClass::FlopFlop => (Axis::Plus, Axis::Minus),
    };
    let forward = spin::bilinear(n, 0, Axis::Plus, 1, s_axis.0)?;
    let backward = spin::bilinear(n, 0, Axis::Minus, 1, s_axis.1)?;
    let e = C64::from_polar(1.0, -spec.phase);
    Ok((forward.map(|z| z * e) + backward.map(|z| z * e.conj())).scale(spec.coupling))
}
