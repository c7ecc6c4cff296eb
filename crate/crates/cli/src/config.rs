//! JSON experiment configuration. Hz, ppm and degrees here; everything is
//! converted to rad/s and radians on the way into the core crate.

use std::path::Path;

use r2tr_core::hamiltonian::ConditionClass;
use r2tr_core::propagator::{CwSegment, IdealRotation, Integrator, PropagatorConfig, PulseAxis, PulseEvent};
use r2tr_core::system::dipolar_prefactor;
use r2tr_core::units::{hz_to_angular, ppm_to_hz, ANGSTROM, GAMMA_13C};
use r2tr_core::{BasisLabel, DipolarPair, QuantumState, RfDrive, SpinSystem};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub spins: SpinBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveBlock>,
    #[serde(default)]
    pub sequence: Vec<EventSpec>,
    /// Basis label such as "10"; all spins up when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    #[serde(default)]
    pub integrator: IntegratorBlock,
    #[serde(default)]
    pub solve: SolveBlock,
    #[serde(default)]
    pub simulate: SimulateBlock,
    #[serde(default)]
    pub readout: ReadoutBlock,
    #[serde(default)]
    pub gate: GateBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinBlock {
    /// rad·s⁻¹·T⁻¹; ¹³C when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_angstrom: Option<f64>,
    /// ω_full/2π, used instead of a distance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_hz: Option<f64>,
    pub theta_d_deg: f64,
    #[serde(default)]
    pub phi_deg: f64,
    pub spin_rate_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets_hz: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shifts_ppm: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier_mhz: Option<f64>,
    /// Shift of the reference carrier, ppm.
    #[serde(default)]
    pub reference_ppm: f64,
    /// Coupled pairs for registers above two spins; every pair with the
    /// block's geometry when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<PairSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub i: usize,
    pub j: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_angstrom: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_d_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveBlock {
    pub amplitude_hz: f64,
    /// RF carrier relative to the reference carrier.
    #[serde(default)]
    pub carrier_hz: f64,
    #[serde(default)]
    pub phase_deg: f64,
    #[serde(default = "yes")]
    pub trim: bool,
    /// Spins whose trim pulses are left out.
    #[serde(default)]
    pub omit_trim: Vec<usize>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum EventSpec {
    Pulse {
        targets: Vec<usize>,
        axis: PulseAxis,
        angle_deg: f64,
    },
    Delay {
        duration_s: f64,
        #[serde(default = "yes")]
        dipolar: bool,
    },
    /// CW block with the drive block's settings, amplitude optionally
    /// overridden.
    Cw {
        duration_s: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitude_hz: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorBlock {
    pub steps_per_period: usize,
    #[serde(default)]
    pub method: Integrator,
}

impl Default for IntegratorBlock {
    fn default() -> Self {
        let d = PropagatorConfig::default();
        Self { steps_per_period: d.steps_per_period, method: d.integrator }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    pub class: ConditionClass,
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveBlock {
    pub requests: Vec<Request>,
}

impl Default for SolveBlock {
    fn default() -> Self {
        let mut requests = Vec::new();
        for class in [ConditionClass::FlipFlop, ConditionClass::FlopFlop] {
            for m in [1, 2] {
                requests.push(Request { class, m });
            }
        }
        Self { requests }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    pub sample_every_s: f64,
}

impl Default for SimulateBlock {
    fn default() -> Self {
        Self { sample_every_s: 20e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutBlock {
    pub duration_s: f64,
    pub dwell_s: f64,
    pub threshold: f64,
}

impl Default for ReadoutBlock {
    fn default() -> Self {
        Self { duration_s: 20e-3, dwell_s: 10e-6, threshold: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateBlock {
    /// Makhlin-invariant tolerance for equivalence verdicts. Simulated gates
    /// carry non-secular residue of a few 1e-2, hence the loose default.
    pub equivalence_tol: f64,
    pub remove_precession: bool,
}

impl Default for GateBlock {
    fn default() -> Self {
        Self { equivalence_tol: 0.1, remove_precession: true }
    }
}

/// Everything a command needs, in internal units.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub system: SpinSystem,
    pub drive: Option<RfDrive>,
    pub events: Vec<PulseEvent>,
    pub initial: QuantumState,
    pub propagator: PropagatorConfig,
    pub config: ExperimentConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str, path: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(ConfigError::Invalid {
                path: path.to_string(),
                message: format!("unsupported schema {} (expected {SCHEMA_VERSION})", cfg.schema),
            });
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: shown.clone(), source })?;
        Self::from_json(&text, &shown)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn build(&self, path: &str) -> Result<Experiment, ConfigError> {
        let invalid = |message: String| ConfigError::Invalid { path: path.to_string(), message };
        let core = |e: r2tr_core::Error| invalid(e.to_string());
        let s = &self.spins;

        let offsets_hz = match (&s.offsets_hz, &s.shifts_ppm) {
            (Some(o), None) => o.clone(),
            (None, Some(ppm)) => {
                let mhz = s.carrier_mhz.ok_or_else(|| invalid("shifts_ppm needs carrier_mhz".into()))?;
                ppm.iter().map(|p| ppm_to_hz(p - s.reference_ppm, mhz)).collect()
            }
            _ => return Err(invalid("give exactly one of spins.offsets_hz, spins.shifts_ppm".into())),
        };
        let n = offsets_hz.len();
        let gamma = s.gamma.unwrap_or(GAMMA_13C);
        let prefactor = |r: Option<f64>, hz: Option<f64>| -> Result<f64, ConfigError> {
            match (r, hz) {
                (Some(r), None) => dipolar_prefactor(gamma, r * ANGSTROM).map_err(core),
                (None, Some(hz)) if hz >= 0.0 => Ok(hz_to_angular(hz)),
                (None, Some(hz)) => Err(invalid(format!("coupling_hz must be non-negative, got {hz}"))),
                _ => Err(invalid("give exactly one of r_angstrom, coupling_hz".into())),
            }
        };
        let pairs = match &s.pairs {
            None => {
                let w = prefactor(s.r_angstrom, s.coupling_hz)?;
                let mut pairs = Vec::new();
                for i in 0..n {
                    for j in (i + 1)..n {
                        pairs.push(DipolarPair::from_prefactor(i, j, w, s.theta_d_deg.to_radians()).map_err(core)?);
                    }
                }
                pairs
            }
            Some(list) => list
                .iter()
                .map(|p| {
                    let (r, hz) = match (p.r_angstrom, p.coupling_hz) {
                        (None, None) => (s.r_angstrom, s.coupling_hz),
                        other => other,
                    };
                    let theta = p.theta_d_deg.unwrap_or(s.theta_d_deg).to_radians();
                    DipolarPair::from_prefactor(p.i, p.j, prefactor(r, hz)?, theta).map_err(core)
                })
                .collect::<Result<_, _>>()?,
        };
        let system = SpinSystem::new(
            gamma,
            s.phi_deg.to_radians(),
            hz_to_angular(s.spin_rate_hz),
            offsets_hz.iter().map(|f| hz_to_angular(*f)).collect(),
            pairs,
        )
        .map_err(core)?;

        let drive = match &self.drive {
            Some(d) => Some(
                RfDrive::with_carrier(hz_to_angular(d.amplitude_hz), hz_to_angular(d.carrier_hz), d.phase_deg.to_radians())
                    .map_err(core)?,
            ),
            None => None,
        };
        if let Some(d) = &self.drive {
            if let Some(&k) = d.omit_trim.iter().find(|&&k| k >= n) {
                return Err(invalid(format!("drive.omit_trim names spin {k} of {n}")));
            }
        }

        let mut events = Vec::with_capacity(self.sequence.len());
        for (idx, ev) in self.sequence.iter().enumerate() {
            events.push(match ev {
                EventSpec::Pulse { targets, axis, angle_deg } => {
                    if let Some(&k) = targets.iter().find(|&&k| k >= n) {
                        return Err(invalid(format!("sequence[{idx}] targets spin {k} of {n}")));
                    }
                    PulseEvent::Rotation(IdealRotation::new(targets.clone(), *axis, angle_deg.to_radians()))
                }
                EventSpec::Delay { duration_s, dipolar } => {
                    PulseEvent::Delay { duration: *duration_s, dipolar_on: *dipolar }
                }
                EventSpec::Cw { duration_s, amplitude_hz } => {
                    let block = self
                        .drive
                        .as_ref()
                        .ok_or_else(|| invalid(format!("sequence[{idx}] is a cw block but there is no drive")))?;
                    let mut d = drive.expect("drive built with block");
                    if let Some(a) = amplitude_hz {
                        d = RfDrive::with_carrier(hz_to_angular(*a), d.carrier_shift, d.phase).map_err(core)?;
                    }
                    PulseEvent::Cw(CwSegment {
                        drive: d,
                        duration: *duration_s,
                        trim: block.trim,
                        skip_trim: block.omit_trim.clone(),
                    })
                }
            });
            let d = events[idx].duration();
            if !(d >= 0.0) || !d.is_finite() {
                return Err(invalid(format!("sequence[{idx}] duration must be finite and non-negative")));
            }
        }

        let label: BasisLabel = match &self.initial {
            Some(text) => text.parse().map_err(core)?,
            None => BasisLabel::new(vec![0; n]).map_err(core)?,
        };
        if label.n_spins() != n {
            return Err(invalid(format!("initial state {label} has {} spins, register has {n}", label.n_spins())));
        }
        if self.integrator.steps_per_period == 0 {
            return Err(invalid("integrator.steps_per_period must be at least 1".into()));
        }
        Ok(Experiment {
            system,
            drive,
            events,
            initial: QuantumState::basis(&label),
            propagator: PropagatorConfig {
                steps_per_period: self.integrator.steps_per_period,
                integrator: self.integrator.method,
            },
            config: self.clone(),
        })
    }
}
