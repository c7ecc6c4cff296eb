//! Time-ordered propagation of states and unitaries through pulse sequences.
//!
//! Time-dependent segments are integrated with piecewise-constant
//! exponentials. The default stepper is the two-point Gauss–Legendre Magnus
//! step (fourth order, one Hermitian exponential per step); the plain
//! midpoint stepper is kept for comparison.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{effective_fields, tilt_rotation, RotatingFrameHamiltonian};
use crate::linalg::{commutator, expm_hermitian, identity, CMatrix, I};
use crate::spin::{self, Axis};
use crate::state::{GateMatrix, QuantumState};
use crate::system::{RfDrive, SpinSystem};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Midpoint,
    #[default]
    Magnus4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    pub steps_per_period: usize,
    pub integrator: Integrator,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self { steps_per_period: 1024, integrator: Integrator::Magnus4 }
    }
}

fn check_finite(h: &CMatrix, t: f64) -> Result<()> {
    if h.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(t))
    }
}

const GL_OFFSET: f64 = 0.288_675_134_594_812_9; // √3/6

fn step_generator<F>(h: &F, t: f64, dt: f64, integrator: Integrator) -> Result<CMatrix>
where
    F: Fn(f64) -> CMatrix,
{
    match integrator {
        Integrator::Midpoint => {
            let hm = h(t + 0.5 * dt);
            check_finite(&hm, t + 0.5 * dt)?;
            Ok(hm)
        }
        Integrator::Magnus4 => {
            let (ta, tb) = (t + (0.5 - GL_OFFSET) * dt, t + (0.5 + GL_OFFSET) * dt);
            let h1 = h(ta);
            check_finite(&h1, ta)?;
            let h2 = h(tb);
            check_finite(&h2, tb)?;
            // (H1 + H2)/2 − i(√3/12)·dt·[H2, H1]
            let corr = commutator(&h2, &h1).map(|z| z * (-I * (3f64.sqrt() / 12.0) * dt));
            Ok((h1 + h2).scale(0.5) + corr)
        }
    }
}

fn propagate_raw<F>(h: &F, t0: f64, t1: f64, steps: usize, integrator: Integrator) -> Result<CMatrix>
where
    F: Fn(f64) -> CMatrix,
{
    let probe = h(t0);
    check_finite(&probe, t0)?;
    let dim = probe.nrows();
    let mut u = identity(dim);
    if t1 == t0 {
        return Ok(u);
    }
    let dt = (t1 - t0) / steps as f64;
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let gen = step_generator(h, t, dt, integrator)?;
        u = expm_hermitian(&gen, dt) * u;
    }
    Ok(u)
}

/// Time-ordered propagator from `t0` to `t1` using `steps` equal steps.
pub fn segment_propagator<F>(
    h: F,
    t0: f64,
    t1: f64,
    steps: usize,
    integrator: Integrator,
) -> Result<GateMatrix>
where
    F: Fn(f64) -> CMatrix,
{
    if !(t1 >= t0) {
        return Err(Error::InvalidParameter {
            name: "t1",
            reason: format!("segment end {t1} precedes start {t0}"),
        });
    }
    if steps == 0 {
        return Err(Error::InvalidParameter { name: "steps", reason: "must be at least 1".into() });
    }
    let u = propagate_raw(&h, t0, t1, steps, integrator)?;
    GateMatrix::new(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseAxis {
    X,
    Y,
    Z,
}

impl PulseAxis {
    fn spin_axis(self) -> Axis {
        match self {
            Self::X => Axis::X,
            Self::Y => Axis::Y,
            Self::Z => Axis::Z,
        }
    }
}

/// Instantaneous rotation exp(−i·angle·Σ_targets I_axis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealRotation {
    pub targets: Vec<usize>,
    pub axis: PulseAxis,
    pub angle: f64,
}

impl IdealRotation {
    pub fn new(targets: Vec<usize>, axis: PulseAxis, angle: f64) -> Self {
        Self { targets, axis, angle }
    }

    pub fn gate(&self, n_spins: usize) -> Result<GateMatrix> {
        if self.targets.is_empty() {
            return Err(Error::InvalidParameter {
                name: "targets",
                reason: "a rotation needs at least one target spin".into(),
            });
        }
        let generator = spin::collective(n_spins, &self.targets, self.axis.spin_axis())?;
        Ok(GateMatrix::from_trusted(expm_hermitian(&generator, self.angle)))
    }
}

/// CW irradiation, optionally bracketed by trim pulses that tilt each spin
/// onto its effective field before the drive and back afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwSegment {
    pub drive: RfDrive,
    pub duration: f64,
    pub trim: bool,
    /// Spins whose trim pulses are left out.
    #[serde(default)]
    pub skip_trim: Vec<usize>,
}

impl CwSegment {
    pub fn trimmed(drive: RfDrive, duration: f64) -> Self {
        Self { drive, duration, trim: true, skip_trim: Vec::new() }
    }

    pub fn untrimmed(drive: RfDrive, duration: f64) -> Self {
        Self { drive, duration, trim: false, skip_trim: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseEvent {
    Rotation(IdealRotation),
    Delay { duration: f64, dipolar_on: bool },
    Cw(CwSegment),
}

impl PulseEvent {
    pub fn duration(&self) -> f64 {
        match self {
            Self::Rotation(_) => 0.0,
            Self::Delay { duration, .. } => *duration,
            Self::Cw(seg) => seg.duration,
        }
    }

    fn validate(&self, n_spins: usize) -> Result<()> {
        let d = self.duration();
        if !(d >= 0.0) || !d.is_finite() {
            return Err(Error::InvalidParameter {
                name: "duration",
                reason: format!("must be finite and non-negative, got {d}"),
            });
        }
        match self {
            Self::Rotation(r) => {
                r.gate(n_spins)?;
            }
            Self::Cw(seg) => {
                for &k in &seg.skip_trim {
                    if k >= n_spins {
                        return Err(Error::SpinIndex { index: k, n_spins });
                    }
                }
            }
            Self::Delay { .. } => {}
        }
        Ok(())
    }
}

pub fn apply_ideal_pulse(state: &QuantumState, event: &IdealRotation) -> Result<QuantumState> {
    Ok(state.evolve(&event.gate(state.n_spins())?))
}

/// ⟨I_z⟩ of every spin on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `polarizations[k][n]` is ⟨I_z⟩ of spin k at `times[n]`.
    pub polarizations: Vec<Vec<f64>>,
    /// Largest Hermiticity/trace violation met along the way.
    pub hygiene_error: f64,
}

impl Trajectory {
    pub fn spin(&self, k: usize) -> &[f64] {
        &self.polarizations[k]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn column_names(&self) -> Vec<String> {
        (0..self.polarizations.len())
            .map(|k| match k {
                0 => "Iz".to_string(),
                1 => "Sz".to_string(),
                _ => format!("Z{k}"),
            })
            .collect()
    }

    /// `t_s,Iz,Sz` with 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s");
        for name in self.column_names() {
            out.push(',');
            out.push_str(&name);
        }
        out.push('\n');
        for (n, t) in self.times.iter().enumerate() {
            out.push_str(&format!("{t:.11e}"));
            for pol in &self.polarizations {
                out.push_str(&format!(",{:.11e}", pol[n]));
            }
            out.push('\n');
        }
        out
    }
}

/// What the sequence engine pushes through each propagator.
trait Evolving {
    fn apply(&mut self, u: &CMatrix);
}

struct Density(CMatrix);

impl Evolving for Density {
    fn apply(&mut self, u: &CMatrix) {
        self.0 = u * &self.0 * u.adjoint();
    }
}

struct Unitary(CMatrix);

impl Evolving for Unitary {
    fn apply(&mut self, u: &CMatrix) {
        self.0 = u * &self.0;
    }
}

/// Per-segment context handed to a sampler: the segment's frame rotation
/// and (for trimmed CW) the back-trim to measure through.
struct SegmentFrame {
    fz: CMatrix,
    carrier_shift: f64,
    back_trim: Option<CMatrix>,
}

impl SegmentFrame {
    /// exp(+iδt F_z), reference frame → carrier frame.
    fn to_carrier(&self, t: f64) -> Option<CMatrix> {
        (self.carrier_shift != 0.0).then(|| expm_hermitian(&self.fz, -self.carrier_shift * t))
    }
}

struct Engine<'a> {
    system: &'a SpinSystem,
    config: PropagatorConfig,
    remove_precession: bool,
    n: usize,
}

impl<'a> Engine<'a> {
    fn max_step(&self) -> f64 {
        2.0 * PI / self.system.omega_r / self.config.steps_per_period as f64
    }

    fn steps_for(&self, dt: f64) -> usize {
        ((dt / self.max_step()) - 1e-9).ceil().max(1.0) as usize
    }

    /// Runs the events, calling `sample(t, x, frame)` at every time in
    /// `grid` that falls inside a timed segment.
    fn run<E, S>(&self, events: &[PulseEvent], x: &mut E, grid: &[f64], mut sample: S) -> Result<()>
    where
        E: Evolving,
        S: FnMut(f64, &E, &SegmentFrame),
    {
        for ev in events {
            ev.validate(self.n)?;
        }
        let mut clock = 0.0;
        let mut next = 0;
        let eps = 1e-12 * self.system.rotor_period();
        let fz = spin::total_z(self.n)?;
        for ev in events {
            match ev {
                PulseEvent::Rotation(rot) => x.apply(rot.gate(self.n)?.matrix()),
                PulseEvent::Delay { duration, dipolar_on } => {
                    let ham = RotatingFrameHamiltonian::new(self.system, None, *dipolar_on)?;
                    let frame = SegmentFrame { fz: fz.clone(), carrier_shift: 0.0, back_trim: None };
                    let (t0, t1) = (clock, clock + duration);
                    self.advance(&ham, &frame, t0, t1, x, grid, &mut next, eps, &mut sample)?;
                    clock = t1;
                }
                PulseEvent::Cw(seg) => {
                    let ham = RotatingFrameHamiltonian::new(self.system, Some(&seg.drive), true)?;
                    let fields = effective_fields(self.system, &seg.drive);
                    let betas: Vec<f64> = fields
                        .iter()
                        .enumerate()
                        .map(|(k, f)| if seg.trim && !seg.skip_trim.contains(&k) { f.beta } else { 0.0 })
                        .collect();
                    let trim = tilt_rotation(&betas, seg.drive.phase)?.into_matrix();
                    let trimmed = betas.iter().any(|b| *b != 0.0);
                    let frame = SegmentFrame {
                        fz: fz.clone(),
                        carrier_shift: seg.drive.carrier_shift,
                        back_trim: trimmed.then(|| trim.adjoint()),
                    };
                    let (t0, t1) = (clock, clock + seg.duration);
                    let in_ref = |m: &CMatrix, t: f64| match frame.to_carrier(t) {
                        Some(r) => r.adjoint() * m * r,
                        None => m.clone(),
                    };
                    if trimmed {
                        x.apply(&in_ref(&trim, t0));
                    }
                    self.advance(&ham, &frame, t0, t1, x, grid, &mut next, eps, &mut sample)?;
                    if trimmed {
                        x.apply(&in_ref(&trim.adjoint(), t1));
                    }
                    if self.remove_precession {
                        // Undo exp(−iτ Σ ω_e I_z) about each spin's own field axis.
                        let all_betas: Vec<f64> = fields.iter().map(|f| f.beta).collect();
                        let axis = tilt_rotation(&all_betas, seg.drive.phase)?.into_matrix();
                        let mut hz = CMatrix::zeros(fz.nrows(), fz.ncols());
                        for (k, f) in fields.iter().enumerate() {
                            hz += spin::spin_operator(self.n, k, Axis::Z)?.scale(f.omega_e);
                        }
                        let undo_tilted = expm_hermitian(&hz, -seg.duration);
                        // Free precession seen through the trims actually applied.
                        let through = trim.adjoint() * &axis;
                        let lab_axis = &through * undo_tilted * through.adjoint();
                        x.apply(&in_ref(&lab_axis, t1));
                    }
                    clock = t1;
                }
            }
        }
        if let Some(&t) = grid.get(next) {
            if t <= clock + eps {
                let frame = SegmentFrame { fz, carrier_shift: 0.0, back_trim: None };
                sample(t, x, &frame);
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn advance<E, S>(
        &self,
        ham: &RotatingFrameHamiltonian,
        frame: &SegmentFrame,
        t0: f64,
        t1: f64,
        x: &mut E,
        grid: &[f64],
        next: &mut usize,
        eps: f64,
        sample: &mut S,
    ) -> Result<()>
    where
        E: Evolving,
        S: FnMut(f64, &E, &SegmentFrame),
    {
        let h = |t: f64| ham.at(t);
        let mut t = t0;
        let mut stops: Vec<f64> = Vec::new();
        while *next + stops.len() < grid.len() && grid[*next + stops.len()] <= t1 + eps {
            stops.push(grid[*next + stops.len()]);
        }
        stops.push(t1);
        let last = stops.len() - 1;
        for (k, &stop) in stops.iter().enumerate() {
            let stop = stop.max(t);
            if stop > t {
                let u_c = propagate_raw(&h, t, stop, self.steps_for(stop - t), self.config.integrator)?;
                let u = match (frame.to_carrier(t), frame.to_carrier(stop)) {
                    (Some(r0), Some(r1)) => r1.adjoint() * u_c * r0,
                    _ => u_c,
                };
                x.apply(&u);
                t = stop;
            }
            if k < last {
                sample(grid[*next], x, frame);
                *next += 1;
            }
        }
        Ok(())
    }
}

fn sample_grid(total: f64, sample_every: f64) -> Result<Vec<f64>> {
    if !(sample_every > 0.0) || !sample_every.is_finite() {
        return Err(Error::InvalidParameter {
            name: "sample_every",
            reason: format!("must be positive, got {sample_every}"),
        });
    }
    let count = (total / sample_every + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| k as f64 * sample_every).collect())
}

/// Applies `events` to `initial` and records ⟨I_z⟩ of each spin every
/// `sample_every` seconds. Inside a trimmed CW segment the recorded values
/// are those seen if the irradiation stopped at that instant and the
/// closing trim pulses were applied.
pub fn run_sequence(
    initial: &QuantumState,
    system: &SpinSystem,
    events: &[PulseEvent],
    sample_every: f64,
    config: &PropagatorConfig,
) -> Result<Trajectory> {
    check_register(initial.n_spins(), system)?;
    let total: f64 = events.iter().map(PulseEvent::duration).sum();
    let grid = sample_grid(total, sample_every)?;
    let n = system.n_spins();
    let z_ops: Vec<CMatrix> =
        (0..n).map(|k| spin::spin_operator(n, k, Axis::Z)).collect::<Result<_>>()?;
    let engine = Engine { system, config: *config, remove_precession: false, n };
    let mut rho = Density(initial.rho().clone());
    let mut times = Vec::with_capacity(grid.len());
    let mut pols = vec![Vec::with_capacity(grid.len()); n];
    let mut hygiene: f64 = initial.hygiene_error();
    engine.run(events, &mut rho, &grid, |t, x, frame| {
        let measured = match &frame.back_trim {
            Some(back) => {
                let in_carrier = match frame.to_carrier(t) {
                    Some(r) => &r * &x.0 * r.adjoint(),
                    None => x.0.clone(),
                };
                back * in_carrier * back.adjoint()
            }
            None => x.0.clone(),
        };
        times.push(t);
        for (k, z) in z_ops.iter().enumerate() {
            pols[k].push(crate::linalg::trace(&(&measured * z)).re);
        }
        let tr = crate::linalg::trace(&x.0) - num_complex::Complex64::new(1.0, 0.0);
        hygiene = hygiene.max(crate::linalg::hermiticity_error(&x.0)).max(tr.norm());
    })?;
    Ok(Trajectory { times, polarizations: pols, hygiene_error: hygiene })
}

/// Final state after the whole sequence.
pub fn evolve_state(
    initial: &QuantumState,
    system: &SpinSystem,
    events: &[PulseEvent],
    config: &PropagatorConfig,
) -> Result<QuantumState> {
    check_register(initial.n_spins(), system)?;
    let u = extract_gate(system, events, config, false)?;
    Ok(initial.evolve(&u))
}

/// Unitary of the whole sequence in the reference rotating frame. With
/// `remove_precession`, every CW segment is followed by the inverse of the
/// free effective-field precession exp(−iτ Σ ω_e I_z) about each spin's
/// field axis, exposing the recoupled part.
pub fn extract_gate(
    system: &SpinSystem,
    events: &[PulseEvent],
    config: &PropagatorConfig,
    remove_precession: bool,
) -> Result<GateMatrix> {
    let n = system.n_spins();
    let engine = Engine { system, config: *config, remove_precession, n };
    let mut u = Unitary(identity(spin::dimension(n)));
    engine.run(events, &mut u, &[], |_, _, _| {})?;
    GateMatrix::with_tolerance(u.0, 1e-9)
}

fn check_register(n_state: usize, system: &SpinSystem) -> Result<()> {
    if n_state != system.n_spins() {
        return Err(Error::Dimension {
            expected: spin::dimension(system.n_spins()),
            found: spin::dimension(n_state),
        });
    }
    Ok(())
}
