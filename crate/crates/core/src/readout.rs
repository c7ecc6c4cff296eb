//! Spectral readout: a hard π/2 pulse, free precession at the chemical-shift
//! offsets, and classification of basis states from peak signs.
//!
//! Detection convention: s(t) = Tr[ρ(t)·Σ_k I₊ᵏ] after a nonselective π/2
//! pulse about y. A spin in |0⟩ then precesses as ½·e^{+iΔt} and gives a
//! positive absorption peak at Δ/2π. Dipolar couplings are off during
//! acquisition.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::{apply_ideal_pulse, IdealRotation, PulseAxis};
use crate::spin::{self, Axis};
use crate::state::{BasisLabel, QuantumState};
use crate::system::SpinSystem;
use crate::units::angular_to_hz;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub offset_hz: f64,
    pub amplitude: f64,
}

/// Dense real-part spectrum on the FFT grid, scaled by 2/N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTrace {
    pub frequency_hz: Vec<f64>,
    pub real: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// One peak per spin, in register order.
    pub peaks: Vec<Peak>,
    pub trace: Option<SpectrumTrace>,
}

impl Spectrum {
    pub fn amplitudes(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.amplitude).collect()
    }

    /// `offset_hz,amplitude`, one row per peak.
    pub fn to_csv(&self) -> String {
        rows_csv(self.peaks.iter().map(|p| (p.offset_hz, p.amplitude)))
    }

    /// The dense trace in the same two-column layout, if present.
    pub fn trace_csv(&self) -> Option<String> {
        self.trace
            .as_ref()
            .map(|t| rows_csv(t.frequency_hz.iter().copied().zip(t.real.iter().copied())))
    }
}

fn rows_csv(rows: impl Iterator<Item = (f64, f64)>) -> String {
    let mut out = String::from("offset_hz,amplitude\n");
    for (f, a) in rows {
        let _ = writeln!(out, "{f:.6},{a:.11e}");
    }
    out
}

/// Peak amplitude 2⟨I_z⟩ at each spin's offset.
pub fn stick_spectrum(state: &QuantumState, system: &SpinSystem) -> Result<Spectrum> {
    check_sizes(state, system)?;
    let peaks = state
        .polarizations()
        .into_iter()
        .zip(&system.offsets)
        .map(|(z, w)| Peak { offset_hz: angular_to_hz(*w), amplitude: 2.0 * z })
        .collect();
    Ok(Spectrum { peaks, trace: None })
}

fn check_sizes(state: &QuantumState, system: &SpinSystem) -> Result<()> {
    if state.n_spins() != system.n_spins() {
        return Err(Error::Dimension { expected: system.n_spins(), found: state.n_spins() });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fid {
    pub dwell: f64,
    pub times: Vec<f64>,
    pub signal: Vec<C64>,
}

impl Fid {
    pub fn len(&self) -> usize {
        self.signal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signal.is_empty()
    }

    /// `t_s,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,re,im\n");
        for (t, s) in self.times.iter().zip(&self.signal) {
            let _ = writeln!(out, "{t:.11e},{:.11e},{:.11e}", s.re, s.im);
        }
        out
    }
}

/// Samples at t = 0, dwell, … ; ⌊duration/dwell⌋ points.
pub fn simulate_fid(state: &QuantumState, system: &SpinSystem, duration: f64, dwell: f64) -> Result<Fid> {
    check_sizes(state, system)?;
    if !(dwell > 0.0) || !dwell.is_finite() {
        return Err(Error::InvalidParameter { name: "dwell", reason: format!("must be positive, got {dwell}") });
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::InvalidParameter {
            name: "duration",
            reason: format!("must be finite and non-negative, got {duration}"),
        });
    }
    let n = system.n_spins();
    let all: Vec<usize> = (0..n).collect();
    let pulse = IdealRotation::new(all.clone(), PulseAxis::Y, std::f64::consts::FRAC_PI_2);
    let rho = apply_ideal_pulse(state, &pulse)?.rho().clone();
    let detector = spin::collective(n, &all, Axis::Plus)?;

    // Free precession is diagonal in the product basis.
    let dim = rho.nrows();
    let energies: Vec<f64> = (0..dim)
        .map(|b| {
            (0..n)
                .map(|k| {
                    let up = (b >> (n - 1 - k)) & 1 == 0;
                    system.offsets[k] * if up { 0.5 } else { -0.5 }
                })
                .sum()
        })
        .collect();
    // Tr(ρ(t)D) = Σ_jk ρ_jk D_kj e^{−i(E_j − E_k)t}
    let mut terms = Vec::new();
    for j in 0..dim {
        for k in 0..dim {
            let w = rho[(j, k)] * detector[(k, j)];
            if w.norm() > 0.0 {
                terms.push((w, energies[j] - energies[k]));
            }
        }
    }
    let count = (duration / dwell + 1e-9).floor() as usize;
    let times: Vec<f64> = (0..count).map(|i| i as f64 * dwell).collect();
    let signal = times
        .iter()
        .map(|t| terms.iter().map(|(w, de)| w * C64::from_polar(1.0, -de * t)).sum())
        .collect();
    Ok(Fid { dwell, times, signal })
}

/// Unnormalized forward DFT, S_k = Σ_n s_n e^{−2πikn/N}, in FFT order.
pub fn fid_transform(fid: &Fid) -> Vec<C64> {
    let mut buf = fid.signal.clone();
    if !buf.is_empty() {
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    }
    buf
}

/// Dense trace from the FFT plus peak amplitudes projected at the exact
/// offsets, (2/N)·Re Σ s(t)e^{−iΔt}.
pub fn spectrum_from_fid(fid: &Fid, system: &SpinSystem) -> Result<Spectrum> {
    let n = fid.len();
    if n == 0 {
        return Err(Error::InvalidParameter { name: "fid", reason: "no samples".into() });
    }
    let scale = 2.0 / n as f64;
    let peaks = system
        .offsets
        .iter()
        .map(|w| {
            let proj: C64 = fid.times.iter().zip(&fid.signal).map(|(t, s)| s * C64::from_polar(1.0, -w * t)).sum();
            Peak { offset_hz: angular_to_hz(*w), amplitude: scale * proj.re }
        })
        .collect();
    let raw = fid_transform(fid);
    let df = 1.0 / (n as f64 * fid.dwell);
    // Centered order: bins from ⌈N/2⌉ upward are the negative frequencies.
    let split = n.div_ceil(2);
    let (frequency_hz, real) = (split..n)
        .chain(0..split)
        .map(|k| {
            let signed = if k >= split { k as f64 - n as f64 } else { k as f64 };
            (signed * df, scale * raw[k].re)
        })
        .unzip();
    Ok(Spectrum { peaks, trace: Some(SpectrumTrace { frequency_hz, real }) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Basis(BasisLabel),
    /// At least one peak is weaker than the threshold.
    Unclassifiable { weakest: f64 },
}

impl Classification {
    pub fn label(&self) -> Option<&BasisLabel> {
        match self {
            Self::Basis(l) => Some(l),
            Self::Unclassifiable { .. } => None,
        }
    }
}

/// Positive peak → |0⟩, negative → |1⟩, per spin in register order.
pub fn classify_state(spectrum: &Spectrum, threshold: f64) -> Result<Classification> {
    if spectrum.peaks.is_empty() {
        return Err(Error::InvalidParameter { name: "spectrum", reason: "no peaks".into() });
    }
    let weakest = spectrum.peaks.iter().map(|p| p.amplitude.abs()).fold(f64::INFINITY, f64::min);
    if !(weakest >= threshold) {
        return Ok(Classification::Unclassifiable { weakest });
    }
    let bits = spectrum.peaks.iter().map(|p| u8::from(p.amplitude < 0.0)).collect();
    Ok(Classification::Basis(BasisLabel::new(bits)?))
}
