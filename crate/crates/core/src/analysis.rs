//! Trajectory post-processing: sinusoid period fits and transfer metrics.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub period: f64,
    pub offset: f64,
    /// √(a² + b²) of a·cos + b·sin.
    pub amplitude: f64,
    pub rms_residual: f64,
}

/// Linear least squares of y ≈ c0 + c1 cos(ωt) + c2 sin(ωt); returns the
/// coefficients and the sum of squared residuals.
fn linear_fit(times: &[f64], values: &[f64], period: f64) -> Option<(Vector3<f64>, f64)> {
    let w = std::f64::consts::TAU / period;
    let mut ata = Matrix3::zeros();
    let mut aty = Vector3::zeros();
    for (t, y) in times.iter().zip(values) {
        let row = Vector3::new(1.0, (w * t).cos(), (w * t).sin());
        ata += row * row.transpose();
        aty += row * *y;
    }
    let coef = ata.lu().solve(&aty)?;
    let sse = times
        .iter()
        .zip(values)
        .map(|(t, y)| {
            let fit = coef[0] + coef[1] * (w * t).cos() + coef[2] * (w * t).sin();
            (y - fit).powi(2)
        })
        .sum();
    Some((coef, sse))
}

/// Fits a single sinusoid to the samples with `t ≤ window`, searching
/// periods within ±50 % of `period_guess`.
pub fn fit_sinusoid(
    times: &[f64],
    values: &[f64],
    period_guess: f64,
    window: Option<f64>,
) -> Result<SinusoidFit> {
    if !(period_guess > 0.0) {
        return Err(Error::Fit(format!("period guess must be positive, got {period_guess}")));
    }
    let window = window.unwrap_or(2.0 * period_guess);
    let (ts, ys): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t <= window)
        .map(|(t, y)| (*t, *y))
        .unzip();
    if ts.len() < 8 {
        return Err(Error::Fit(format!("only {} samples inside the fit window", ts.len())));
    }
    let sse = |p: f64| linear_fit(&ts, &ys, p).map_or(f64::INFINITY, |(_, s)| s);

    let (lo, hi) = (0.5 * period_guess, 1.5 * period_guess);
    let n = 2000;
    let step = (hi - lo) / n as f64;
    let best = (0..=n)
        .map(|k| lo + k as f64 * step)
        .min_by(|a, b| sse(*a).total_cmp(&sse(*b)))
        .expect("non-empty scan");

    // Golden-section refinement inside the neighbouring scan cells.
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..100 {
        if sse(c) < sse(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    let period = 0.5 * (a + b);
    let (coef, s) = linear_fit(&ts, &ys, period).ok_or_else(|| Error::Fit("singular system".into()))?;
    Ok(SinusoidFit {
        period,
        offset: coef[0],
        amplitude: coef[1].hypot(coef[2]),
        rms_residual: (s / ts.len() as f64).sqrt(),
    })
}

/// Largest fraction of the initial polarization difference that `acceptor`
/// gives up over the trajectory: max_t (z_a(0) − z_a(t)) / (z_a(0) − z_d(0)).
pub fn max_transfer(traj: &Trajectory, donor: usize, acceptor: usize) -> f64 {
    let za = traj.spin(acceptor);
    let zd = traj.spin(donor);
    let scale = za[0] - zd[0];
    if scale == 0.0 {
        return 0.0;
    }
    za.iter().map(|z| (za[0] - z) / scale).fold(f64::NEG_INFINITY, f64::max)
}

/// Largest |z_k(t) − z_k(0)| of one spin, relative to the spin-1/2 full scale 1/2.
pub fn max_deviation(traj: &Trajectory, spin: usize) -> f64 {
    let z = traj.spin(spin);
    z.iter().map(|v| (v - z[0]).abs()).fold(0.0, f64::max) / 0.5
}

pub fn rms(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}
