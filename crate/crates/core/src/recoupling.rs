//! Matching conditions for recoupling in the tilted rotating frame.
//!
//! Class a matches the difference of the two effective fields to m·ω_R
//! (flip-flop), class b their sum (flop-flop). For a fixed carrier the
//! residual is monotone in ω₁ on each class, so each (class, m) has at most
//! one root; the solver nevertheless scans for every sign change.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{bq_factors, check_harmonic, effective_field, ConditionClass, DipolarConstants};
use crate::units::{angular_to_hz, hz_to_angular};

/// Shift differences below this are flagged as weakly selective.
pub const SELECTIVITY_WARNING_HZ: f64 = 1000.0;

/// Upper end of the amplitude search, in units of ω_R.
pub const MAX_AMPLITUDE_RATIO: f64 = 10.0;

pub fn condition_residual(
    delta_i: f64,
    delta_s: f64,
    omega_1: f64,
    omega_r: f64,
    class: ConditionClass,
    m: u32,
) -> Result<f64> {
    check_harmonic(m)?;
    Ok(residual_unchecked(delta_i, delta_s, omega_1, omega_r, class, m))
}

fn residual_unchecked(
    delta_i: f64,
    delta_s: f64,
    omega_1: f64,
    omega_r: f64,
    class: ConditionClass,
    m: u32,
) -> f64 {
    let wi = delta_i.hypot(omega_1);
    let ws = delta_s.hypot(omega_1);
    let lhs = match class {
        ConditionClass::FlipFlop => (ws - wi).abs(),
        ConditionClass::FlopFlop => wi + ws,
    };
    lhs - m as f64 * omega_r
}

/// Every ω₁ in [0, 10·ω_R] that satisfies the condition.
pub fn solve_amplitude(
    delta_i: f64,
    delta_s: f64,
    omega_r: f64,
    class: ConditionClass,
    m: u32,
) -> Result<Vec<f64>> {
    check_harmonic(m)?;
    if !(omega_r > 0.0) {
        return Err(Error::InvalidParameter { name: "omega_r", reason: "must be positive".into() });
    }
    let f = |w1: f64| residual_unchecked(delta_i, delta_s, w1, omega_r, class, m);
    let hi = MAX_AMPLITUDE_RATIO * omega_r;
    let tol = 1e-6 * omega_r;
    let cells = 512;
    let h = hi / cells as f64;
    let mut roots = Vec::new();
    let mut a = 0.0;
    let mut fa = f(a);
    if fa.abs() < tol && fa == 0.0 {
        roots.push(0.0);
    }
    for k in 1..=cells {
        let b = k as f64 * h;
        let fb = f(b);
        if fb == 0.0 {
            roots.push(b);
        } else if fa != 0.0 && fa.signum() != fb.signum() {
            roots.push(bisect(&f, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    roots.retain(|r| f(*r).abs() < tol);
    Ok(roots)
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Carrier-placement guidance attached to a mechanism choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CarrierGuidance {
    /// Offsets much larger than the RF amplitude.
    OffsetsAboveAmplitude,
    /// Offsets much smaller than the RF amplitude.
    OffsetsBelowAmplitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismRanking {
    /// Preferred first.
    pub order: [ConditionClass; 2],
    pub guidance: CarrierGuidance,
}

/// Flip-flop when the shift difference exceeds the dipolar coupling,
/// flop-flop when it is comparable or smaller (ties go to flop-flop).
pub fn rank_mechanisms(omega_0i: f64, omega_0s: f64, omega_d: f64) -> MechanismRanking {
    if (omega_0i - omega_0s).abs() > omega_d.abs() {
        MechanismRanking {
            order: [ConditionClass::FlipFlop, ConditionClass::FlopFlop],
            guidance: CarrierGuidance::OffsetsAboveAmplitude,
        }
    } else {
        MechanismRanking {
            order: [ConditionClass::FlopFlop, ConditionClass::FlipFlop],
            guidance: CarrierGuidance::OffsetsBelowAmplitude,
        }
    }
}

/// A solved operating point. Frequencies in rad/s, period in s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecouplingPlan {
    pub condition_class: ConditionClass,
    pub m: u32,
    pub delta_i: f64,
    pub delta_s: f64,
    pub omega_1: f64,
    pub residual: f64,
    /// ½·|B or Q|·ω_dm.
    pub coupling: f64,
    pub exchange_period: f64,
    /// Higher is better, in [0, 2]: 1 for agreeing with the preferred
    /// mechanism plus r/(1+r) for the offset/amplitude ratio r it wants.
    pub mechanism_score: f64,
    pub warnings: Vec<String>,
}

impl RecouplingPlan {
    /// B (class a) or Q (class b) at this operating point.
    pub fn scaling_factor(&self) -> f64 {
        let bi = effective_field(self.delta_i, self.omega_1).beta;
        let bs = effective_field(self.delta_s, self.omega_1).beta;
        let (b, q) = bq_factors(bi, bs);
        match self.condition_class {
            ConditionClass::FlipFlop => b,
            ConditionClass::FlopFlop => q,
        }
    }

    pub fn to_record(&self) -> PlanRecord {
        PlanRecord {
            class: self.condition_class.letter().to_string(),
            mechanism: self.condition_class.mechanism().to_string(),
            m: self.m,
            delta_i_hz: angular_to_hz(self.delta_i),
            delta_s_hz: angular_to_hz(self.delta_s),
            omega_1_hz: angular_to_hz(self.omega_1),
            residual_hz: angular_to_hz(self.residual),
            coupling_hz: angular_to_hz(self.coupling),
            exchange_period_s: self.exchange_period,
            mechanism_score: self.mechanism_score,
            warnings: self.warnings.clone(),
        }
    }
}

/// Export form of a plan, frequencies in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub class: String,
    pub mechanism: String,
    pub m: u32,
    pub delta_i_hz: f64,
    pub delta_s_hz: f64,
    pub omega_1_hz: f64,
    pub residual_hz: f64,
    pub coupling_hz: f64,
    pub exchange_period_s: f64,
    pub mechanism_score: f64,
    pub warnings: Vec<String>,
}

pub fn predicted_exchange_period(plan: &RecouplingPlan, constants: &DipolarConstants) -> Result<f64> {
    let omega_dm = constants.harmonic(plan.m)?;
    let rate = plan.scaling_factor().abs() * omega_dm.abs();
    if !(rate > 0.0) {
        return Err(Error::ZeroCoupling);
    }
    Ok(std::f64::consts::TAU / rate)
}

/// Angle to the rotor axis that reproduces an observed exchange period.
/// `constants` only supplies ω_full. For m = 2 this inverts
/// sin²θ = 2π/(T·|B|·ω_full); for m = 1 it inverts √2·sin 2θ on the
/// θ ≤ π/4 branch.
pub fn theta_from_period(period: f64, plan: &RecouplingPlan, constants: &DipolarConstants) -> Result<f64> {
    if !(period > 0.0) {
        return Err(Error::InvalidParameter { name: "period", reason: "must be positive".into() });
    }
    let scale = plan.scaling_factor().abs() * constants.omega_full;
    if !(scale > 0.0) {
        return Err(Error::ZeroCoupling);
    }
    let ratio = std::f64::consts::TAU / (period * scale);
    match plan.m {
        2 => {
            if ratio > 1.0 {
                return Err(Error::NoGeometry(ratio));
            }
            Ok(ratio.sqrt().asin())
        }
        1 => {
            let s = ratio / std::f64::consts::SQRT_2;
            if s > 1.0 {
                return Err(Error::NoGeometry(s));
            }
            Ok(0.5 * s.asin())
        }
        other => Err(Error::Harmonic(other)),
    }
}

/// Builds the plan for a solved amplitude. `omega_0i`/`omega_0s` are the
/// isotropic frequencies relative to any common reference and feed the
/// mechanism ranking and selectivity warning.
pub fn make_plan(
    delta_i: f64,
    delta_s: f64,
    omega_1: f64,
    omega_r: f64,
    class: ConditionClass,
    m: u32,
    constants: &DipolarConstants,
) -> Result<RecouplingPlan> {
    let residual = condition_residual(delta_i, delta_s, omega_1, omega_r, class, m)?;
    let mut plan = RecouplingPlan {
        condition_class: class,
        m,
        delta_i,
        delta_s,
        omega_1,
        residual,
        coupling: 0.0,
        exchange_period: f64::INFINITY,
        mechanism_score: 0.0,
        warnings: Vec::new(),
    };
    plan.coupling = 0.5 * plan.scaling_factor().abs() * constants.harmonic(m)?.abs();
    if let Ok(p) = predicted_exchange_period(&plan, constants) {
        plan.exchange_period = p;
    }
    let shift_difference = (delta_i - delta_s).abs();
    let ranking = rank_mechanisms(delta_i, delta_s, constants.omega_full);
    let ratio = match class {
        ConditionClass::FlipFlop => delta_i.abs().min(delta_s.abs()) / omega_1.max(f64::MIN_POSITIVE),
        ConditionClass::FlopFlop => omega_1 / delta_i.abs().max(delta_s.abs()).max(f64::MIN_POSITIVE),
    };
    let preferred = if ranking.order[0] == class { 1.0 } else { 0.0 };
    plan.mechanism_score = preferred + ratio / (1.0 + ratio);
    if shift_difference < hz_to_angular(SELECTIVITY_WARNING_HZ) {
        plan.warnings.push(format!(
            "shift difference {:.0} Hz is below {:.0} Hz; recoupling may not be selective",
            angular_to_hz(shift_difference),
            SELECTIVITY_WARNING_HZ
        ));
    }
    if preferred == 0.0 {
        plan.warnings.push(format!(
            "{} is not the preferred mechanism for this shift difference",
            class.mechanism()
        ));
    }
    Ok(plan)
}

/// Solves every requested (class, m) at fixed offsets and returns the plans
/// sorted by mechanism score (best first), ties by class then m.
pub fn solve_plans(
    delta_i: f64,
    delta_s: f64,
    omega_r: f64,
    requests: &[(ConditionClass, u32)],
    constants: &DipolarConstants,
) -> Result<Vec<RecouplingPlan>> {
    let mut plans = Vec::new();
    for &(class, m) in requests {
        for w1 in solve_amplitude(delta_i, delta_s, omega_r, class, m)? {
            plans.push(make_plan(delta_i, delta_s, w1, omega_r, class, m, constants)?);
        }
    }
    plans.sort_by(|a, b| {
        b.mechanism_score
            .total_cmp(&a.mechanism_score)
            .then(a.condition_class.cmp(&b.condition_class))
            .then(a.m.cmp(&b.m))
    });
    Ok(plans)
}

/// Plans for a sweep of carrier positions. `omega_0i`, `omega_0s` and the
/// carriers share one reference; offsets are `ω₀ − carrier`.
pub fn sweep_carrier(
    omega_0i: f64,
    omega_0s: f64,
    carriers: &[f64],
    omega_r: f64,
    class: ConditionClass,
    m: u32,
    constants: &DipolarConstants,
) -> Result<Vec<RecouplingPlan>> {
    let mut out = Vec::new();
    for carrier in carriers {
        out.extend(solve_plans(omega_0i - carrier, omega_0s - carrier, omega_r, &[(class, m)], constants)?);
    }
    Ok(out)
}

/// For registers with more than two spins: the smallest |residual| any
/// non-target pair reaches under the same drive, over both classes and
/// m ∈ {1, 2}. Small values mean another pair is recoupled as well. This is
/// a heuristic; it ignores the strength of the competing couplings.
pub fn pairwise_separation(
    offsets: &[f64],
    omega_1: f64,
    omega_r: f64,
    target: (usize, usize),
) -> Vec<((usize, usize), f64)> {
    let mut out = Vec::new();
    for i in 0..offsets.len() {
        for j in (i + 1)..offsets.len() {
            if (i, j) == target || (j, i) == target {
                continue;
            }
            let worst = [ConditionClass::FlipFlop, ConditionClass::FlopFlop]
                .iter()
                .flat_map(|&cl| [1u32, 2].map(move |m| (cl, m)))
                .map(|(cl, m)| residual_unchecked(offsets[i], offsets[j], omega_1, omega_r, cl, m).abs())
                .fold(f64::INFINITY, f64::min);
            out.push(((i, j), worst));
        }
    }
    out
}
