use std::f64::consts::TAU;

use r2tr_core::hamiltonian::{dipolar_constants, ConditionClass, DipolarConstants};
use r2tr_core::recoupling::*;
use r2tr_core::units::{hz_to_angular, GAMMA_13C, GLYCINE_CC_DISTANCE};
use r2tr_core::Error;
use rand::{rngs::StdRng, Rng, SeedableRng};

const CLASS_A: ConditionClass = ConditionClass::FlipFlop;
const CLASS_B: ConditionClass = ConditionClass::FlopFlop;

fn hz(x: f64) -> f64 {
    hz_to_angular(x)
}

fn glycine(theta_deg: f64) -> DipolarConstants {
    dipolar_constants(GAMMA_13C, GLYCINE_CC_DISTANCE, theta_deg.to_radians()).unwrap()
}

fn fig3a_plan() -> RecouplingPlan {
    make_plan(hz(2000.0), hz(18699.0), hz(2339.0), hz(7884.0), CLASS_A, 2, &glycine(64.0)).unwrap()
}

#[test]
fn fig3a_residual() {
    let r = condition_residual(hz(2000.0), hz(18699.0), hz(2339.0), hz(7884.0), CLASS_A, 2).unwrap();
    assert!((r / TAU + 0.8).abs() < 0.1, "residual {} Hz", r / TAU);
}

#[test]
fn fig3b_is_far_from_every_condition() {
    for class in [CLASS_A, CLASS_B] {
        for m in [1, 2] {
            let r = condition_residual(hz(2000.0), hz(18699.0), hz(8823.0), hz(7884.0), class, m).unwrap();
            assert!(r.abs() / TAU >= 3700.0, "{class:?} m={m}: {} Hz", r / TAU);
        }
    }
}

#[test]
fn solver_recovers_fig3a_amplitude() {
    let wr = hz(7884.0);
    let roots = solve_amplitude(hz(2000.0), hz(18699.0), wr, CLASS_A, 2).unwrap();
    assert_eq!(roots.len(), 1);
    assert!((roots[0] / TAU - 2338.0).abs() <= 5.0, "{}", roots[0] / TAU);
    let r = condition_residual(hz(2000.0), hz(18699.0), roots[0], wr, CLASS_A, 2).unwrap();
    assert!(r.abs() < 1e-6 * wr);
}

fn grid_roots(di: f64, ds: f64, wr: f64, class: ConditionClass, m: u32) -> Vec<f64> {
    let n = 100_000;
    let hi = 10.0 * wr;
    let f = |w: f64| condition_residual(di, ds, w, wr, class, m).unwrap();
    let mut roots = Vec::new();
    let mut prev = f(0.0);
    for k in 1..=n {
        let w = hi * k as f64 / n as f64;
        let cur = f(w);
        if prev.signum() != cur.signum() {
            let w0 = hi * (k - 1) as f64 / n as f64;
            roots.push(w0 + (w - w0) * prev / (prev - cur));
        }
        prev = cur;
    }
    roots
}

#[test]
fn solver_agrees_with_dense_grid() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut with_roots = 0;
    for _ in 0..100 {
        let di = hz(rng.gen_range(-30_000.0..30_000.0));
        let ds = hz(rng.gen_range(-30_000.0..30_000.0));
        let wr = hz(rng.gen_range(3_000.0..25_000.0));
        let class = if rng.gen_bool(0.5) { CLASS_A } else { CLASS_B };
        let m = rng.gen_range(1..=2);
        let solved = solve_amplitude(di, ds, wr, class, m).unwrap();
        let grid = grid_roots(di, ds, wr, class, m);
        assert_eq!(solved.len(), grid.len(), "root count for {di} {ds} {wr} {class:?} {m}");
        for (a, b) in solved.iter().zip(&grid) {
            assert!((a - b).abs() / TAU < 1.0, "{} vs {} Hz", a / TAU, b / TAU);
            let r = condition_residual(di, ds, *a, wr, class, m).unwrap();
            assert!(r.abs() < 1e-6 * wr);
        }
        with_roots += usize::from(!solved.is_empty());
    }
    assert!(with_roots > 20, "too few instances with roots: {with_roots}");
}

#[test]
fn ranking_examples() {
    let r = rank_mechanisms(0.0, hz(16_700.0), hz(2100.0));
    assert_eq!(r.order, [CLASS_A, CLASS_B]);
    assert_eq!(r.guidance, CarrierGuidance::OffsetsAboveAmplitude);
    assert_eq!(rank_mechanisms(hz(5.0), hz(5.0), hz(2100.0)).order[0], CLASS_B);
    assert_eq!(rank_mechanisms(0.0, hz(2100.0), hz(2100.0)).order[0], CLASS_B);
}

#[test]
fn fig3a_exchange_period() {
    let plan = fig3a_plan();
    let k = glycine(64.0);
    let period = predicted_exchange_period(&plan, &k).unwrap();
    assert!((period - 3.21e-3).abs() < 0.01e-3, "{period}");
    assert!((plan.exchange_period - period).abs() < 1e-15);
    assert!((plan.scaling_factor() + 0.1820).abs() < 2e-4);
    let doubled = DipolarConstants { omega_d2: 2.0 * k.omega_d2, ..k };
    let half = predicted_exchange_period(&plan, &doubled).unwrap();
    assert!((half - period / 2.0).abs() < 1e-15);
}

#[test]
fn untilted_limit_period() {
    // Far-offset, weak-field plan: both tilts → 0, B → −1/4.
    let plan = make_plan(hz(1e9), hz(2e9), 1e-9, hz(7884.0), CLASS_A, 2, &glycine(64.0)).unwrap();
    assert!((plan.scaling_factor() + 0.25).abs() < 1e-12);
    let k = DipolarConstants { omega_d1: 0.0, omega_d2: hz(1000.0), omega_full: hz(1000.0) };
    let p = predicted_exchange_period(&plan, &k).unwrap();
    assert!((p - 4.0e-3).abs() < 1e-12);
}

#[test]
fn zero_coupling_is_an_error() {
    let plan = fig3a_plan();
    let k = DipolarConstants { omega_d1: 0.0, omega_d2: 0.0, omega_full: 0.0 };
    assert_eq!(predicted_exchange_period(&plan, &k), Err(Error::ZeroCoupling));
}

#[test]
fn geometry_inversion() {
    let plan = fig3a_plan();
    let unit = glycine(90.0);
    let theta = theta_from_period(3.3e-3, &plan, &unit).unwrap().to_degrees();
    assert!((theta - 62.4).abs() < 0.1, "{theta}");

    let min_period = TAU / (plan.scaling_factor().abs() * unit.omega_full);
    let right = theta_from_period(min_period, &plan, &unit).unwrap();
    assert!((right.to_degrees() - 90.0).abs() < 1e-6);
    assert!(matches!(theta_from_period(0.9 * min_period, &plan, &unit), Err(Error::NoGeometry(_))));
}

#[test]
fn period_and_inversion_compose_to_identity() {
    let unit = glycine(90.0);
    for m in [1, 2] {
        let plan = make_plan(hz(2000.0), hz(18699.0), hz(2339.0), hz(7884.0), CLASS_A, m, &unit).unwrap();
        let range = if m == 2 { (1.0, 89.0) } else { (1.0, 44.0) };
        for k in 0..=40 {
            let theta = (range.0 + (range.1 - range.0) * k as f64 / 40.0).to_radians();
            let constants = DipolarConstants::from_prefactor(unit.omega_full, theta);
            let period = predicted_exchange_period(&plan, &constants).unwrap();
            let back = theta_from_period(period, &plan, &unit).unwrap();
            assert!((back - theta).abs() < 1e-9, "m={m}: {theta} → {back}");
        }
    }
}

#[test]
fn plan_export_in_hz() {
    let record = fig3a_plan().to_record();
    assert_eq!(record.class, "a");
    assert!((record.omega_1_hz - 2339.0).abs() < 1e-9);
    let json = serde_json::to_value(&record).unwrap();
    assert!(json.get("exchange_period_s").is_some());
    assert!(record.warnings.is_empty(), "{:?}", record.warnings);
}

#[test]
fn close_shifts_raise_warning() {
    let plan = make_plan(hz(0.0), hz(500.0), hz(3000.0), hz(7884.0), CLASS_B, 1, &glycine(64.0)).unwrap();
    assert!(plan.warnings.iter().any(|w| w.contains("1000 Hz")));
}

#[test]
fn plans_sorted_by_score() {
    let plans = solve_plans(
        hz(2000.0),
        hz(18699.0),
        hz(7884.0),
        &[(CLASS_A, 1), (CLASS_A, 2), (CLASS_B, 1), (CLASS_B, 2)],
        &glycine(64.0),
    )
    .unwrap();
    assert!(!plans.is_empty());
    assert!(plans.windows(2).all(|w| w[0].mechanism_score >= w[1].mechanism_score));
    assert!(plans.iter().any(|p| p.condition_class == CLASS_A && p.m == 2));
}

#[test]
fn carrier_sweep_keeps_shift_difference() {
    let carriers: Vec<f64> = (0..5).map(|k| hz(500.0 * k as f64)).collect();
    let plans = sweep_carrier(hz(2000.0), hz(18699.0), &carriers, hz(7884.0), CLASS_A, 2, &glycine(64.0)).unwrap();
    assert_eq!(plans.len(), 5);
    // Moving the carrier onto S shrinks |Δ_S| − |Δ_I| below 2ω_R: no class-a m=2 root.
    let far = sweep_carrier(hz(2000.0), hz(18699.0), &[hz(4000.0)], hz(7884.0), CLASS_A, 2, &glycine(64.0)).unwrap();
    assert!(far.is_empty());
    for p in &plans {
        assert!(((p.delta_s - p.delta_i) / TAU - 16699.0).abs() < 1e-6);
        assert!(p.residual.abs() < 1e-6 * hz(7884.0));
    }
}
