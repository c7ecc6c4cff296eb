use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use r2tr_core::analysis::{fit_sinusoid, max_transfer};
use r2tr_core::gates::{
    canonical_angles, cns, iswap, locally_equivalent, makhlin_invariants, universality_class,
    universality_class_of_gate, CanonicalAngles, MakhlinInvariants, UniversalityClass,
};
use r2tr_core::hamiltonian::{average_hamiltonian, AverageHamiltonianSpec, DipolarConstants};
use r2tr_core::propagator::{evolve_state, extract_gate, run_sequence, PulseEvent};
use r2tr_core::readout::{classify_state, simulate_fid, spectrum_from_fid, Classification, Peak};
use r2tr_core::recoupling::{make_plan, pairwise_separation, solve_plans, PlanRecord, RecouplingPlan};
use r2tr_core::units::angular_to_hz;
use r2tr_core::{BasisLabel, RfDrive, SpinSystem};
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::presets;

/// A drive counts as sitting on a condition when its residual is below
/// this fraction of ω_R.
pub const ON_CONDITION_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: impl Into<String>, contents: String) -> Self {
        Self { name: name.into(), contents }
    }

    fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Self {
        Self::new(name, serde_json::to_string_pretty(value).expect("report serializes") + "\n")
    }
}

/// Data files (the first is the primary one) and a human-readable summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub artifacts: Vec<Artifact>,
    pub summary: String,
}

impl Report {
    pub fn artifact(&self, name: &str) -> Option<&str> {
        self.artifacts.iter().find(|a| a.name == name).map(|a| a.contents.as_str())
    }

    fn prefixed(mut self, prefix: &str) -> Self {
        for a in &mut self.artifacts {
            a.name = format!("{prefix}_{}", a.name);
        }
        self
    }
}

fn pair_constants(system: &SpinSystem) -> Result<DipolarConstants> {
    let pair = system.pair(0, 1).context("spins 0 and 1 are not coupled")?;
    Ok(DipolarConstants::for_pair(pair))
}

/// The recoupling condition a drive sits on, if any.
pub fn operating_point(system: &SpinSystem, drive: &RfDrive) -> Result<Option<RecouplingPlan>> {
    let k = pair_constants(system)?;
    let off = drive.offsets(system);
    let mut best: Option<RecouplingPlan> = None;
    for req in crate::config::SolveBlock::default().requests {
        let plan = make_plan(off[0], off[1], drive.amplitude, system.omega_r, req.class, req.m, &k)?;
        if best.as_ref().is_none_or(|b| plan.residual.abs() < b.residual.abs()) {
            best = Some(plan);
        }
    }
    Ok(best.filter(|p| p.residual.abs() < ON_CONDITION_FRACTION * system.omega_r))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionRecord {
    pub class: String,
    pub m: u32,
    pub residual_hz: f64,
}

impl From<&RecouplingPlan> for ConditionRecord {
    fn from(p: &RecouplingPlan) -> Self {
        Self { class: p.condition_class.letter().into(), m: p.m, residual_hz: angular_to_hz(p.residual) }
    }
}

pub fn cmd_solve(exp: &Experiment, format: Format) -> Result<Report> {
    let system = &exp.system;
    let offsets = match &exp.drive {
        Some(d) => d.offsets(system),
        None => system.offsets.clone(),
    };
    let k = pair_constants(system)?;
    let requests: Vec<_> = exp.config.solve.requests.iter().map(|r| (r.class, r.m)).collect();
    let mut plans = solve_plans(offsets[0], offsets[1], system.omega_r, &requests, &k)?;
    if system.n_spins() > 2 {
        for plan in &mut plans {
            for ((i, j), sep) in pairwise_separation(&offsets, plan.omega_1, system.omega_r, (0, 1)) {
                if sep < ON_CONDITION_FRACTION * system.omega_r {
                    plan.warnings.push(format!(
                        "pair ({i}, {j}) is {:.0} Hz from a recoupling condition (pairwise heuristic)",
                        angular_to_hz(sep)
                    ));
                }
            }
        }
    }
    let records: Vec<PlanRecord> = plans.iter().map(RecouplingPlan::to_record).collect();
    let primary = match format {
        Format::Json => Artifact::json("plans.json", &records),
        Format::Csv => Artifact::new("plans.csv", plans_csv(&records)),
    };
    let mut summary = String::new();
    if records.is_empty() {
        summary.push_str("no solution for the requested conditions\n");
    }
    for r in &records {
        let _ = writeln!(
            summary,
            "class {} m={}: omega_1 = {:.1} Hz, residual {:.2e} Hz, exchange period {:.4} ms, score {:.3}",
            r.class,
            r.m,
            r.omega_1_hz,
            r.residual_hz,
            r.exchange_period_s * 1e3,
            r.mechanism_score
        );
        for w in &r.warnings {
            let _ = writeln!(summary, "  warning: {w}");
        }
    }
    Ok(Report { artifacts: vec![primary], summary })
}

fn plans_csv(records: &[PlanRecord]) -> String {
    let mut out = String::from(
        "class,mechanism,m,delta_i_hz,delta_s_hz,omega_1_hz,residual_hz,coupling_hz,exchange_period_s,mechanism_score,warnings\n",
    );
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6},{:.6e},{:.6},{:.11e},{:.6},\"{}\"",
            r.class,
            r.mechanism,
            r.m,
            r.delta_i_hz,
            r.delta_s_hz,
            r.omega_1_hz,
            r.residual_hz,
            r.coupling_hz,
            r.exchange_period_s,
            r.mechanism_score,
            r.warnings.join("; ").replace('"', "'")
        );
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub condition: Option<ConditionRecord>,
    pub predicted_period_s: Option<f64>,
    pub fitted_period_s: Option<f64>,
    pub fit_amplitude: Option<f64>,
    pub fit_rms: Option<f64>,
    pub theta_d_deg: Option<f64>,
    pub max_transfer: f64,
    pub hygiene_error: f64,
}

fn cw_drive(events: &[PulseEvent]) -> Option<RfDrive> {
    events.iter().find_map(|e| match e {
        PulseEvent::Cw(seg) => Some(seg.drive),
        _ => None,
    })
}

pub fn cmd_simulate(exp: &Experiment, format: Format) -> Result<Report> {
    let system = &exp.system;
    let traj = run_sequence(
        &exp.initial,
        system,
        &exp.events,
        exp.config.simulate.sample_every_s,
        &exp.propagator,
    )?;
    let z0: Vec<f64> = traj.polarizations.iter().map(|p| p[0]).collect();
    let (donor, acceptor) = if z0.len() >= 2 && z0[1] < z0[0] { (1, 0) } else { (0, 1) };
    let mut summary = SimulationSummary {
        condition: None,
        predicted_period_s: None,
        fitted_period_s: None,
        fit_amplitude: None,
        fit_rms: None,
        theta_d_deg: None,
        max_transfer: max_transfer(&traj, donor, acceptor),
        hygiene_error: traj.hygiene_error,
    };
    let drive = cw_drive(&exp.events).or(exp.drive);
    if let Some(plan) = drive.map(|d| operating_point(system, &d)).transpose()?.flatten() {
        summary.condition = Some((&plan).into());
        summary.predicted_period_s = Some(plan.exchange_period);
        let total = traj.times.last().copied().unwrap_or(0.0);
        if plan.exchange_period.is_finite() && total >= plan.exchange_period {
            let fit = fit_sinusoid(&traj.times, traj.spin(donor), plan.exchange_period, None)?;
            summary.fitted_period_s = Some(fit.period);
            summary.fit_amplitude = Some(fit.amplitude);
            summary.fit_rms = Some(fit.rms_residual);
            let k = pair_constants(system)?;
            let unit = DipolarConstants::from_prefactor(k.omega_full, std::f64::consts::FRAC_PI_2);
            summary.theta_d_deg = r2tr_core::recoupling::theta_from_period(fit.period, &plan, &unit)
                .ok()
                .map(f64::to_degrees);
        }
    }
    let primary = match format {
        Format::Csv => Artifact::new("trajectory.csv", traj.to_csv()),
        Format::Json => Artifact::json("trajectory.json", &traj),
    };
    let text = simulation_text(&summary);
    Ok(Report { artifacts: vec![primary, Artifact::json("summary.json", &summary)], summary: text })
}

fn simulation_text(s: &SimulationSummary) -> String {
    let mut out = String::new();
    match &s.condition {
        Some(c) => {
            let _ = writeln!(out, "condition: class {} m={} (residual {:.2} Hz)", c.class, c.m, c.residual_hz);
        }
        None => out.push_str("condition: drive is off every recoupling condition\n"),
    }
    if let Some(p) = s.predicted_period_s {
        let _ = writeln!(out, "predicted exchange period: {:.4} ms", p * 1e3);
    }
    if let Some(p) = s.fitted_period_s {
        let _ = writeln!(out, "fitted exchange period: {:.4} ms", p * 1e3);
    }
    if let Some(t) = s.theta_d_deg {
        let _ = writeln!(out, "inferred theta_D: {t:.2} deg");
    }
    let _ = writeln!(out, "max transfer: {:.4}", s.max_transfer);
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct AverageGateRecord {
    pub canonical_angles: CanonicalAngles,
    pub universality_class: UniversalityClass,
}

#[derive(Debug, Clone, Serialize)]
pub struct GateReport {
    pub unitary: Vec<Vec<[f64; 2]>>,
    pub unitarity_error: f64,
    pub makhlin: MakhlinInvariants,
    pub distance_to_iswap: f64,
    pub equivalence_tol: f64,
    pub locally_equivalent_iswap: bool,
    pub locally_equivalent_cns: bool,
    pub universality_class: UniversalityClass,
    pub condition: Option<ConditionRecord>,
    pub average_hamiltonian: Option<AverageGateRecord>,
}

pub fn gate_report(exp: &Experiment) -> Result<GateReport> {
    let system = &exp.system;
    if system.n_spins() != 2 {
        bail!("gate extraction needs a two-spin register, got {}", system.n_spins());
    }
    let gate_cfg = exp.config.gate;
    let u = extract_gate(system, &exp.events, &exp.propagator, gate_cfg.remove_precession)?;
    let g = makhlin_invariants(u.matrix())?;
    let tol = gate_cfg.equivalence_tol;
    let mut report = GateReport {
        unitary: u.to_pairs(),
        unitarity_error: u.unitarity_error(),
        makhlin: g,
        distance_to_iswap: g.distance(&makhlin_invariants(iswap().matrix())?),
        equivalence_tol: tol,
        locally_equivalent_iswap: locally_equivalent(u.matrix(), iswap().matrix(), tol)?,
        locally_equivalent_cns: locally_equivalent(u.matrix(), cns().matrix(), tol)?,
        universality_class: universality_class_of_gate(u.matrix(), tol)?,
        condition: None,
        average_hamiltonian: None,
    };
    let cw_time: f64 = exp.events.iter().filter(|e| matches!(e, PulseEvent::Cw(_))).map(PulseEvent::duration).sum();
    if let Some(drive) = cw_drive(&exp.events) {
        if let Some(plan) = operating_point(system, &drive)? {
            report.condition = Some((&plan).into());
            let spec = AverageHamiltonianSpec::for_drive(system, &drive, plan.condition_class, plan.m)?;
            let h = average_hamiltonian(&spec, system)?;
            let angles = canonical_angles(&h, cw_time)?;
            report.average_hamiltonian =
                Some(AverageGateRecord { canonical_angles: angles, universality_class: universality_class(&angles) });
        }
    }
    Ok(report)
}

pub fn cmd_gate(exp: &Experiment) -> Result<Report> {
    let r = gate_report(exp)?;
    let mut summary = String::new();
    let _ = writeln!(summary, "Makhlin invariants: G1 = {:.6} {:+.6}i, G2 = {:.6}", r.makhlin.g1.re, r.makhlin.g1.im, r.makhlin.g2);
    let _ = writeln!(summary, "distance to ISWAP class: {:.3e} (tolerance {:.1e})", r.distance_to_iswap, r.equivalence_tol);
    let _ = writeln!(summary, "locally equivalent to ISWAP: {}", r.locally_equivalent_iswap);
    let _ = writeln!(summary, "locally equivalent to CNS: {}", r.locally_equivalent_cns);
    let _ = writeln!(summary, "universality class: {}", class_name(r.universality_class));
    if let Some(a) = &r.average_hamiltonian {
        let [x, y, z] = a.canonical_angles.as_array();
        let _ = writeln!(summary, "average-Hamiltonian canonical angles: ({x:.6}, {y:.6}, {z:.6})");
    }
    Ok(Report { artifacts: vec![Artifact::json("gate.json", &r)], summary })
}

fn class_name(c: UniversalityClass) -> &'static str {
    match c {
        UniversalityClass::Universal => "universal",
        UniversalityClass::NonEntangling => "non-entangling",
        UniversalityClass::ExcludedSwapClass => "excluded-swap-class",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReadoutRecord {
    pub peaks: Vec<Peak>,
    pub classification: Classification,
}

fn read_out(exp: &Experiment) -> Result<(ReadoutRecord, r2tr_core::readout::Fid, r2tr_core::readout::Spectrum)> {
    let state = evolve_state(&exp.initial, &exp.system, &exp.events, &exp.propagator)?;
    let ro = exp.config.readout;
    let fid = simulate_fid(&state, &exp.system, ro.duration_s, ro.dwell_s)?;
    let spectrum = spectrum_from_fid(&fid, &exp.system)?;
    let classification = classify_state(&spectrum, ro.threshold)?;
    Ok((ReadoutRecord { peaks: spectrum.peaks.clone(), classification }, fid, spectrum))
}

pub fn cmd_spectrum(exp: &Experiment, format: Format) -> Result<Report> {
    let (record, fid, spectrum) = read_out(exp)?;
    let artifacts = match format {
        Format::Csv => vec![
            Artifact::new("spectrum.csv", spectrum.to_csv()),
            Artifact::new("trace.csv", spectrum.trace_csv().unwrap_or_default()),
            Artifact::new("fid.csv", fid.to_csv()),
            Artifact::json("readout.json", &record),
        ],
        Format::Json => vec![Artifact::json("readout.json", &record), Artifact::json("spectrum.json", &spectrum)],
    };
    let mut summary = String::new();
    for p in &record.peaks {
        let _ = writeln!(summary, "peak at {:.1} Hz: {:+.4}", p.offset_hz, p.amplitude);
    }
    match &record.classification {
        Classification::Basis(l) => {
            let _ = writeln!(summary, "state: {l}");
        }
        Classification::Unclassifiable { weakest } => {
            let _ = writeln!(summary, "state: unclassifiable (weakest peak {weakest:.3})");
        }
    }
    Ok(Report { artifacts, summary })
}

fn build(cfg: &ExperimentConfig, name: &str) -> Result<Experiment> {
    Ok(cfg.build(name)?)
}

fn with_steps(mut cfg: ExperimentConfig, steps: Option<usize>) -> ExperimentConfig {
    if let Some(n) = steps {
        cfg.integrator.steps_per_period = n;
    }
    cfg
}

pub fn repro_fig3a(format: Format, steps: Option<usize>) -> Result<Report> {
    let exp = build(&with_steps(presets::fig3a(), steps), "preset fig3a")?;
    Ok(cmd_simulate(&exp, format)?.prefixed("fig3a"))
}

pub fn repro_fig3b(format: Format, steps: Option<usize>) -> Result<Report> {
    let exp = build(&with_steps(presets::fig3b(), steps), "preset fig3b")?;
    Ok(cmd_simulate(&exp, format)?.prefixed("fig3b"))
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub label: Option<BasisLabel>,
    pub amplitudes: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruthTableRun {
    pub source: String,
    pub duration_s: f64,
    pub outcomes: BTreeMap<String, Outcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruthTableReport {
    /// Outcomes at the simulated half period, input → classified output.
    pub truth_table: BTreeMap<String, Option<BasisLabel>>,
    pub simulated_half_period_s: f64,
    pub reference_half_period_s: f64,
    pub runs: Vec<TruthTableRun>,
}

pub fn truth_table_run(source: &str, duration_s: f64, steps: Option<usize>) -> Result<TruthTableRun> {
    let mut outcomes = BTreeMap::new();
    for label in BasisLabel::all(2) {
        let name = label.compact();
        let exp = build(&with_steps(presets::fig4_run(&name, duration_s), steps), "preset fig4")?;
        let (record, _, _) = read_out(&exp)?;
        outcomes.insert(
            name,
            Outcome {
                label: record.classification.label().cloned(),
                amplitudes: record.peaks.iter().map(|p| p.amplitude).collect(),
            },
        );
    }
    Ok(TruthTableRun { source: source.into(), duration_s, outcomes })
}

pub fn repro_fig4(steps: Option<usize>) -> Result<Report> {
    let exchange = repro_fig3a(Format::Json, steps)?;
    let summary: serde_json::Value = serde_json::from_str(exchange.artifact("fig3a_summary.json").expect("summary"))?;
    let period = summary["fitted_period_s"].as_f64().context("exchange period could not be fitted")?;
    let half = 0.5 * period;
    let simulated = truth_table_run("simulated", half, steps)?;
    let reference = truth_table_run("reference", presets::REFERENCE_HALF_PERIOD_S, steps)?;
    let report = TruthTableReport {
        truth_table: simulated.outcomes.iter().map(|(k, o)| (k.clone(), o.label.clone())).collect(),
        simulated_half_period_s: half,
        reference_half_period_s: presets::REFERENCE_HALF_PERIOD_S,
        runs: vec![simulated, reference],
    };
    let mut text = String::new();
    for run in &report.runs {
        let _ = writeln!(text, "{} half period {:.4} ms:", run.source, run.duration_s * 1e3);
        for (input, o) in &run.outcomes {
            let out = o.label.as_ref().map_or("unclassifiable".to_string(), |l| l.compact());
            let amps: Vec<String> = o.amplitudes.iter().map(|a| format!("{a:+.3}")).collect();
            let _ = writeln!(text, "  {input} -> {out}  peaks [{}]", amps.join(", "));
        }
    }
    Ok(Report { artifacts: vec![Artifact::json("fig4_truth_table.json", &report)], summary: text })
}
