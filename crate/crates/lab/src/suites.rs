//! Named verification suites. Each one runs a battery of experiments
//! and checks its criteria at fixed tolerances, producing one pass/fail
//! line per criterion plus archived artifacts.
//!
//! - `identities`: mass conservation, the energy and L² identities with
//!   dt-refinement, closed-form functional values, weak-form residuals.
//! - `criterion`: the blow-up iff batteries — sufficiency (I(u0) < 0
//!   data all blow up reaching the amplitude threshold), the necessity
//!   H² bound on runs with I ≥ 0, first-crossing consistency, and the
//!   archived monotonicity evidence.
//! - `crosscheck`: spectral vs finite-difference agreement on a decaying
//!   and a blowing-up run.
//! - `welldepth`: the potential-well depth estimator against its
//!   closed-form upper bound and resolution stability.

use serde::Serialize;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use filmlab_core::domain::{BlowUpTrigger, DomainSpec, GridField, OutcomeKind, SpectralField};
use filmlab_core::exec;
use filmlab_core::functionals::{
    energy_identity_residual, energy_j, h2sq, l2_identity_residual, lambda_star, lp1,
    monotonicity_monitor, nehari_i,
};
use filmlab_core::integrator::{advance, StepperConfig, Trajectory};
use filmlab_core::nehari::{estimate_well_depth, project_to_nehari, OptimizerConfig};
use filmlab_core::oracle::{compare, evaluate_at, fd_advance, weak_form_residual};

use crate::datum::{build_datum, DatumDescriptor};
use crate::error::{LabError, LabResult};

pub const SUITES: &[&str] = &["identities", "criterion", "crosscheck", "welldepth"];

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub results: Vec<CriterionResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let mark = if r.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{mark}  {:<28} {}\n", r.name, r.detail));
        }
        let verdict = if self.all_passed() { "passed" } else { "FAILED" };
        out.push_str(&format!("suite `{}` {verdict}\n", self.suite));
        out
    }
}

fn check(name: &str, passed: bool, detail: String) -> CriterionResult {
    CriterionResult { name: name.into(), passed, detail }
}

/// Dispatch by suite name; unknown names are usage errors (exit 2).
pub fn run_suite(name: &str, out_dir: &Path) -> LabResult<SuiteReport> {
    std::fs::create_dir_all(out_dir)?;
    let report = match name {
        "identities" => identities_suite()?,
        "criterion" => criterion_suite(out_dir)?,
        "crosscheck" => crosscheck_suite()?,
        "welldepth" => welldepth_suite()?,
        other => {
            return Err(LabError::config(format!(
                "unknown suite `{other}`; expected one of {SUITES:?}"
            )))
        }
    };
    let path = out_dir.join(format!("suite_{name}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&report).unwrap())?;
    Ok(report)
}

fn cosine_datum(spec: &DomainSpec, modes: &[(usize, f64)]) -> LabResult<SpectralField> {
    Ok(build_datum(&DatumDescriptor::CosineCombo { modes: modes.to_vec() }, spec)?)
}

// ---------------------------------------------------------------------------
// identities
// ---------------------------------------------------------------------------

fn identities_suite() -> LabResult<SuiteReport> {
    let spec = DomainSpec::new(PI, 3.0, 64)?;
    let u0 = cosine_datum(&spec, &[(1, 0.5)])?;
    let run = |dt: f64| -> LabResult<Trajectory> {
        let cfg = StepperConfig {
            dt_init: dt,
            dt_max: dt,
            t_horizon: 1.0,
            sample_stride: 1,
            checkpoint_stride: 1,
            ..StepperConfig::default()
        };
        Ok(advance(&u0, &spec, &cfg)?)
    };
    let coarse = run(2e-3)?;
    let fine = run(1e-3)?;
    let mut results = Vec::new();

    // mass conservation at every sample of both runs
    let mass_worst = coarse
        .samples
        .iter()
        .chain(&fine.samples)
        .map(|s| s.mass.abs() / 1.0f64.max(s.linf))
        .fold(0.0f64, f64::max);
    results.push(check(
        "mass-conservation",
        mass_worst <= 1e-12,
        format!("max |mass|/max(1,sup|u|) = {mass_worst:.3e} (tol 1e-12)"),
    ));

    // energy identity with refinement
    let j0 = coarse.samples[0].j;
    let tol_energy = 1e-6 * (1.0 + j0.abs());
    let e_coarse = energy_identity_residual(&coarse)?.into_iter().fold(0.0f64, f64::max);
    let e_fine = energy_identity_residual(&fine)?.into_iter().fold(0.0f64, f64::max);
    let e_ratio = e_coarse / e_fine.max(1e-300);
    results.push(check(
        "energy-identity",
        e_coarse <= tol_energy && e_ratio >= 3.0,
        format!("residual {e_coarse:.3e} (tol {tol_energy:.3e}), dt-halving ratio {e_ratio:.2}"),
    ));

    // L² identity with refinement
    let l_coarse =
        l2_identity_residual(&coarse)?.iter().fold(0.0f64, |m, r| m.max(r.relative));
    let l_fine = l2_identity_residual(&fine)?.iter().fold(0.0f64, |m, r| m.max(r.relative));
    let l_ratio = l_coarse / l_fine.max(1e-300);
    // M″ = −I exactly, and second differences of M track −I
    let mpp_exact = coarse.samples.iter().all(|s| s.mpp == -s.i && s.mp == 0.5 * s.l2sq);
    let mut m_diff_worst = 0.0f64;
    for w in coarse.samples.windows(3) {
        let h1 = w[1].t - w[0].t;
        let h2 = w[2].t - w[1].t;
        let d2 = 2.0 * (w[0].m * h2 - w[1].m * (h1 + h2) + w[2].m * h1) / (h1 * h2 * (h1 + h2));
        m_diff_worst = m_diff_worst.max((d2 + w[1].i).abs() / w[1].i.abs().max(1e-14));
    }
    results.push(check(
        "l2-identity",
        l_coarse <= 1e-4 && l_ratio >= 3.0 && mpp_exact && m_diff_worst <= 1e-4,
        format!(
            "relative residual {l_coarse:.3e} (tol 1e-4), ratio {l_ratio:.2}, \
             M″=−I exact: {mpp_exact}, M second-difference residual {m_diff_worst:.3e}"
        ),
    ));

    // closed-form functional values for u = cos x
    let unit = cosine_datum(&spec, &[(1, 1.0)])?;
    let ls = lambda_star(&unit, &spec)?;
    let projected = project_to_nehari(&unit, &spec)?;
    let pairs: Vec<(&str, f64, f64)> = vec![
        ("h2sq", h2sq(&unit, &spec), PI / 2.0),
        ("lp1", lp1(&unit, &spec)?, 3.0 * PI / 8.0),
        ("J", energy_j(&unit, &spec)?, 5.0 * PI / 32.0),
        ("I", nehari_i(&unit, &spec)?, PI / 8.0),
        ("lambda_star", ls, (4.0f64 / 3.0).sqrt()),
        ("J_on_manifold", energy_j(&projected, &spec)?, PI / 6.0),
    ];
    let worst = pairs
        .iter()
        .map(|(_, got, want)| (got - want).abs() / want.abs())
        .fold(0.0f64, f64::max);
    results.push(check(
        "closed-forms",
        worst <= 1e-10,
        format!("worst relative deviation {worst:.3e} over {} values (tol 1e-10)", pairs.len()),
    ));

    // weak-form residual refinement
    let w_coarse = weak_form_residual(&coarse, &spec, 8)?.max_abs();
    let w_fine = weak_form_residual(&fine, &spec, 8)?.max_abs();
    let w_ratio = w_coarse / w_fine.max(1e-300);
    let order = w_ratio.log2();
    results.push(check(
        "weak-form",
        w_ratio >= 3.4,
        format!(
            "8×8 residual {w_coarse:.3e} → {w_fine:.3e} under dt halving, \
             observed order {order:.2} (need ≥ ~2)"
        ),
    ));

    Ok(SuiteReport { suite: "identities".into(), results })
}

// ---------------------------------------------------------------------------
// criterion
// ---------------------------------------------------------------------------

struct BatteryEntry {
    name: &'static str,
    a: f64,
    p: f64,
    descriptor: DatumDescriptor,
}

fn blowup_battery() -> Vec<BatteryEntry> {
    let combo = |modes: &[(usize, f64)]| DatumDescriptor::CosineCombo { modes: modes.to_vec() };
    vec![
        BatteryEntry { name: "p3_pi_cos1_a2.0", a: PI, p: 3.0, descriptor: combo(&[(1, 2.0)]) },
        BatteryEntry { name: "p3_pi_cos1_a1.5", a: PI, p: 3.0, descriptor: combo(&[(1, 1.5)]) },
        BatteryEntry { name: "p3_pi_cos2_a6.0", a: PI, p: 3.0, descriptor: combo(&[(2, 6.0)]) },
        BatteryEntry { name: "p2_pi_cos1_a2.0", a: PI, p: 2.0, descriptor: combo(&[(1, 2.0)]) },
        BatteryEntry { name: "p3_2pi_cos1_a1.0", a: 2.0 * PI, p: 3.0, descriptor: combo(&[(1, 1.0)]) },
        BatteryEntry { name: "p2_2pi_cos1_a1.0", a: 2.0 * PI, p: 2.0, descriptor: combo(&[(1, 1.0)]) },
        BatteryEntry {
            name: "p3_pi_nehari_mix_1.5",
            a: PI,
            p: 3.0,
            descriptor: DatumDescriptor::NehariScaled {
                base: Box::new(combo(&[(1, 1.0), (3, 0.5)])),
                multiplier: 1.5,
            },
        },
        BatteryEntry {
            name: "p3_2pi_nehari_mix_1.3",
            a: 2.0 * PI,
            p: 3.0,
            descriptor: DatumDescriptor::NehariScaled {
                base: Box::new(combo(&[(1, 1.0), (2, 0.4)])),
                multiplier: 1.3,
            },
        },
    ]
}

fn necessity_battery() -> Vec<BatteryEntry> {
    let combo = |modes: &[(usize, f64)]| DatumDescriptor::CosineCombo { modes: modes.to_vec() };
    vec![
        BatteryEntry { name: "p3_pi_cos1_a0.5", a: PI, p: 3.0, descriptor: combo(&[(1, 0.5)]) },
        BatteryEntry {
            name: "p3_pi_mix_small",
            a: PI,
            p: 3.0,
            descriptor: combo(&[(1, 0.3), (2, 0.1)]),
        },
        BatteryEntry { name: "p2_pi_cos1_a0.5", a: PI, p: 2.0, descriptor: combo(&[(1, 0.5)]) },
        BatteryEntry { name: "p3_2pi_cos1_a0.2", a: 2.0 * PI, p: 3.0, descriptor: combo(&[(1, 0.2)]) },
        BatteryEntry { name: "p2_2pi_cos1_a0.04", a: 2.0 * PI, p: 2.0, descriptor: combo(&[(1, 0.04)]) },
        BatteryEntry { name: "p2_pi_cos2_a0.2", a: PI, p: 2.0, descriptor: combo(&[(2, 0.2)]) },
        BatteryEntry { name: "p3_pi_cos3_a0.3", a: PI, p: 3.0, descriptor: combo(&[(3, 0.3)]) },
        BatteryEntry {
            name: "p3_pi_random_small",
            a: PI,
            p: 3.0,
            descriptor: DatumDescriptor::RandomBandlimited { max_k: 4, amplitude: 0.2, rng_seed: 11 },
        },
    ]
}

struct BatteryOutcome {
    name: &'static str,
    spec: DomainSpec,
    i0: f64,
    j0: f64,
    traj: Trajectory,
}

fn run_battery(entries: Vec<BatteryEntry>, cfg_for: fn(&DomainSpec) -> StepperConfig) -> LabResult<Vec<BatteryOutcome>> {
    let jobs: Vec<BatteryEntry> = entries;
    let results = exec::map_collect(jobs, |entry| -> LabResult<BatteryOutcome> {
        let spec = DomainSpec::new(entry.a, entry.p, 64)?;
        let u0 = build_datum(&entry.descriptor, &spec)?;
        let i0 = nehari_i(&u0, &spec)?;
        let j0 = energy_j(&u0, &spec)?;
        let traj = advance(&u0, &spec, &cfg_for(&spec))?;
        Ok(BatteryOutcome { name: entry.name, spec, i0, j0, traj })
    });
    results.into_iter().collect()
}

fn blowup_config(_spec: &DomainSpec) -> StepperConfig {
    StepperConfig {
        dt_init: 1e-6,
        dt_min: 1e-20,
        dt_max: 0.05,
        rel_tol: 1e-6,
        t_horizon: 10.0,
        u_max: 1e8,
        sample_stride: 1,
        ..StepperConfig::default()
    }
}

fn decay_config(_spec: &DomainSpec) -> StepperConfig {
    StepperConfig {
        dt_init: 1e-5,
        dt_max: 0.05,
        t_horizon: 10.0,
        sample_stride: 1,
        ..StepperConfig::default()
    }
}

fn dump_trajectory(out_dir: &Path, name: &str, traj: &Trajectory) -> LabResult<PathBuf> {
    let path = out_dir.join(format!("counterexample_{name}.json"));
    std::fs::write(&path, serde_json::to_string(traj).unwrap())?;
    Ok(path)
}

fn criterion_suite(out_dir: &Path) -> LabResult<SuiteReport> {
    let started = Instant::now();
    let blowups = run_battery(blowup_battery(), blowup_config)?;
    let blowup_elapsed = started.elapsed();
    let globals = run_battery(necessity_battery(), decay_config)?;
    let mut results = Vec::new();

    // sufficiency: every I(u0) < 0 datum blows up before the horizon,
    // riding the amplitude all the way to u_max = 1e8
    let mut suff_ok = true;
    let mut suff_notes = Vec::new();
    for b in &blowups {
        let amplitude_hit = matches!(
            b.traj.outcome.trigger,
            Some(BlowUpTrigger::AmplitudeThreshold { linf, .. }) if linf >= 1e8
        );
        let ok = b.i0 < 0.0
            && b.traj.outcome.kind == OutcomeKind::BlowUp
            && b.traj.outcome.t_end < 10.0
            && amplitude_hit;
        if !ok {
            suff_ok = false;
            suff_notes.push(format!(
                "{}: I0={:.3e} kind={:?} trigger={:?}",
                b.name, b.i0, b.traj.outcome.kind, b.traj.outcome.trigger
            ));
        }
    }
    let under_minute = blowup_elapsed.as_secs_f64() < 60.0;
    results.push(check(
        "blowup-sufficiency",
        suff_ok && under_minute,
        if suff_ok {
            format!(
                "{} data with I(u0)<0 all blew up at the 1e8 amplitude threshold \
                 in {:.2}s (< 60s)",
                blowups.len(),
                blowup_elapsed.as_secs_f64()
            )
        } else {
            suff_notes.join("; ")
        },
    ));

    // necessity bound on runs whose sampled I stays nonnegative
    let mut bound_ok = true;
    let mut bound_notes = Vec::new();
    let mut bound_worst = 0.0f64;
    for g in &globals {
        let p = g.spec.p();
        let cap = 2.0 * (p + 1.0) / (p - 1.0) * g.j0 * (1.0 + 1e-6);
        let i_nonneg = g.traj.samples.iter().all(|s| s.i >= 0.0);
        let finished = g.traj.outcome.kind == OutcomeKind::GlobalHorizonReached;
        let h2_max = g.traj.samples.iter().map(|s| s.h2sq).fold(0.0f64, f64::max);
        bound_worst = bound_worst.max(h2_max / cap);
        if !(i_nonneg && finished && h2_max <= cap) {
            bound_ok = false;
            bound_notes.push(format!(
                "{}: I≥0 {} finished {} h2_max/cap {:.4}",
                g.name,
                i_nonneg,
                finished,
                h2_max / cap
            ));
        }
    }
    results.push(check(
        "necessity-bound",
        bound_ok,
        if bound_ok {
            format!(
                "{} global runs stayed under the H² cap; worst h2/cap = {bound_worst:.4}",
                globals.len()
            )
        } else {
            bound_notes.join("; ")
        },
    ));

    // first-crossing consistency across both batteries
    let mut crossing_ok = true;
    let mut crossing_notes = Vec::new();
    for b in &blowups {
        let entered = b.traj.s_minus_entry;
        if entered.is_none() || entered.unwrap() > b.traj.outcome.t_end {
            crossing_ok = false;
            let path = dump_trajectory(out_dir, b.name, &b.traj)?;
            crossing_notes.push(format!(
                "{}: blow-up without S⁻ entry before termination (trajectory at {})",
                b.name,
                path.display()
            ));
        }
    }
    for g in &globals {
        if g.traj.samples.iter().any(|s| s.i < 0.0) {
            crossing_ok = false;
            let path = dump_trajectory(out_dir, g.name, &g.traj)?;
            crossing_notes.push(format!(
                "{}: horizon run crossed into I<0 (trajectory at {})",
                g.name,
                path.display()
            ));
        }
    }
    results.push(check(
        "s-minus-consistency",
        crossing_ok,
        if crossing_ok {
            "every blow-up run entered S⁻ before termination; no horizon run did".into()
        } else {
            crossing_notes.join("; ")
        },
    ));

    // mass conservation across every run of both batteries
    let mass_worst = blowups
        .iter()
        .chain(&globals)
        .flat_map(|b| &b.traj.samples)
        .map(|s| s.mass.abs() / 1.0f64.max(s.linf))
        .fold(0.0f64, f64::max);
    results.push(check(
        "battery-mass-conservation",
        mass_worst <= 1e-12,
        format!("max |mass|/max(1,sup|u|) over all battery runs = {mass_worst:.3e} (tol 1e-12)"),
    ));

    // monotonicity evidence: archived, not asserted
    let mut archived = 0usize;
    let (mut pos, mut neg, mut zero) = (0usize, 0usize, 0usize);
    for b in &blowups {
        let report = monotonicity_monitor(&b.traj)?;
        pos += report.lp1_sign_counts.positive;
        neg += report.lp1_sign_counts.negative;
        zero += report.lp1_sign_counts.zero;
        let path = out_dir.join(format!("monotonicity_{}.json", b.name));
        std::fs::write(&path, serde_json::to_string_pretty(&report).unwrap())?;
        archived += 1;
    }
    results.push(check(
        "monotonicity-evidence",
        archived == blowups.len(),
        format!(
            "{archived} reports archived; d/dt‖u‖_{{p+1}} signs over the battery: \
             +{pos} −{neg} 0:{zero} (recorded, not asserted)"
        ),
    ));

    Ok(SuiteReport { suite: "criterion".into(), results })
}

// ---------------------------------------------------------------------------
// crosscheck
// ---------------------------------------------------------------------------

fn crosscheck_suite() -> LabResult<SuiteReport> {
    let spec = DomainSpec::new(PI, 3.0, 64)?;
    let fd_spec = DomainSpec::new(PI, 3.0, 2048)?;
    let mut results = Vec::new();

    // decaying run to t = 1
    let u0 = cosine_datum(&spec, &[(1, 0.5)])?;
    let spectral_cfg = StepperConfig {
        dt_init: 2e-3,
        dt_max: 2e-3,
        t_horizon: 1.0,
        sample_stride: 1,
        checkpoint_stride: 10,
        ..StepperConfig::default()
    };
    let spectral = advance(&u0, &spec, &spectral_cfg)?;
    let fd_u0 = GridField::new(evaluate_at(&u0, &spec, &fd_spec.collocation_points()));
    let fd_cfg = StepperConfig {
        dt_init: 2e-4,
        dt_max: 2e-4,
        t_horizon: 1.0,
        sample_stride: 5,
        checkpoint_stride: 50,
        ..StepperConfig::default()
    };
    let fd = fd_advance(&fd_u0, &fd_spec, &fd_cfg)?;
    let rep = compare(&spectral, &fd)?;
    let state = rep.max_rel_state_diff.unwrap_or(f64::INFINITY);
    results.push(check(
        "cross-solver-decay",
        rep.kinds_agree && state <= 1e-3,
        format!(
            "relative L² state difference {state:.3e} (tol 1e-3), \
             J series difference {:.3e}",
            rep.max_rel_j_diff
        ),
    ));

    // blow-up run agreement
    let b0 = cosine_datum(&spec, &[(1, 2.0)])?;
    let spectral_b = advance(&b0, &spec, &blowup_config(&spec))?;
    let fd_b0 = GridField::new(evaluate_at(&b0, &spec, &fd_spec.collocation_points()));
    let fd_b_cfg = StepperConfig {
        dt_init: 1e-4,
        dt_max: 1e-4,
        dt_min: 1e-14,
        t_horizon: 10.0,
        u_max: 1e5,
        sample_stride: 1,
        ..StepperConfig::default()
    };
    let fd_b = fd_advance(&fd_b0, &fd_spec, &fd_b_cfg)?;
    let ta = spectral_b.outcome.blowup_time_estimate.unwrap_or(f64::NAN);
    let tb = fd_b.outcome.blowup_time_estimate.unwrap_or(f64::NAN);
    let rel = (ta - tb).abs() / ta;
    results.push(check(
        "cross-solver-blowup",
        spectral_b.outcome.kind == OutcomeKind::BlowUp
            && fd_b.outcome.kind == OutcomeKind::BlowUp
            && rel <= 0.10,
        format!("both families report blow-up; T estimates {ta:.6} vs {tb:.6} (rel {rel:.3e}, tol 0.1)"),
    ));

    Ok(SuiteReport { suite: "crosscheck".into(), results })
}

// ---------------------------------------------------------------------------
// welldepth
// ---------------------------------------------------------------------------

fn welldepth_suite() -> LabResult<SuiteReport> {
    let opt = OptimizerConfig::default();
    let d32 = estimate_well_depth(&DomainSpec::new(PI, 3.0, 32)?, &opt)?;
    let spec64 = DomainSpec::new(PI, 3.0, 64)?;
    let d64 = estimate_well_depth(&spec64, &opt)?;
    let upper = PI / 6.0 + 1e-6;
    let stable = (d32.d_hat - d64.d_hat).abs() / d64.d_hat;
    let i_rel = nehari_i(&d64.minimizer, &spec64)?.abs() / h2sq(&d64.minimizer, &spec64);
    let passed = d64.d_hat > 0.0
        && d64.d_hat <= upper
        && d32.d_hat <= PI / 6.0 + 1e-6
        && stable <= 1e-2
        && i_rel <= 1e-8;
    let results = vec![check(
        "well-depth",
        passed,
        format!(
            "d̂(N=32) = {:.8}, d̂(N=64) = {:.8} (upper bound π/6 = {:.8}), \
             resolution drift {stable:.3e} (tol 1e-2), minimizer |I| rel {i_rel:.3e} (tol 1e-8)",
            d32.d_hat,
            d64.d_hat,
            PI / 6.0
        ),
    )];
    Ok(SuiteReport { suite: "welldepth".into(), results })
}
