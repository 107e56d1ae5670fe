//! Experiment execution: one run from config to artifacts, and sweeps
//! that fan independent runs out across workers.

use std::path::Path;

use filmlab_core::domain::{DomainSpec, GridField, OutcomeKind, SpectralField};
use filmlab_core::exec;
use filmlab_core::functionals::{concavity_report, energy_j, monotonicity_monitor, nehari_i};
use filmlab_core::integrator::{advance, estimate_blowup_time, StepperConfig, Trajectory};
use filmlab_core::nehari::{
    classify_initial_datum, estimate_lambda_alpha_given, estimate_well_depth, ClassificationReport,
    OptimizerConfig,
};
use filmlab_core::oracle::{compare, evaluate_at, fd_advance};

use crate::config::{ExperimentConfig, OracleConfig, SweepConfig};
use crate::datum::{build_datum, DatumDescriptor};
use crate::error::{LabError, LabResult};
use crate::report::{write_artifacts, RunArtifacts, SummaryExtras};

/// Classifies a datum, estimating Λ_α only when the high-energy branch
/// is actually in play (I0 < 0 with J0 above the well depth).
pub fn classify(u0: &SpectralField, spec: &DomainSpec) -> LabResult<ClassificationReport> {
    let opt = OptimizerConfig::default();
    let well = estimate_well_depth(spec, &opt)?;
    let j0 = energy_j(u0, spec)?;
    let i0 = nehari_i(u0, spec)?;
    let lambda_alpha = if i0 < 0.0 && j0 > well.d_hat {
        Some(estimate_lambda_alpha_given(j0, spec, &opt, &well)?.lambda_alpha_hat)
    } else {
        None
    };
    Ok(classify_initial_datum(u0, spec, well.d_hat, lambda_alpha)?)
}

fn run_oracle_comparison(
    spectral: &Trajectory,
    u0: &SpectralField,
    spec: &DomainSpec,
    stepper: &StepperConfig,
    oracle_cfg: &OracleConfig,
) -> LabResult<filmlab_core::oracle::ComparisonReport> {
    let fd_spec = DomainSpec::new(spec.a(), spec.p(), oracle_cfg.n_fd)?;
    let grid = GridField::new(evaluate_at(u0, spec, &fd_spec.collocation_points()));
    let fd_cfg = StepperConfig {
        dt_init: oracle_cfg.dt,
        dt_max: oracle_cfg.dt,
        dt_min: stepper.dt_min.max(1e-14),
        u_max: stepper.u_max.min(1e5),
        sample_stride: 1,
        checkpoint_stride: if stepper.checkpoint_stride > 0 { 50 } else { 0 },
        ..*stepper
    };
    let fd_traj = fd_advance(&grid, &fd_spec, &fd_cfg)?;
    Ok(compare(spectral, &fd_traj)?)
}

/// One experiment: build, integrate, monitor, classify, write artifacts.
pub fn run_experiment(cfg: &ExperimentConfig) -> LabResult<RunArtifacts> {
    run_experiment_in(cfg, &cfg.outputs.dir.clone())
}

/// Like [`run_experiment`] but writing under an explicit directory
/// (sweeps give every run its own).
pub fn run_experiment_in(cfg: &ExperimentConfig, dir: &Path) -> LabResult<RunArtifacts> {
    let spec = cfg.spec.build()?;
    let stepper = cfg.stepper.build()?;
    let descriptor = DatumDescriptor::from_config(&cfg.datum)?;
    let u0 = build_datum(&descriptor, &spec)?;

    let traj = advance(&u0, &spec, &stepper)?;

    let mut extras = SummaryExtras {
        classification: Some(classify(&u0, &spec)?),
        concavity: concavity_report(&traj, None).ok(),
        monotonicity: monotonicity_monitor(&traj).ok(),
        blowup_fit: if traj.outcome.kind == OutcomeKind::BlowUp {
            estimate_blowup_time(&traj).ok()
        } else {
            None
        },
        oracle_comparison: None,
    };
    if let Some(oracle_cfg) = cfg.oracle.as_ref().filter(|o| o.enabled) {
        extras.oracle_comparison =
            Some(run_oracle_comparison(&traj, &u0, &spec, &stepper, oracle_cfg)?);
    }

    write_artifacts(cfg, dir, &traj, &extras)
}

/// Runs every sweep entry in its own subdirectory, fanning out across
/// workers; no two runs share files.
pub fn run_sweep(cfg: &SweepConfig) -> LabResult<Vec<RunArtifacts>> {
    if cfg.runs.is_empty() {
        return Err(LabError::config("sweep has no [[runs]] entries"));
    }
    let jobs: Vec<(usize, ExperimentConfig)> = cfg
        .runs
        .iter()
        .enumerate()
        .map(|(idx, run)| {
            (
                idx,
                ExperimentConfig {
                    spec: cfg.spec.clone(),
                    datum: run.datum.clone(),
                    stepper: cfg.stepper.clone(),
                    outputs: cfg.outputs.clone(),
                    oracle: cfg.oracle.clone(),
                    suite: None,
                },
            )
        })
        .collect();
    let names: Vec<String> = cfg
        .runs
        .iter()
        .enumerate()
        .map(|(idx, run)| run.name.clone().unwrap_or_else(|| format!("run_{idx:03}")))
        .collect();
    let results = exec::map_collect(jobs, |(idx, exp)| {
        let dir = exp.outputs.dir.join(&names[idx]);
        run_experiment_in(&exp, &dir)
    });
    results.into_iter().collect()
}
