//! Run artifacts: the time-series CSV, the run-summary JSON document
//! (schema 1), and the plotting script that renders the CSV.
//!
//! The CSV column order is part of the interface:
//!   t, dt, mass, l2sq, lp1, linf, h2sq, J, I, ut_l2sq, M, energy_residual
//! one row per accepted sample, ASCII, '.' decimal separator, floats at
//! 17 significant digits. Identical configs produce byte-identical files.

use serde::Serialize;
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use filmlab_core::functionals::{ConcavityReport, MonotonicityReport};
use filmlab_core::integrator::{BlowupFit, Trajectory};
use filmlab_core::nehari::ClassificationReport;

use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};

pub const CSV_HEADER: &str = "t,dt,mass,l2sq,lp1,linf,h2sq,J,I,ut_l2sq,M,energy_residual";

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders the sample series; every row is re-validated against the
/// algebraic sample invariants before it is written.
pub fn render_csv(traj: &Trajectory) -> LabResult<String> {
    let p = traj.spec.p();
    let mut out = String::with_capacity(traj.samples.len() * 220 + 128);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &traj.samples {
        if !s.algebraic_invariants_ok(p) {
            return Err(LabError::runtime(format!(
                "sample at t = {} violates the algebraic diagnostics invariants",
                s.t
            )));
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt(s.t),
            fmt(s.dt),
            fmt(s.mass),
            fmt(s.l2sq),
            fmt(s.lp1),
            fmt(s.linf),
            fmt(s.h2sq),
            fmt(s.j),
            fmt(s.i),
            fmt(s.ut_l2sq),
            fmt(s.m),
            fmt(s.energy_residual),
        );
    }
    Ok(out)
}

/// Everything the summary document records beside the raw outcome.
#[derive(Debug, Default, Serialize)]
pub struct SummaryExtras {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concavity: Option<ConcavityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotonicity: Option<MonotonicityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blowup_fit: Option<BlowupFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_comparison: Option<filmlab_core::oracle::ComparisonReport>,
}

/// Assembles the run-summary JSON (schema version 1).
pub fn render_summary(
    cfg: &ExperimentConfig,
    traj: &Trajectory,
    extras: &SummaryExtras,
) -> LabResult<String> {
    let p = traj.spec.p();
    let dealias_exact = p == p.round() && p <= 3.0;
    let doc = json!({
        "schema": 1,
        "config": cfg,
        "dealiasing": {
            "padding_factor": filmlab_core::spectral::DEALIAS_FACTOR,
            "exact_for_this_p": dealias_exact,
        },
        "outcome": traj.outcome,
        "s_minus_entry": traj.s_minus_entry,
        "samples": traj.samples.len(),
        "checkpoints": traj.checkpoints.len(),
        "extras": extras,
    });
    serde_json::to_string_pretty(&doc)
        .map_err(|e| LabError::runtime(format!("summary serialization: {e}")))
}

/// The emitted plotting script; a static text artifact referencing the
/// CSV, so runs stay byte-reproducible.
pub const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Render the run's time series (series.csv in the same directory)."""
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "series.csv")
rows = list(csv.DictReader(open(path)))
col = lambda name: [float(r[name]) for r in rows]
t = col("t")

fig, axes = plt.subplots(2, 2, figsize=(11, 7))
axes[0][0].semilogy(t, [max(v, 1e-300) for v in col("linf")])
axes[0][0].set_title("amplitude sup|u|")
axes[0][1].plot(t, col("J"), label="J")
axes[0][1].plot(t, col("I"), label="I")
axes[0][1].legend()
axes[0][1].set_title("energy and Nehari functionals")
axes[1][0].plot(t, col("mass"))
axes[1][0].set_title("mass (should be ~0)")
axes[1][1].semilogy(t, [max(v, 1e-300) for v in col("energy_residual")])
axes[1][1].set_title("energy identity residual")
for ax in axes.flat:
    ax.set_xlabel("t")
fig.tight_layout()
out = os.path.join(os.path.dirname(path), "series.png")
fig.savefig(out, dpi=130)
print(out)
"#;

/// Paths produced by one experiment run.
#[derive(Debug, Clone, Serialize)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot_script: Option<PathBuf>,
}

pub fn write_artifacts(
    cfg: &ExperimentConfig,
    dir: &Path,
    traj: &Trajectory,
    extras: &SummaryExtras,
) -> LabResult<RunArtifacts> {
    std::fs::create_dir_all(dir)?;
    let mut artifacts =
        RunArtifacts { dir: dir.to_path_buf(), csv: None, summary: None, plot_script: None };
    if cfg.outputs.csv {
        let path = dir.join("series.csv");
        std::fs::write(&path, render_csv(traj)?)?;
        artifacts.csv = Some(path);
    }
    if cfg.outputs.summary {
        let path = dir.join("summary.json");
        std::fs::write(&path, render_summary(cfg, traj, extras)?)?;
        artifacts.summary = Some(path);
    }
    if cfg.outputs.plot_script {
        let path = dir.join("plot.py");
        std::fs::write(&path, PLOT_SCRIPT)?;
        artifacts.plot_script = Some(path);
    }
    Ok(artifacts)
}
