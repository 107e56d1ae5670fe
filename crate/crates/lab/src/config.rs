//! Experiment configuration: a TOML document mirroring the run setup
//! field-for-field. Unknown keys are hard errors.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use filmlab_core::domain::DomainSpec;
use filmlab_core::integrator::StepperConfig;

use crate::error::{LabError, LabResult};

/// `[spec]` section: the domain triple.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub a: f64,
    pub p: f64,
    #[serde(default = "default_n_modes")]
    pub n_modes: usize,
}

fn default_n_modes() -> usize {
    64
}

impl SpecConfig {
    pub fn build(&self) -> LabResult<DomainSpec> {
        DomainSpec::new(self.a, self.p, self.n_modes)
            .map_err(|e| LabError::config(format!("invalid [spec]: {e}")))
    }
}

/// `[datum]` section; the `family` field selects which other keys apply.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumConfig {
    pub family: String,
    /// cosine_combo: list of (mode, amplitude) pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<(usize, f64)>>,
    /// random_bandlimited: highest populated mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_k: Option<usize>,
    /// random_bandlimited: target ‖u‖_∞.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// random_bandlimited: RNG seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    /// nehari_scaled: the datum to project onto the manifold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Box<DatumConfig>>,
    /// nehari_scaled: multiplier λ applied after the λ* scaling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<f64>,
}

/// `[stepper]` section, defaulted field-by-field from [`StepperConfig`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperSection {
    #[serde(default = "d_dt_init")]
    pub dt_init: f64,
    #[serde(default = "d_dt_min")]
    pub dt_min: f64,
    #[serde(default = "d_dt_max")]
    pub dt_max: f64,
    #[serde(default = "d_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "d_t_horizon")]
    pub t_horizon: f64,
    #[serde(default = "d_u_max")]
    pub u_max: f64,
    #[serde(default = "d_sample_stride")]
    pub sample_stride: usize,
    #[serde(default)]
    pub checkpoint_stride: usize,
    #[serde(default = "d_max_steps")]
    pub max_steps: usize,
}

fn d_dt_init() -> f64 {
    StepperConfig::default().dt_init
}
fn d_dt_min() -> f64 {
    StepperConfig::default().dt_min
}
fn d_dt_max() -> f64 {
    StepperConfig::default().dt_max
}
fn d_rel_tol() -> f64 {
    StepperConfig::default().rel_tol
}
fn d_t_horizon() -> f64 {
    StepperConfig::default().t_horizon
}
fn d_u_max() -> f64 {
    StepperConfig::default().u_max
}
fn d_sample_stride() -> usize {
    StepperConfig::default().sample_stride
}
fn d_max_steps() -> usize {
    StepperConfig::default().max_steps
}

impl Default for StepperSection {
    fn default() -> Self {
        let d = StepperConfig::default();
        Self {
            dt_init: d.dt_init,
            dt_min: d.dt_min,
            dt_max: d.dt_max,
            rel_tol: d.rel_tol,
            t_horizon: d.t_horizon,
            u_max: d.u_max,
            sample_stride: d.sample_stride,
            checkpoint_stride: d.checkpoint_stride,
            max_steps: d.max_steps,
        }
    }
}

impl StepperSection {
    pub fn build(&self) -> LabResult<StepperConfig> {
        let cfg = StepperConfig {
            dt_init: self.dt_init,
            dt_min: self.dt_min,
            dt_max: self.dt_max,
            rel_tol: self.rel_tol,
            t_horizon: self.t_horizon,
            u_max: self.u_max,
            sample_stride: self.sample_stride,
            checkpoint_stride: self.checkpoint_stride,
            max_steps: self.max_steps,
        };
        cfg.validate().map_err(|e| LabError::config(format!("invalid [stepper]: {e}")))?;
        Ok(cfg)
    }
}

/// `[outputs]` section: where and what to write.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    pub dir: PathBuf,
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub summary: bool,
    #[serde(default = "yes")]
    pub plot_script: bool,
}

fn yes() -> bool {
    true
}

/// Optional `[oracle]` section: run the finite-difference cross-check
/// alongside the spectral solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "d_n_fd")]
    pub n_fd: usize,
    #[serde(default = "d_fd_dt")]
    pub dt: f64,
}

fn d_n_fd() -> usize {
    2048
}
fn d_fd_dt() -> f64 {
    2e-4
}

/// One full experiment: domain, datum, stepper, outputs, optional
/// cross-check and named suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: SpecConfig,
    pub datum: DatumConfig,
    #[serde(default)]
    pub stepper: StepperSection,
    pub outputs: OutputsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
}

/// One entry of a sweep: a named datum evaluated under the shared
/// spec/stepper sections.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRun {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub datum: DatumConfig,
}

/// `sweep` subcommand document: shared sections plus a run list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub spec: SpecConfig,
    #[serde(default)]
    pub stepper: StepperSection,
    pub outputs: OutputsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    pub runs: Vec<SweepRun>,
}

pub fn load_experiment(path: &Path) -> LabResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| LabError::config(format!("{}: {e}", path.display())))
}

pub fn load_sweep(path: &Path) -> LabResult<SweepConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| LabError::config(format!("{}: {e}", path.display())))
}
