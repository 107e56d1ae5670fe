//! Domain description, grid/spectral state representations, and the
//! transforms between them.
//!
//! The problem lives on the interval (0, a) with no-flux boundary
//! conditions u_x = u_xxx = 0 at both walls. The matching basis is
//! cos(kπx/a), sampled at the cell-centred collocation points
//! x_j = (j+1/2)·a/N. On that grid the analysis/synthesis pair is the
//! even-symmetric cosine transform (DCT-II / DCT-III), which makes the
//! basis exactly orthogonal in the discrete inner product.
//!
//! A [`SpectralField`] stores modes k = 1..N−1 only. Mode 0 is not
//! zeroed, it is structurally absent, so every representable state has
//! exactly zero mean and the mass constraint cannot drift.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Interval length, nonlinearity exponent, and spectral resolution.
///
/// Fixes every operator and functional; immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainSpec {
    a: f64,
    p: f64,
    n_modes: usize,
}

impl DomainSpec {
    /// Requires a > 0, p > 1, n_modes ≥ 8.
    pub fn new(a: f64, p: f64, n_modes: usize) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidDomain(format!("interval length a = {a} must be positive")));
        }
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidDomain(format!("exponent p = {p} must exceed 1")));
        }
        if n_modes < 8 {
            return Err(Error::InvalidDomain(format!("n_modes = {n_modes} must be at least 8")));
        }
        Ok(Self { a, p, n_modes })
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Cell-centred collocation points x_j = (j+1/2)·a/N.
    pub fn collocation_points(&self) -> Vec<f64> {
        let n = self.n_modes as f64;
        (0..self.n_modes).map(|j| (j as f64 + 0.5) * self.a / n).collect()
    }

    /// Midpoint quadrature weight a/N.
    #[inline]
    pub fn quadrature_weight(&self) -> f64 {
        self.a / self.n_modes as f64
    }
}

/// Pointwise samples u(x_j) at the collocation points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    values: Vec<f64>,
}

impl GridField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Zero-mean state as cosine coefficients c_k of cos(kπx/a), k = 1..N−1.
///
/// `coeffs[i]` is the coefficient of mode k = i+1; mode 0 has no slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    coeffs: Vec<f64>,
}

impl SpectralField {
    /// Wraps raw coefficients for modes 1..=len.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// The zero field compatible with `spec` (N−1 vanishing modes).
    pub fn zeros(spec: &DomainSpec) -> Self {
        Self { coeffs: vec![0.0; spec.n_modes() - 1] }
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Number of retained modes (N−1).
    #[inline]
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// self + s·other, elementwise.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeKind {
    BlowUp,
    GlobalHorizonReached,
    Inconclusive,
}

/// Which signal declared blow-up, with the threshold values that fired.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BlowUpTrigger {
    AmplitudeThreshold { linf: f64, u_max: f64 },
    StepSizeCollapse { dt: f64, dt_min: f64 },
    Overflow,
}

/// Verdict of a run, with the evidence that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub kind: OutcomeKind,
    /// Final simulated time.
    pub t_end: f64,
    /// Extrapolated singularity time; present exactly when kind = BlowUp.
    pub blowup_time_estimate: Option<f64>,
    pub trigger: Option<BlowUpTrigger>,
    pub evidence: String,
}

impl RunOutcome {
    pub fn is_blow_up(&self) -> bool {
        self.kind == OutcomeKind::BlowUp
    }
}

// ---------------------------------------------------------------------------
// Even-symmetric cosine transform on the half-sample grid.
// ---------------------------------------------------------------------------

/// cos(kπ(j+1/2)/m), computed from an integer-reduced angle so that large
/// k·j products do not lose precision in the argument.
#[inline]
fn cos_kj(k: usize, j: usize, m: usize) -> f64 {
    let q = (k * (2 * j + 1)) % (4 * m);
    (std::f64::consts::PI * q as f64 / (2.0 * m as f64)).cos()
}

/// Tables above this size are computed on the fly instead of cached.
const TABLE_CACHE_LIMIT: usize = 1024;

fn cos_table(m: usize) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&m) {
        return Arc::clone(t);
    }
    let mut table = Vec::with_capacity(m * m);
    for k in 0..m {
        for j in 0..m {
            table.push(cos_kj(k, j, m));
        }
    }
    let table = Arc::new(table);
    cache.lock().unwrap().insert(m, Arc::clone(&table));
    table
}

/// DCT-II analysis: values → coefficients c_0..c_{m−1} with
/// c_0 = mean(v), c_k = (2/m)·Σ_j v_j cos(kπ(j+1/2)/m).
pub(crate) fn dct_analyze(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut coeffs = vec![0.0; m];
    if m <= TABLE_CACHE_LIMIT {
        let table = cos_table(m);
        for (k, c) in coeffs.iter_mut().enumerate() {
            let row = &table[k * m..(k + 1) * m];
            let mut acc = 0.0;
            for (v, t) in values.iter().zip(row) {
                acc += v * t;
            }
            *c = acc;
        }
    } else {
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, v) in values.iter().enumerate() {
                acc += v * cos_kj(k, j, m);
            }
            *c = acc;
        }
    }
    let scale = 2.0 / m as f64;
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c *= if k == 0 { 0.5 * scale } else { scale };
    }
    coeffs
}

/// DCT-III synthesis: coefficients c_0..c_{m−1} → values
/// v_j = c_0 + Σ_{k≥1} c_k cos(kπ(j+1/2)/m).
pub(crate) fn dct_synthesize(coeffs: &[f64]) -> Vec<f64> {
    let m = coeffs.len();
    let mut values = vec![coeffs[0]; m];
    if m <= TABLE_CACHE_LIMIT {
        let table = cos_table(m);
        for (k, &c) in coeffs.iter().enumerate().skip(1) {
            if c == 0.0 {
                continue;
            }
            let row = &table[k * m..(k + 1) * m];
            for (v, t) in values.iter_mut().zip(row) {
                *v += c * t;
            }
        }
    } else {
        for (k, &c) in coeffs.iter().enumerate().skip(1) {
            if c == 0.0 {
                continue;
            }
            for (j, v) in values.iter_mut().enumerate() {
                *v += c * cos_kj(k, j, m);
            }
        }
    }
    values
}

fn check_grid_size(u: &GridField, spec: &DomainSpec) -> Result<()> {
    if u.len() != spec.n_modes() {
        return Err(Error::SizeMismatch { expected: spec.n_modes(), got: u.len() });
    }
    Ok(())
}

pub(crate) fn check_spectral_size(u: &SpectralField, spec: &DomainSpec) -> Result<()> {
    if u.len() != spec.n_modes() - 1 {
        return Err(Error::SizeMismatch { expected: spec.n_modes() - 1, got: u.len() });
    }
    Ok(())
}

/// Inverse cosine transform: synthesize the zero-mean state on the
/// collocation grid.
pub fn to_grid(u: &SpectralField, spec: &DomainSpec) -> Result<GridField> {
    check_spectral_size(u, spec)?;
    let mut full = Vec::with_capacity(spec.n_modes());
    full.push(0.0); // mode 0 structurally absent
    full.extend_from_slice(u.coeffs());
    Ok(GridField::new(dct_synthesize(&full)))
}

/// Forward cosine transform; the mean component is discarded.
pub fn to_spectral(u: &GridField, spec: &DomainSpec) -> Result<SpectralField> {
    check_grid_size(u, spec)?;
    let mut coeffs = dct_analyze(u.values());
    coeffs.remove(0);
    Ok(SpectralField::from_coeffs(coeffs))
}

/// Relative threshold below which a mean-subtracted datum counts as zero.
pub const ZERO_DATUM_REL: f64 = 1e-14;

/// Accepts a pointwise initial datum, projects out its mean, and returns
/// the spectral representation.
///
/// Rejects non-finite samples and data that are numerically constant
/// (max |c_k| below 1e−14 × max |u0|).
pub fn validate_initial_datum(u0: &GridField, spec: &DomainSpec) -> Result<SpectralField> {
    check_grid_size(u0, spec)?;
    if !u0.all_finite() {
        return Err(Error::NonFinite);
    }
    let scale = u0.max_abs();
    if scale == 0.0 {
        return Err(Error::ZeroDatum);
    }
    let field = to_spectral(u0, spec)?;
    if field.max_abs() < ZERO_DATUM_REL * scale {
        return Err(Error::ZeroDatum);
    }
    Ok(field)
}
