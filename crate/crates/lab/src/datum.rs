//! Initial-data families. Every family produces a zero-mean datum and
//! every produced datum goes through `validate_initial_datum`, so the
//! constructors cannot hand the solver an inadmissible state.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use filmlab_core::domain::{validate_initial_datum, DomainSpec, GridField, SpectralField};
use filmlab_core::error::{Error, Result};
use filmlab_core::functionals::{lambda_star, linf};
use filmlab_core::oracle::evaluate_at;

use crate::config::DatumConfig;

/// Validated description of an initial-data family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DatumDescriptor {
    /// Σ amplitude·cos(kπx/a) over the listed (k, amplitude) pairs.
    CosineCombo { modes: Vec<(usize, f64)> },
    /// Uniform random coefficients on modes 1..=max_k, rescaled so that
    /// ‖u‖_∞ = amplitude; deterministic in the seed.
    RandomBandlimited { max_k: usize, amplitude: f64, rng_seed: u64 },
    /// multiplier·λ*(v)·v for the base datum v; multiplier 1 lands on
    /// the Nehari manifold, multiplier > 1 gives I < 0.
    NehariScaled { base: Box<DatumDescriptor>, multiplier: f64 },
}

impl DatumDescriptor {
    /// Validates the raw config section into a descriptor.
    pub fn from_config(cfg: &DatumConfig) -> Result<Self> {
        match cfg.family.as_str() {
            "cosine_combo" => {
                let modes = cfg
                    .modes
                    .clone()
                    .ok_or_else(|| Error::InvalidDescriptor("cosine_combo needs `modes`".into()))?;
                if modes.is_empty() {
                    return Err(Error::InvalidDescriptor("cosine_combo needs at least one mode".into()));
                }
                for &(k, amp) in &modes {
                    if k == 0 {
                        return Err(Error::InvalidDescriptor(
                            "mode 0 is structurally absent; use k >= 1".into(),
                        ));
                    }
                    if !amp.is_finite() {
                        return Err(Error::InvalidDescriptor(format!("amplitude {amp} not finite")));
                    }
                }
                Ok(Self::CosineCombo { modes })
            }
            "random_bandlimited" => {
                let max_k = cfg
                    .max_k
                    .ok_or_else(|| Error::InvalidDescriptor("random_bandlimited needs `max_k`".into()))?;
                let amplitude = cfg.amplitude.ok_or_else(|| {
                    Error::InvalidDescriptor("random_bandlimited needs `amplitude`".into())
                })?;
                let rng_seed = cfg.rng_seed.ok_or_else(|| {
                    Error::InvalidDescriptor("random_bandlimited needs `rng_seed`".into())
                })?;
                if max_k == 0 || !(amplitude.is_finite() && amplitude > 0.0) {
                    return Err(Error::InvalidDescriptor(
                        "random_bandlimited needs max_k >= 1 and amplitude > 0".into(),
                    ));
                }
                Ok(Self::RandomBandlimited { max_k, amplitude, rng_seed })
            }
            "nehari_scaled" => {
                let base = cfg
                    .base
                    .as_ref()
                    .ok_or_else(|| Error::InvalidDescriptor("nehari_scaled needs `base`".into()))?;
                let multiplier = cfg.multiplier.ok_or_else(|| {
                    Error::InvalidDescriptor("nehari_scaled needs `multiplier`".into())
                })?;
                if !(multiplier.is_finite() && multiplier > 0.0) {
                    return Err(Error::InvalidDescriptor("multiplier must be positive".into()));
                }
                Ok(Self::NehariScaled {
                    base: Box::new(Self::from_config(base)?),
                    multiplier,
                })
            }
            other => Err(Error::InvalidDescriptor(format!("unknown datum family `{other}`"))),
        }
    }
}

fn build_spectral(d: &DatumDescriptor, spec: &DomainSpec) -> Result<SpectralField> {
    match d {
        DatumDescriptor::CosineCombo { modes } => {
            let mut coeffs = vec![0.0; spec.n_modes() - 1];
            for &(k, amp) in modes {
                if k > spec.n_modes() - 1 {
                    return Err(Error::InvalidDescriptor(format!(
                        "mode {k} beyond the resolution (max {})",
                        spec.n_modes() - 1
                    )));
                }
                coeffs[k - 1] += amp;
            }
            Ok(SpectralField::from_coeffs(coeffs))
        }
        DatumDescriptor::RandomBandlimited { max_k, amplitude, rng_seed } => {
            if *max_k > spec.n_modes() - 1 {
                return Err(Error::InvalidDescriptor(format!(
                    "max_k {max_k} beyond the resolution (max {})",
                    spec.n_modes() - 1
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*rng_seed);
            let mut coeffs = vec![0.0; spec.n_modes() - 1];
            for c in coeffs.iter_mut().take(*max_k) {
                *c = rng.gen_range(-1.0..1.0);
            }
            let raw = SpectralField::from_coeffs(coeffs);
            let peak = linf(&raw, spec)?;
            if peak == 0.0 {
                return Err(Error::InvalidDescriptor("random draw degenerated to zero".into()));
            }
            Ok(raw.scaled(amplitude / peak))
        }
        DatumDescriptor::NehariScaled { base, multiplier } => {
            let v = build_spectral(base, spec)?;
            let ls = lambda_star(&v, spec)?;
            Ok(v.scaled(multiplier * ls))
        }
    }
}

/// Builds the datum and runs it through initial-data validation.
pub fn build_datum(d: &DatumDescriptor, spec: &DomainSpec) -> Result<SpectralField> {
    let u = build_spectral(d, spec)?;
    let grid = GridField::new(evaluate_at(&u, spec, &spec.collocation_points()));
    validate_initial_datum(&grid, spec)
}
