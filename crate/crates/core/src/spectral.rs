//! Differential operators and the nonlinear/nonlocal source in the cosine
//! basis; together they form the semi-discrete right-hand side
//!
//!   u_t = −u_xxxx + f(u) − mean(f(u)),   f(u) = sign(u)·|u|^p.
//!
//! Derivatives are diagonal: mode k picks up −(kπ/a)² per second
//! derivative. The source is evaluated pointwise on a grid zero-padded by
//! a factor of two, transformed back, and truncated; dropping mode 0 of
//! that transform subtracts the discrete mean exactly, which is how the
//! nonlocal term keeps the state mean-free. Factor-2 padding makes the
//! retained modes alias-free for polynomial nonlinearities up to cubic.

use serde::Serialize;

use crate::domain::{check_spectral_size, dct_analyze, dct_synthesize, DomainSpec, SpectralField};
use crate::error::{Error, Result};

/// Grid refinement factor for dealiased pointwise evaluation.
pub const DEALIAS_FACTOR: usize = 2;

/// Diagonalization of the biharmonic operator: λ_k = (kπ/a)⁴, k = 1..N−1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearSymbol {
    eigenvalues: Vec<f64>,
}

impl LinearSymbol {
    pub fn new(spec: &DomainSpec) -> Self {
        let base = std::f64::consts::PI / spec.a();
        let eigenvalues = (1..spec.n_modes())
            .map(|k| {
                let w = k as f64 * base;
                w * w * w * w
            })
            .collect();
        Self { eigenvalues }
    }

    /// λ_k for k = 1..N−1, strictly increasing, all positive.
    #[inline]
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
}

/// Coefficient-wise multiply by −(kπ/a)².
pub fn second_derivative(u: &SpectralField, spec: &DomainSpec) -> Result<SpectralField> {
    check_spectral_size(u, spec)?;
    let base = std::f64::consts::PI / spec.a();
    let coeffs = u
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let w = (i + 1) as f64 * base;
            -(w * w) * c
        })
        .collect();
    Ok(SpectralField::from_coeffs(coeffs))
}

/// Coefficient-wise multiply by +(kπ/a)⁴.
pub fn fourth_derivative(u: &SpectralField, spec: &DomainSpec) -> Result<SpectralField> {
    check_spectral_size(u, spec)?;
    let symbol = LinearSymbol::new(spec);
    let coeffs = u
        .coeffs()
        .iter()
        .zip(symbol.eigenvalues())
        .map(|(c, lam)| lam * c)
        .collect();
    Ok(SpectralField::from_coeffs(coeffs))
}

/// Synthesize `u` on the dealiased grid of 2N half-sample points.
pub(crate) fn padded_values(u: &SpectralField, spec: &DomainSpec) -> Result<Vec<f64>> {
    check_spectral_size(u, spec)?;
    let m = DEALIAS_FACTOR * spec.n_modes();
    let mut full = vec![0.0; m];
    full[1..spec.n_modes()].copy_from_slice(u.coeffs());
    Ok(dct_synthesize(&full))
}

/// sign(u)·|u|^p, the odd continuous extension of |u|^{p−1}u.
#[inline]
pub(crate) fn signed_power(v: f64, p: f64) -> f64 {
    v.signum() * v.abs().powf(p)
}

/// Dealiased evaluation of the mean-subtracted source
/// f(u) − (1/a)∫f(u) dx projected onto modes 1..N−1.
///
/// Returns `Overflow` when any pointwise power leaves the f64 range;
/// callers treat that as blow-up evidence, not a crash.
pub fn nonlinear_source(u: &SpectralField, spec: &DomainSpec) -> Result<SpectralField> {
    let values = padded_values(u, spec)?;
    let p = spec.p();
    let mut f = Vec::with_capacity(values.len());
    for v in values {
        let w = signed_power(v, p);
        if !w.is_finite() {
            return Err(Error::Overflow);
        }
        f.push(w);
    }
    let coeffs = dct_analyze(&f);
    // dropping mode 0 is the exact discrete mean subtraction
    Ok(SpectralField::from_coeffs(coeffs[1..spec.n_modes()].to_vec()))
}

/// Full semi-discrete time derivative: −u_xxxx + mean-free source.
pub fn rhs(u: &SpectralField, spec: &DomainSpec) -> Result<SpectralField> {
    let stiff = fourth_derivative(u, spec)?;
    let source = nonlinear_source(u, spec)?;
    Ok(source.axpy(-1.0, &stiff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::to_grid;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spec(p: f64) -> DomainSpec {
        DomainSpec::new(PI, p, 64).unwrap()
    }

    fn mode(k: usize, amp: f64, spec: &DomainSpec) -> SpectralField {
        let mut coeffs = vec![0.0; spec.n_modes() - 1];
        coeffs[k - 1] = amp;
        SpectralField::from_coeffs(coeffs)
    }

    #[test]
    fn symbol_is_positive_and_increasing() {
        let s = LinearSymbol::new(&spec(3.0));
        let ev = s.eigenvalues();
        assert_eq!(ev.len(), 63);
        assert_relative_eq!(ev[0], 1.0, epsilon = 1e-12); // (π/π)⁴
        assert!(ev.windows(2).all(|w| w[0] < w[1]));
        assert!(ev.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn cosines_are_eigenfunctions_of_the_derivatives() {
        let sp = spec(3.0);
        let u1 = mode(1, 1.0, &sp);
        let d2 = second_derivative(&u1, &sp).unwrap();
        assert_relative_eq!(d2.coeffs()[0], -1.0, epsilon = 1e-12);

        let u2 = mode(2, 1.0, &sp);
        let d2 = second_derivative(&u2, &sp).unwrap();
        assert_relative_eq!(d2.coeffs()[1], -4.0, epsilon = 1e-12);

        let d4 = fourth_derivative(&u1, &sp).unwrap();
        assert_relative_eq!(d4.coeffs()[0], 1.0, epsilon = 1e-12);

        let u3 = mode(3, 1.0, &sp);
        let d4 = fourth_derivative(&u3, &sp).unwrap();
        assert_relative_eq!(d4.coeffs()[2], 81.0, epsilon = 1e-12);

        let z = SpectralField::zeros(&sp);
        assert!(second_derivative(&z, &sp).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn cubic_source_of_cos_x_matches_trig_expansion() {
        // cos³x = (3/4)cos x + (1/4)cos 3x; its mean over (0,π) is zero.
        let sp = spec(3.0);
        let f = nonlinear_source(&mode(1, 1.0, &sp), &sp).unwrap();
        assert_relative_eq!(f.coeffs()[0], 0.75, epsilon = 1e-12);
        assert_relative_eq!(f.coeffs()[2], 0.25, epsilon = 1e-12);
        for (i, c) in f.coeffs().iter().enumerate() {
            if i != 0 && i != 2 {
                assert!(c.abs() <= 1e-12, "mode {} leaked: {c}", i + 1);
            }
        }
    }

    #[test]
    fn source_output_is_mean_free_on_the_grid() {
        let sp = spec(2.0);
        let f = nonlinear_source(&mode(2, 1.0, &sp), &sp).unwrap();
        let grid = to_grid(&f, &sp).unwrap();
        let mean: f64 = grid.values().iter().sum::<f64>() / grid.len() as f64;
        assert!(mean.abs() * sp.a() <= 1e-12);
    }

    #[test]
    fn zero_field_is_a_fixed_point() {
        let sp = spec(3.0);
        let z = SpectralField::zeros(&sp);
        assert!(nonlinear_source(&z, &sp).unwrap().max_abs() == 0.0);
        assert!(rhs(&z, &sp).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn tiny_amplitudes_are_dominated_by_the_linear_part() {
        let sp = spec(3.0);
        let eps = 1e-6;
        let r = rhs(&mode(1, eps, &sp), &sp).unwrap();
        // rhs ≈ −ε·cos x with an O(ε³) cubic correction
        assert_relative_eq!(r.coeffs()[0], -eps, epsilon = 1e-17, max_relative = 1e-11);
        for (i, c) in r.coeffs().iter().enumerate().skip(1) {
            assert!(c.abs() <= eps * eps * eps, "mode {}: {c}", i + 1);
        }
    }

    #[test]
    fn overflow_is_signalled_not_propagated_as_nan() {
        let sp = spec(3.0);
        let u = mode(1, 1e140, &sp);
        assert_eq!(nonlinear_source(&u, &sp), Err(Error::Overflow));
        assert_eq!(rhs(&u, &sp), Err(Error::Overflow));
    }
}
