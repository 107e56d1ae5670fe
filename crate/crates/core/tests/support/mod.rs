//! Independent quadrature oracles for the integration tests.
//!
//! Everything here evaluates analytic integrands by plain midpoint
//! Riemann sums at high resolution; no code from the transform or
//! functional paths under test is reused.
//!
//! Each test binary pulls in the subset it needs.
#![allow(dead_code)]

/// Midpoint-rule integral of `f` over (0, a) with `n` cells.
pub fn midpoint_integral(f: impl Fn(f64) -> f64, a: f64, n: usize) -> f64 {
    let h = a / n as f64;
    (0..n).map(|j| f((j as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Cosine coefficient (2/a)·∫₀ᵃ f(x)·cos(kπx/a) dx by quadrature.
pub fn cosine_coefficient(f: impl Fn(f64) -> f64, k: usize, a: f64, n: usize) -> f64 {
    let w = k as f64 * std::f64::consts::PI / a;
    2.0 / a * midpoint_integral(|x| f(x) * (w * x).cos(), a, n)
}

/// Quadrature resolution for every oracle comparison.
pub const ORACLE_POINTS: usize = 4096;
