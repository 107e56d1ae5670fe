//! Dealiasing adequacy and linearization behavior of the nonlinear
//! source, checked against the quadrature oracle.

mod support;

use std::f64::consts::PI;

use filmlab_core::domain::{DomainSpec, SpectralField};
use filmlab_core::functionals::l2sq;
use filmlab_core::spectral::{fourth_derivative, nonlinear_source, rhs, second_derivative};
use support::{cosine_coefficient, midpoint_integral, ORACLE_POINTS};

fn field(entries: &[(usize, f64)], spec: &DomainSpec) -> SpectralField {
    let mut coeffs = vec![0.0; spec.n_modes() - 1];
    for &(k, amp) in entries {
        coeffs[k - 1] = amp;
    }
    SpectralField::from_coeffs(coeffs)
}

/// Cubic of a band-limited mixture (modes ≤ N/3): every retained source
/// coefficient must match direct quadrature of u³cos(kπx/a) to 1e−10,
/// including the structural removal of the mean.
#[test]
fn dealiased_cubic_matches_the_quadrature_oracle() {
    let sp = DomainSpec::new(PI, 3.0, 64).unwrap();
    let u = field(&[(1, 0.8), (2, 0.5), (5, -0.3)], &sp);
    let f = |x: f64| {
        let v = 0.8 * x.cos() + 0.5 * (2.0 * x).cos() - 0.3 * (5.0 * x).cos();
        v * v * v
    };
    let source = nonlinear_source(&u, &sp).unwrap();
    for k in 1..sp.n_modes() {
        let oracle = cosine_coefficient(f, k, sp.a(), ORACLE_POINTS);
        let got = source.coeffs()[k - 1];
        assert!(
            (got - oracle).abs() <= 1e-10,
            "mode {k}: source {got:.3e} vs oracle {oracle:.3e}"
        );
    }
    // the mixture must have a genuinely nonzero mean of u³, otherwise
    // the structural mean-subtraction path went unexercised
    let mean = midpoint_integral(f, sp.a(), ORACLE_POINTS) / sp.a();
    assert!(mean.abs() > 0.01, "u³ mean {mean} too small to exercise the nonlocal term");
}

/// Applying the second derivative twice reproduces the fourth
/// derivative coefficient-wise.
#[test]
fn second_derivative_squares_to_fourth() {
    let sp = DomainSpec::new(2.3, 3.0, 64).unwrap();
    let u = field(&[(1, 0.4), (3, -0.8), (9, 0.1)], &sp);
    let twice = second_derivative(&second_derivative(&u, &sp).unwrap(), &sp).unwrap();
    let fourth = fourth_derivative(&u, &sp).unwrap();
    for (a, b) in twice.coeffs().iter().zip(fourth.coeffs()) {
        let scale = 1.0f64.max(b.abs());
        assert!((a - b).abs() <= 1e-12 * scale);
    }
}

/// In the linear regime rhs(u) ≈ −u_xxxx with a cubic-sized remainder
/// whose constant is stable under grid refinement.
#[test]
fn linearization_constant_is_refinement_stable() {
    let remainder_constant = |n: usize| -> f64 {
        let sp = DomainSpec::new(PI, 3.0, n).unwrap();
        let eps = 1e-6;
        let u = field(&[(1, eps), (2, 0.5 * eps)], &sp);
        let r = rhs(&u, &sp).unwrap();
        let lin = fourth_derivative(&u, &sp).unwrap();
        let rem = r.axpy(1.0, &lin); // rhs + u_xxxx
        l2sq(&rem, &sp).sqrt() / (1.5 * eps).powi(3)
    };
    let c64 = remainder_constant(64);
    let c128 = remainder_constant(128);
    assert!(c64 > 0.0 && c64.is_finite());
    assert!(
        (c64 - c128).abs() / c64 <= 1e-6,
        "linearization constant drifted: {c64:.6e} vs {c128:.6e}"
    );
}
