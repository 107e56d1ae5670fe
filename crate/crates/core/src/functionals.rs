//! Scalar functionals and identity monitors:
//!
//!   J(u) = ½‖u_xx‖₂² − ‖u‖_{p+1}^{p+1}/(p+1)      (energy)
//!   I(u) = ‖u_xx‖₂² − ‖u‖_{p+1}^{p+1}             (Nehari functional)
//!   λ*(u) = (‖u_xx‖₂²/‖u‖_{p+1}^{p+1})^{1/(p−1)}   (Nehari scaling)
//!
//! plus the time-identities a healthy trajectory must satisfy:
//! energy dissipation ∫₀ᵗ‖u_τ‖₂² dτ + J(t) = J(0), the L² law
//! d/dt‖u‖₂² = −2I(u), and the concavity quantities built from
//! M(t) = ½∫₀ᵗ‖u‖₂² dτ (so M′ = ½‖u‖₂² and M″ = −I).
//!
//! ‖u_xx‖₂² is summed in coefficient space; the L^{p+1} integral is a
//! midpoint quadrature on the dealiased grid, which is exact for the
//! integer exponents p ≤ 3.

use serde::{Deserialize, Serialize};

use crate::domain::{DomainSpec, GridField, SpectralField};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::spectral::{self, LinearSymbol};

/// All scalar diagnostics attached to one accepted sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSample {
    /// Sample time.
    pub t: f64,
    /// Last accepted step (0 at t = 0).
    pub dt: f64,
    /// Grid quadrature of u; structurally ~0 for spectral states.
    pub mass: f64,
    /// ‖u‖₂²
    pub l2sq: f64,
    /// ‖u‖_{p+1}^{p+1}
    pub lp1: f64,
    /// ‖u‖_∞
    pub linf: f64,
    /// ‖u_xx‖₂²
    pub h2sq: f64,
    /// Energy J(u).
    pub j: f64,
    /// Nehari value I(u).
    pub i: f64,
    /// ‖u_t‖₂², with u_t taken from the semi-discrete right-hand side.
    pub ut_l2sq: f64,
    /// M(t) = ½∫₀ᵗ‖u‖₂² dτ, trapezoid-accumulated over accepted steps.
    pub m: f64,
    /// M′(t) = ½‖u‖₂², exact by construction.
    pub mp: f64,
    /// M″(t) = −I(u), exact by construction.
    pub mpp: f64,
    /// |∫₀ᵗ‖u_τ‖₂² dτ + J(t) − J(0)|
    pub energy_residual: f64,
}

impl DiagnosticsSample {
    /// The algebraic identities every sample must satisfy, checked at
    /// 1e−12 relative: J = h2sq/2 − lp1/(p+1), I = h2sq − lp1,
    /// Mp = l2sq/2 and Mpp = −I exactly.
    pub fn algebraic_invariants_ok(&self, p: f64) -> bool {
        let scale_j = 1.0f64.max(self.j.abs());
        let scale_i = 1.0f64.max(self.i.abs());
        (self.j - (0.5 * self.h2sq - self.lp1 / (p + 1.0))).abs() <= 1e-12 * scale_j
            && (self.i - (self.h2sq - self.lp1)).abs() <= 1e-12 * scale_i
            && self.mp == 0.5 * self.l2sq
            && self.mpp == -self.i
    }
}

/// Pointwise functional values of a state, independent of any trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointValues {
    pub mass: f64,
    pub l2sq: f64,
    pub lp1: f64,
    pub linf: f64,
    pub h2sq: f64,
    pub j: f64,
    pub i: f64,
    pub ut_l2sq: f64,
}

/// Quadrature of u over (0, a); exactly 0 for any spectral state.
pub fn mass_spectral(_u: &SpectralField) -> f64 {
    0.0
}

/// Midpoint quadrature of grid samples over (0, a).
pub fn mass_grid(u: &GridField, spec: &DomainSpec) -> f64 {
    u.values().iter().sum::<f64>() * spec.a() / u.len() as f64
}

/// ‖u‖₂² = (a/2)·Σ c_k².
pub fn l2sq(u: &SpectralField, spec: &DomainSpec) -> f64 {
    0.5 * spec.a() * u.coeffs().iter().map(|c| c * c).sum::<f64>()
}

/// ‖u_xx‖₂² = (a/2)·Σ (kπ/a)⁴ c_k².
pub fn h2sq(u: &SpectralField, spec: &DomainSpec) -> f64 {
    let symbol = LinearSymbol::new(spec);
    0.5 * spec.a()
        * u.coeffs()
            .iter()
            .zip(symbol.eigenvalues())
            .map(|(c, lam)| lam * c * c)
            .sum::<f64>()
}

/// ‖u‖_{p+1}^{p+1} by midpoint quadrature on the dealiased grid.
pub fn lp1(u: &SpectralField, spec: &DomainSpec) -> Result<f64> {
    let values = spectral::padded_values(u, spec)?;
    let q = spec.p() + 1.0;
    let mut acc = 0.0;
    for v in &values {
        acc += v.abs().powf(q);
    }
    let out = acc * spec.a() / values.len() as f64;
    if !out.is_finite() {
        return Err(Error::Overflow);
    }
    Ok(out)
}

/// ‖u‖_∞ over the dealiased grid.
pub fn linf(u: &SpectralField, spec: &DomainSpec) -> Result<f64> {
    let values = spectral::padded_values(u, spec)?;
    Ok(values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Energy J(u) = ½‖u_xx‖₂² − ‖u‖_{p+1}^{p+1}/(p+1).
pub fn energy_j(u: &SpectralField, spec: &DomainSpec) -> Result<f64> {
    Ok(0.5 * h2sq(u, spec) - lp1(u, spec)? / (spec.p() + 1.0))
}

/// Nehari functional I(u) = ‖u_xx‖₂² − ‖u‖_{p+1}^{p+1}.
pub fn nehari_i(u: &SpectralField, spec: &DomainSpec) -> Result<f64> {
    Ok(h2sq(u, spec) - lp1(u, spec)?)
}

/// The unique positive scaling with I(λ*u) = 0:
/// λ* = (‖u_xx‖₂²/‖u‖_{p+1}^{p+1})^{1/(p−1)}.
pub fn lambda_star(u: &SpectralField, spec: &DomainSpec) -> Result<f64> {
    let num = h2sq(u, spec);
    let den = lp1(u, spec)?;
    if num == 0.0 || den == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok((num / den).powf(1.0 / (spec.p() - 1.0)))
}

/// All pointwise diagnostics of a state in one pass.
///
/// `ut_l2sq` evaluates the semi-discrete right-hand side, so this can
/// report `Overflow` for states already past the floating-point range.
pub fn point_values(u: &SpectralField, spec: &DomainSpec) -> Result<PointValues> {
    let values = spectral::padded_values(u, spec)?;
    let q = spec.p() + 1.0;
    let (mut sum, mut pow_sum, mut amax) = (0.0f64, 0.0f64, 0.0f64);
    for v in &values {
        sum += v;
        pow_sum += v.abs().powf(q);
        amax = amax.max(v.abs());
    }
    let w = spec.a() / values.len() as f64;
    let lp1 = pow_sum * w;
    if !lp1.is_finite() {
        return Err(Error::Overflow);
    }
    let l2 = l2sq(u, spec);
    let h2 = h2sq(u, spec);
    let ut = crate::spectral::rhs(u, spec)?;
    Ok(PointValues {
        mass: sum * w,
        l2sq: l2,
        lp1,
        linf: amax,
        h2sq: h2,
        j: 0.5 * h2 - lp1 / q,
        i: h2 - lp1,
        ut_l2sq: l2sq(&ut, spec),
    })
}

// ---------------------------------------------------------------------------
// Trajectory monitors
// ---------------------------------------------------------------------------

/// Three-point first derivative on a possibly non-uniform grid
/// (quadratic fit through the three samples; second-order accurate).
pub(crate) fn centered_first_derivative(
    t0: f64,
    t1: f64,
    t2: f64,
    f0: f64,
    f1: f64,
    f2: f64,
) -> f64 {
    let h1 = t1 - t0;
    let h2 = t2 - t1;
    -f0 * h2 / (h1 * (h1 + h2)) + f1 * (h2 - h1) / (h1 * h2) + f2 * h1 / (h2 * (h1 + h2))
}

/// Three-point second derivative on a possibly non-uniform grid.
pub(crate) fn centered_second_derivative(
    t0: f64,
    t1: f64,
    t2: f64,
    f0: f64,
    f1: f64,
    f2: f64,
) -> f64 {
    let h1 = t1 - t0;
    let h2 = t2 - t1;
    2.0 * (f0 * h2 - f1 * (h1 + h2) + f2 * h1) / (h1 * h2 * (h1 + h2))
}

/// Residual series of the energy identity ∫₀ᵗ‖u_τ‖₂² dτ + J(t) − J(0),
/// with the integral trapezoid-accumulated over the sample times.
pub fn energy_identity_residual(traj: &Trajectory) -> Result<Vec<f64>> {
    let samples = &traj.samples;
    if samples.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let j0 = samples[0].j;
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(samples.len());
    out.push((samples[0].j - j0).abs());
    for w in samples.windows(2) {
        acc += 0.5 * (w[1].t - w[0].t) * (w[0].ut_l2sq + w[1].ut_l2sq);
        out.push((acc + w[1].j - j0).abs());
    }
    Ok(out)
}

/// Pointwise residual of d/dt‖u‖₂² = −2I(u) at one interior sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub t: f64,
    /// d/dt‖u‖₂² + 2I, from centered differences.
    pub residual: f64,
    /// `residual` divided by max(|2I|, 1e−14).
    pub relative: f64,
}

/// Centered-difference check of the L² identity at every interior sample.
pub fn l2_identity_residual(traj: &Trajectory) -> Result<Vec<IdentityResidual>> {
    let s = &traj.samples;
    if s.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: s.len() });
    }
    let mut out = Vec::with_capacity(s.len() - 2);
    for w in s.windows(3) {
        let d = centered_first_derivative(w[0].t, w[1].t, w[2].t, w[0].l2sq, w[1].l2sq, w[2].l2sq);
        let residual = d + 2.0 * w[1].i;
        let scale = (2.0 * w[1].i).abs().max(1e-14);
        out.push(IdentityResidual { t: w[1].t, residual, relative: residual.abs() / scale });
    }
    Ok(out)
}

/// Sign tally of a derivative series.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCounts {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl SignCounts {
    fn record(&mut self, v: f64) {
        if v > 0.0 {
            self.positive += 1;
        } else if v < 0.0 {
            self.negative += 1;
        } else {
            self.zero += 1;
        }
    }
}

/// Evidence produced by [`monotonicity_monitor`]; nothing here is asserted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    /// (midpoint t, forward difference of ‖u‖_{p+1}^{p+1}).
    pub lp1_diffs: Vec<(f64, f64)>,
    /// (midpoint t, forward difference of I).
    pub i_diffs: Vec<(f64, f64)>,
    /// Signs of d/dt‖u‖_{p+1}^{p+1}.
    pub lp1_sign_counts: SignCounts,
    /// Interior samples where dI/dt ≤ −2‖u_t‖₂² failed beyond tolerance,
    /// as (t, overshoot magnitude).
    pub violations: Vec<(f64, f64)>,
    /// Number of interior samples checked.
    pub checked: usize,
}

/// Records the discrete growth of ‖u‖_{p+1}^{p+1} and of I, and checks
/// the dissipation inequality dI/dt ≤ −2‖u_t‖₂² pointwise.
///
/// The tolerance absorbs finite-difference error:
/// tol = 1e−10 + 1e−3·(|dI/dt| + 2‖u_t‖₂²). Violations are recorded as
/// findings, never asserted.
pub fn monotonicity_monitor(traj: &Trajectory) -> Result<MonotonicityReport> {
    let s = &traj.samples;
    if s.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: s.len() });
    }
    let mut lp1_diffs = Vec::with_capacity(s.len() - 1);
    let mut i_diffs = Vec::with_capacity(s.len() - 1);
    let mut lp1_sign_counts = SignCounts::default();
    for w in s.windows(2) {
        let h = w[1].t - w[0].t;
        let tm = 0.5 * (w[0].t + w[1].t);
        let dlp1 = (w[1].lp1 - w[0].lp1) / h;
        let di = (w[1].i - w[0].i) / h;
        lp1_sign_counts.record(dlp1);
        lp1_diffs.push((tm, dlp1));
        i_diffs.push((tm, di));
    }
    let mut violations = Vec::new();
    let mut checked = 0;
    for w in s.windows(3) {
        let didt = centered_first_derivative(w[0].t, w[1].t, w[2].t, w[0].i, w[1].i, w[2].i);
        let bound = -2.0 * w[1].ut_l2sq;
        let tol = 1e-10 + 1e-3 * (didt.abs() + 2.0 * w[1].ut_l2sq);
        checked += 1;
        if didt > bound + tol {
            violations.push((w[1].t, didt - bound));
        }
    }
    Ok(MonotonicityReport { lp1_diffs, i_diffs, lp1_sign_counts, violations, checked })
}

/// Admissible upper end of the ε-interval: 1 − √(2/(p+1)).
pub fn epsilon_upper(p: f64) -> f64 {
    1.0 - (2.0 / (p + 1.0)).sqrt()
}

/// Midpoint of the admissible ε-interval, used when no ε is supplied.
pub fn default_epsilon(p: f64) -> f64 {
    0.5 * epsilon_upper(p)
}

/// Concavity diagnostics built from M(t): the auxiliary function
/// F = M^{−η} and the margin M″M − ((p+1)/2)(1−ε)²(M′)².
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub epsilon: f64,
    /// η = ((p+1)(1−ε)² − 2)/2 > 0.
    pub eta: f64,
    /// (t, F(t) = M(t)^{−η}) over samples with M > 0.
    pub f_series: Vec<(f64, f64)>,
    /// Signs of the second differences of F.
    pub sign_summary: SignCounts,
    /// (t, M″M − ((p+1)/2)(1−ε)²(M′)²) at every sample.
    pub margin_series: Vec<(f64, f64)>,
    /// True when M ≡ 0 on the whole trajectory (F undefined).
    pub degenerate: bool,
}

/// Builds the concavity report; ε defaults to the interval midpoint.
pub fn concavity_report(traj: &Trajectory, epsilon: Option<f64>) -> Result<ConcavityReport> {
    let s = &traj.samples;
    if s.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let p = traj.spec.p();
    let upper = epsilon_upper(p);
    let eps = epsilon.unwrap_or_else(|| default_epsilon(p));
    if !(eps > 0.0 && eps < upper) {
        return Err(Error::EpsilonOutOfRange { epsilon: eps, upper });
    }
    let eta = 0.5 * ((p + 1.0) * (1.0 - eps) * (1.0 - eps) - 2.0);
    let factor = 0.5 * (p + 1.0) * (1.0 - eps) * (1.0 - eps);

    let f_series: Vec<(f64, f64)> =
        s.iter().filter(|x| x.m > 0.0).map(|x| (x.t, x.m.powf(-eta))).collect();
    let degenerate = f_series.is_empty();

    let mut sign_summary = SignCounts::default();
    for w in f_series.windows(3) {
        let d2 = centered_second_derivative(w[0].0, w[1].0, w[2].0, w[0].1, w[1].1, w[2].1);
        sign_summary.record(d2);
    }

    let margin_series =
        s.iter().map(|x| (x.t, x.mpp * x.m - factor * x.mp * x.mp)).collect();

    Ok(ConcavityReport { epsilon: eps, eta, f_series, sign_summary, margin_series, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::Trajectory;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spec(p: f64) -> DomainSpec {
        DomainSpec::new(PI, p, 64).unwrap()
    }

    fn cos_x(amp: f64, sp: &DomainSpec) -> SpectralField {
        let mut coeffs = vec![0.0; sp.n_modes() - 1];
        coeffs[0] = amp;
        SpectralField::from_coeffs(coeffs)
    }

    #[test]
    fn mass_of_spectral_states_is_structurally_zero() {
        let sp = spec(3.0);
        assert_eq!(mass_spectral(&cos_x(2.7, &sp)), 0.0);
    }

    #[test]
    fn grid_mass_quadratures() {
        let sp = spec(3.0);
        let ones = GridField::new(vec![1.0; 64]);
        assert_relative_eq!(mass_grid(&ones, &sp), PI, epsilon = 1e-12);
        let cosg = GridField::new(sp.collocation_points().iter().map(|x| x.cos()).collect());
        assert!(mass_grid(&cosg, &sp).abs() <= 1e-12);
    }

    // Closed forms for u = A·cos x on (0, π): ‖u_xx‖₂² = A²π/2,
    // ‖u‖₄⁴ = A⁴·3π/8, hence J = 5π/32 and I = π/8 at A = 1.
    #[test]
    fn closed_form_energy_values_at_unit_amplitude() {
        let sp = spec(3.0);
        let u = cos_x(1.0, &sp);
        assert_relative_eq!(h2sq(&u, &sp), PI / 2.0, max_relative = 1e-12);
        assert_relative_eq!(lp1(&u, &sp).unwrap(), 3.0 * PI / 8.0, max_relative = 1e-12);
        assert_relative_eq!(energy_j(&u, &sp).unwrap(), 5.0 * PI / 32.0, max_relative = 1e-10);
        assert_relative_eq!(nehari_i(&u, &sp).unwrap(), PI / 8.0, max_relative = 1e-10);
    }

    #[test]
    fn closed_form_energy_values_at_amplitude_two() {
        let sp = spec(3.0);
        let u = cos_x(2.0, &sp);
        assert_relative_eq!(energy_j(&u, &sp).unwrap(), -PI / 2.0, max_relative = 1e-10);
        assert_relative_eq!(nehari_i(&u, &sp).unwrap(), -4.0 * PI, max_relative = 1e-10);
        assert_eq!(energy_j(&SpectralField::zeros(&sp), &sp).unwrap(), 0.0);
    }

    #[test]
    fn lambda_star_closed_form_and_homogeneity() {
        let sp = spec(3.0);
        let u = cos_x(1.0, &sp);
        let ls = lambda_star(&u, &sp).unwrap();
        assert_relative_eq!(ls, (4.0f64 / 3.0).sqrt(), max_relative = 1e-10);
        // I(λ*u) = 0 and λ*(cu) = λ*(u)/c
        let scaled = u.scaled(ls);
        assert!(nehari_i(&scaled, &sp).unwrap().abs() <= 1e-10 * h2sq(&scaled, &sp));
        let c = 3.7;
        assert_relative_eq!(lambda_star(&u.scaled(c), &sp).unwrap(), ls / c, max_relative = 1e-10);
        assert_eq!(lambda_star(&SpectralField::zeros(&sp), &sp), Err(Error::ZeroField));
    }

    #[test]
    fn point_values_agree_with_individual_functionals() {
        let sp = spec(3.0);
        let u = cos_x(0.8, &sp);
        let pv = point_values(&u, &sp).unwrap();
        assert_relative_eq!(pv.j, energy_j(&u, &sp).unwrap(), max_relative = 1e-14);
        assert_relative_eq!(pv.i, nehari_i(&u, &sp).unwrap(), max_relative = 1e-14);
        assert_relative_eq!(pv.linf, linf(&u, &sp).unwrap(), max_relative = 1e-14);
        assert!(pv.mass.abs() <= 1e-13);
    }

    fn flat_zero_trajectory(n: usize) -> Trajectory {
        let sp = spec(3.0);
        let samples = (0..n)
            .map(|k| DiagnosticsSample {
                t: k as f64 * 0.1,
                dt: if k == 0 { 0.0 } else { 0.1 },
                mass: 0.0,
                l2sq: 0.0,
                lp1: 0.0,
                linf: 0.0,
                h2sq: 0.0,
                j: 0.0,
                i: 0.0,
                ut_l2sq: 0.0,
                m: 0.0,
                mp: 0.0,
                mpp: 0.0,
                energy_residual: 0.0,
            })
            .collect();
        Trajectory::from_parts(
            sp,
            samples,
            Vec::new(),
            crate::domain::RunOutcome {
                kind: crate::domain::OutcomeKind::GlobalHorizonReached,
                t_end: (n - 1) as f64 * 0.1,
                blowup_time_estimate: None,
                trigger: None,
                evidence: String::new(),
            },
            None,
        )
    }

    #[test]
    fn zero_trajectory_monitors_are_silent() {
        let traj = flat_zero_trajectory(5);
        let e = energy_identity_residual(&traj).unwrap();
        assert!(e.iter().all(|&r| r == 0.0));
        let l2 = l2_identity_residual(&traj).unwrap();
        assert!(l2.iter().all(|r| r.residual == 0.0));
        let mono = monotonicity_monitor(&traj).unwrap();
        assert!(mono.violations.is_empty());
        assert_eq!(mono.lp1_sign_counts.zero, 4);
        let conc = concavity_report(&traj, None).unwrap();
        assert!(conc.degenerate);
        assert!(conc.f_series.is_empty());
    }

    #[test]
    fn single_sample_energy_residual_is_zero() {
        let traj = flat_zero_trajectory(1);
        assert_eq!(energy_identity_residual(&traj).unwrap(), vec![0.0]);
        assert!(matches!(l2_identity_residual(&traj), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn concavity_interval_and_eta_for_cubic() {
        let p = 3.0;
        let upper = epsilon_upper(p);
        assert_relative_eq!(upper, 1.0 - 0.5f64.sqrt(), epsilon = 1e-15);
        let eps = default_epsilon(p);
        assert_relative_eq!(eps, 0.5 * upper, epsilon = 1e-15);
        let traj = flat_zero_trajectory(4);
        let rep = concavity_report(&traj, None).unwrap();
        assert_relative_eq!(rep.epsilon, 0.146446609, epsilon = 1e-8);
        assert_relative_eq!(rep.eta, 0.457106781, epsilon = 1e-8);
        assert!(matches!(
            concavity_report(&traj, Some(0.5)),
            Err(Error::EpsilonOutOfRange { .. })
        ));
    }

    #[test]
    fn algebraic_decomposition_holds_for_random_fields() {
        // J = ((p−1)/(2(p+1)))·h2sq + I/(p+1)
        let sp = spec(3.0);
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..100 {
            let coeffs: Vec<f64> = (0..63)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 2.0
                })
                .collect();
            let u = SpectralField::from_coeffs(coeffs);
            let j = energy_j(&u, &sp).unwrap();
            let i = nehari_i(&u, &sp).unwrap();
            let h2 = h2sq(&u, &sp);
            let recon = (sp.p() - 1.0) / (2.0 * (sp.p() + 1.0)) * h2 + i / (sp.p() + 1.0);
            assert_relative_eq!(j, recon, max_relative = 1e-12, epsilon = 1e-12);
        }
    }
}
