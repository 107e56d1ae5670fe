//! Variational toolkit around the Nehari manifold N = {u ≠ 0 : I(u) = 0}.
//!
//! Scaling any nonzero u by λ*(u) = (‖u_xx‖₂²/‖u‖_{p+1}^{p+1})^{1/(p−1)}
//! lands on N, which eliminates the manifold constraint analytically: the
//! potential-well depth d = inf_N J becomes the unconstrained minimum of
//! the reduced functional
//!
//!   G(u) = J(λ*(u)·u) = ((p−1)/(2(p+1)))·(λ*(u))²·‖u_xx‖₂²,
//!
//! which is invariant under u ↦ c·u. Descent therefore runs on
//! renormalized shapes (‖u_xx‖₂ = 1) with the gradient taken in the
//! ‖u_xx‖₂ inner product; that Sobolev preconditioning removes the
//! (kπ/a)⁴ stiffness from the coefficient-space gradient.
//!
//! Λ_α = sup{½‖u‖₂² : u ∈ N, ‖u_xx‖₂ ≤ √(2α(p+1)/(p−1))} is estimated
//! the same way by projected ascent. A sampled sup over an
//! infinite-dimensional manifold is only ever a LOWER bound, and every
//! consumer of the estimate treats it as such.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{DomainSpec, SpectralField};
use crate::error::{Error, Result};
use crate::exec;
use crate::functionals::{energy_j, h2sq, l2sq, lambda_star, lp1, nehari_i};
use crate::spectral::{nonlinear_source, LinearSymbol};

/// Multistart gradient-descent settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Stop when the preconditioned gradient norm falls below this.
    pub grad_tol: f64,
    /// Iteration budget per seed; exceeding it flags NotConverged.
    pub max_iters: usize,
    /// Number of random band-limited seeds beside the single-mode ones.
    pub multistart_random: usize,
    /// RNG seed for the random starts.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { grad_tol: 1e-9, max_iters: 5000, multistart_random: 8, seed: 7 }
    }
}

/// Output of the well-depth search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WellDepthEstimate {
    /// Best value of J over the sampled Nehari manifold.
    pub d_hat: f64,
    /// The state on N realizing `d_hat`.
    pub minimizer: SpectralField,
    pub n_modes_used: usize,
    pub multistart_count: usize,
    /// False when the winning seed exhausted its iteration budget.
    pub converged: bool,
}

/// Output of the Λ_α search; a lower bound by construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaAlphaEstimate {
    /// Best found ½‖u‖₂² over the sampled α-slice of N.
    pub lambda_alpha_hat: f64,
    /// The feasible state realizing it.
    pub maximizer: SpectralField,
    /// Constraint radius √(2α(p+1)/(p−1)) on ‖u_xx‖₂.
    pub radius: f64,
    pub converged: bool,
}

/// Scale `u` onto the Nehari manifold: returns λ*(u)·u with |I| ≈ 0.
pub fn project_to_nehari(u: &SpectralField, spec: &DomainSpec) -> Result<SpectralField> {
    let ls = lambda_star(u, spec)?;
    Ok(u.scaled(ls))
}

fn normalize_h(u: &SpectralField, spec: &DomainSpec) -> Option<SpectralField> {
    let h2 = h2sq(u, spec);
    if h2 > 0.0 && h2.is_finite() {
        Some(u.scaled(1.0 / h2.sqrt()))
    } else {
        None
    }
}

/// ∂‖u‖_{p+1}^{p+1}/∂c_k = (p+1)·(a/2)·f_k with f = sign(u)|u|^p.
fn lp1_gradient(u: &SpectralField, spec: &DomainSpec) -> Result<Vec<f64>> {
    let f = nonlinear_source(u, spec)?;
    let scale = (spec.p() + 1.0) * 0.5 * spec.a();
    Ok(f.coeffs().iter().map(|c| scale * c).collect())
}

/// Preconditioned gradient of the reduced functional G at a unit shape,
/// together with its H-norm. The H-metric is ⟨u,v⟩ = ∫u_xx·v_xx, so the
/// Riemannian gradient divides the coefficient gradient by (a/2)·2·λ_k.
fn reduced_gradient(
    u: &SpectralField,
    spec: &DomainSpec,
    symbol: &LinearSymbol,
) -> Result<(Vec<f64>, f64, f64)> {
    let p = spec.p();
    let kappa = (p - 1.0) / (2.0 * (p + 1.0));
    let beta = (p + 1.0) / (p - 1.0);
    let gamma = 2.0 / (p - 1.0);
    let s = h2sq(u, spec);
    let q = lp1(u, spec)?;
    if s == 0.0 || q == 0.0 {
        return Err(Error::ZeroField);
    }
    let g_val = kappa * s.powf(beta) * q.powf(-gamma);
    let dq = lp1_gradient(u, spec)?;
    let c_s = kappa * beta * s.powf(beta - 1.0) * q.powf(-gamma);
    let c_q = kappa * gamma * s.powf(beta) * q.powf(-gamma - 1.0);
    let a = spec.a();
    let mut grad_h = Vec::with_capacity(u.len());
    let mut norm_sq = 0.0;
    for (k, (&c, &lam)) in u.coeffs().iter().zip(symbol.eigenvalues()).enumerate() {
        let euclid = c_s * a * lam * c - c_q * dq[k];
        let gh = euclid / (a * lam);
        norm_sq += 0.5 * a * lam * gh * gh;
        grad_h.push(gh);
    }
    Ok((grad_h, norm_sq.sqrt(), g_val))
}

struct DescentOutcome {
    shape: SpectralField,
    value: f64,
    converged: bool,
}

/// Backtracking gradient descent of G over unit shapes from one seed.
fn descend_reduced(
    seed: SpectralField,
    spec: &DomainSpec,
    symbol: &LinearSymbol,
    cfg: &OptimizerConfig,
) -> Result<DescentOutcome> {
    let mut u = normalize_h(&seed, spec).ok_or(Error::ZeroField)?;
    let (mut grad, mut gnorm, mut value) = reduced_gradient(&u, spec, symbol)?;
    let mut step = 1.0f64;
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        if gnorm <= cfg.grad_tol {
            converged = true;
            break;
        }
        let dir = SpectralField::from_coeffs(grad.clone());
        let mut accepted = false;
        let mut s = step;
        while s > 1e-16 {
            let cand = u.axpy(-s, &dir);
            if let Some(cand) = normalize_h(&cand, spec) {
                if let Ok((g2, n2, v2)) = reduced_gradient(&cand, spec, symbol) {
                    if v2 < value - 1e-4 * s * gnorm * gnorm {
                        u = cand;
                        grad = g2;
                        gnorm = n2;
                        value = v2;
                        accepted = true;
                        break;
                    }
                }
            }
            s *= 0.5;
        }
        if !accepted {
            // no descent direction at line-search resolution: stationary
            converged = gnorm <= 1e3 * cfg.grad_tol;
            break;
        }
        step = (s * 2.0).min(4.0);
    }
    Ok(DescentOutcome { shape: u, value, converged })
}

fn single_mode_seed(k: usize, spec: &DomainSpec) -> SpectralField {
    let mut coeffs = vec![0.0; spec.n_modes() - 1];
    coeffs[k - 1] = 1.0;
    SpectralField::from_coeffs(coeffs)
}

fn random_bandlimited_seed(rng: &mut ChaCha8Rng, spec: &DomainSpec) -> SpectralField {
    let band = (spec.n_modes() / 3).max(4).min(spec.n_modes() - 1);
    let mut coeffs = vec![0.0; spec.n_modes() - 1];
    for c in coeffs.iter_mut().take(band) {
        *c = rng.gen_range(-1.0..1.0);
    }
    SpectralField::from_coeffs(coeffs)
}

fn multistart_seeds(spec: &DomainSpec, cfg: &OptimizerConfig) -> Vec<SpectralField> {
    let mut seeds: Vec<SpectralField> = (1..=4).map(|k| single_mode_seed(k, spec)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.multistart_random {
        seeds.push(random_bandlimited_seed(&mut rng, spec));
    }
    seeds
}

/// Estimates the potential-well depth d = inf_N J by multistart descent
/// of the reduced functional.
pub fn estimate_well_depth(spec: &DomainSpec, cfg: &OptimizerConfig) -> Result<WellDepthEstimate> {
    let symbol = LinearSymbol::new(spec);
    let seeds = multistart_seeds(spec, cfg);
    let multistart_count = seeds.len();
    let results = exec::map_collect(seeds, |seed| descend_reduced(seed, spec, &symbol, cfg));
    let mut best: Option<DescentOutcome> = None;
    for r in results {
        let r = r?;
        if best.as_ref().is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
    }
    let best = best.expect("at least four single-mode seeds");
    let minimizer = project_to_nehari(&best.shape, spec)?;
    let d_hat = energy_j(&minimizer, spec)?;
    Ok(WellDepthEstimate {
        d_hat,
        minimizer,
        n_modes_used: spec.n_modes(),
        multistart_count,
        converged: best.converged,
    })
}

/// Constraint radius of the α-slice: ‖u_xx‖₂ ≤ √(2α(p+1)/(p−1)).
pub fn nehari_slice_radius(alpha: f64, spec: &DomainSpec) -> f64 {
    (2.0 * alpha * (spec.p() + 1.0) / (spec.p() - 1.0)).sqrt()
}

/// Gradient of Φ(v) = ½‖λ*(v)·v‖₂² in the H metric, with Φ's value.
fn slice_objective_gradient(
    v: &SpectralField,
    spec: &DomainSpec,
    symbol: &LinearSymbol,
) -> Result<(Vec<f64>, f64, f64)> {
    let p = spec.p();
    let rho = 2.0 / (p - 1.0);
    let s = h2sq(v, spec);
    let q = lp1(v, spec)?;
    if s == 0.0 || q == 0.0 {
        return Err(Error::ZeroField);
    }
    let l2 = l2sq(v, spec);
    let ratio = s / q;
    let phi = 0.5 * ratio.powf(rho) * l2;
    let dq = lp1_gradient(v, spec)?;
    let a = spec.a();
    let pref = 0.5 * rho * ratio.powf(rho - 1.0) * l2 / (q * q);
    let mut grad_h = Vec::with_capacity(v.len());
    let mut norm_sq = 0.0;
    for (k, (&c, &lam)) in v.coeffs().iter().zip(symbol.eigenvalues()).enumerate() {
        let ds = a * lam * c;
        let euclid = pref * (ds * q - s * dq[k]) + 0.5 * ratio.powf(rho) * a * c;
        let gh = euclid / (a * lam);
        norm_sq += 0.5 * a * lam * gh * gh;
        grad_h.push(gh);
    }
    Ok((grad_h, norm_sq.sqrt(), phi))
}

/// Estimates Λ_α by projected ascent of ½‖u‖₂² over the α-slice of N,
/// starting from the well minimizer and perturbations of it.
///
/// Requires α above the well depth (the slice is empty otherwise); the
/// returned value is a lower bound on the true supremum.
pub fn estimate_lambda_alpha(
    alpha: f64,
    spec: &DomainSpec,
    cfg: &OptimizerConfig,
) -> Result<LambdaAlphaEstimate> {
    let well = estimate_well_depth(spec, cfg)?;
    estimate_lambda_alpha_given(alpha, spec, cfg, &well)
}

/// Same as [`estimate_lambda_alpha`] but reuses a precomputed well depth.
pub fn estimate_lambda_alpha_given(
    alpha: f64,
    spec: &DomainSpec,
    cfg: &OptimizerConfig,
    well: &WellDepthEstimate,
) -> Result<LambdaAlphaEstimate> {
    if alpha.is_nan() || alpha <= well.d_hat {
        return Err(Error::AlphaBelowDepth { alpha, d_hat: well.d_hat });
    }
    let symbol = LinearSymbol::new(spec);
    let radius = nehari_slice_radius(alpha, spec);
    let r2 = radius * radius;
    let feasible = |v: &SpectralField| -> Result<Option<(SpectralField, f64)>> {
        let u = project_to_nehari(v, spec)?;
        let h2 = h2sq(&u, spec);
        if h2 <= r2 * (1.0 + 1e-12) {
            let half_l2 = 0.5 * l2sq(&u, spec);
            Ok(Some((u, half_l2)))
        } else {
            Ok(None)
        }
    };

    // seeds: the well minimizer (always feasible for α > d) plus
    // seeded perturbations of it
    let mut seeds = vec![well.minimizer.clone()];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xa5a5_a5a5);
    for _ in 0..cfg.multistart_random.max(2) {
        let noise = random_bandlimited_seed(&mut rng, spec);
        seeds.push(well.minimizer.axpy(0.05, &noise));
    }

    let mut best: Option<(SpectralField, f64, bool)> = None;
    for seed in seeds {
        let mut v = match normalize_h(&seed, spec) {
            Some(v) => v,
            None => continue,
        };
        let Some((mut u_best, mut phi_best)) = feasible(&v)? else { continue };
        let mut converged = false;
        let mut step = 0.5f64;
        for _ in 0..cfg.max_iters {
            let (grad, gnorm, _) = slice_objective_gradient(&v, spec, &symbol)?;
            if gnorm <= cfg.grad_tol {
                converged = true;
                break;
            }
            let dir = SpectralField::from_coeffs(grad);
            let mut s = step;
            let mut accepted = false;
            while s > 1e-16 {
                let cand = v.axpy(s, &dir);
                if let Some(cand) = normalize_h(&cand, spec) {
                    if let Some((u_cand, phi_cand)) = feasible(&cand)? {
                        if phi_cand > phi_best {
                            v = cand;
                            u_best = u_cand;
                            phi_best = phi_cand;
                            accepted = true;
                            break;
                        }
                    }
                }
                s *= 0.5;
            }
            if !accepted {
                // pinned against the slice boundary or stationary
                converged = true;
                break;
            }
            step = (s * 2.0).min(2.0);
        }
        if best.as_ref().is_none_or(|(_, phi, _)| phi_best > *phi) {
            best = Some((u_best, phi_best, converged));
        }
    }
    let (maximizer, lambda_alpha_hat, converged) =
        best.ok_or_else(|| Error::InvalidDescriptor("no feasible seed for the α-slice".into()))?;
    Ok(LambdaAlphaEstimate { lambda_alpha_hat, maximizer, radius, converged })
}

/// Which published blow-up condition an initial datum satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// I(u0) < 0 and J(u0) ≤ d.
    LowEnergyBlowUp,
    /// I(u0) < 0, J(u0) > d, and ‖u0‖₂² > 2Λ̂_{J(u0)}.
    HighEnergyBlowUp,
    /// I(u0) < 0 with neither energy condition verified; the iff
    /// criterion still predicts blow-up.
    TheoremOnly,
    /// I(u0) ≥ 0: no static prediction, the dynamics decide.
    NoPrediction,
}

/// Static expectation for the run outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredictedOutcome {
    BlowUp,
    NoPrediction,
}

/// Classification of an initial datum against the blow-up criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub j0: f64,
    pub i0: f64,
    pub l2sq0: f64,
    pub d_hat: f64,
    /// Lower bound used for the high-energy condition, when available.
    pub lambda_alpha_hat: Option<f64>,
    pub branch: Branch,
    pub predicted: PredictedOutcome,
}

/// Assigns the criterion branch from (J0, I0, d̂, Λ̂) alone.
///
/// I(u0) < 0 always predicts blow-up; the branch records which published
/// energy condition additionally holds. For I(u0) ≥ 0 the classifier
/// stays silent: the necessity direction concerns I(u(t)) for all t, so
/// a static test must not over-claim globality.
pub fn classify_initial_datum(
    u0: &SpectralField,
    spec: &DomainSpec,
    d_hat: f64,
    lambda_alpha_hat: Option<f64>,
) -> Result<ClassificationReport> {
    let j0 = energy_j(u0, spec)?;
    let i0 = nehari_i(u0, spec)?;
    let l2sq0 = l2sq(u0, spec);
    let (branch, predicted) = if i0 < 0.0 {
        let branch = if j0 <= d_hat {
            Branch::LowEnergyBlowUp
        } else if lambda_alpha_hat.is_some_and(|la| l2sq0 > 2.0 * la) {
            Branch::HighEnergyBlowUp
        } else {
            Branch::TheoremOnly
        };
        (branch, PredictedOutcome::BlowUp)
    } else {
        (Branch::NoPrediction, PredictedOutcome::NoPrediction)
    };
    Ok(ClassificationReport { j0, i0, l2sq0, d_hat, lambda_alpha_hat, branch, predicted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spec() -> DomainSpec {
        DomainSpec::new(PI, 3.0, 32).unwrap()
    }

    fn cos_x(amp: f64, sp: &DomainSpec) -> SpectralField {
        let mut coeffs = vec![0.0; sp.n_modes() - 1];
        coeffs[0] = amp;
        SpectralField::from_coeffs(coeffs)
    }

    #[test]
    fn projection_lands_on_the_manifold() {
        let sp = spec();
        let u = cos_x(1.0, &sp);
        let v = project_to_nehari(&u, &sp).unwrap();
        assert_relative_eq!(v.coeffs()[0], (4.0f64 / 3.0).sqrt(), max_relative = 1e-10);
        assert_relative_eq!(energy_j(&v, &sp).unwrap(), PI / 6.0, max_relative = 1e-10);
        let i_rel = nehari_i(&v, &sp).unwrap().abs() / h2sq(&v, &sp);
        assert!(i_rel <= 1e-10);
        // idempotence
        let w = project_to_nehari(&v, &sp).unwrap();
        for (a, b) in v.coeffs().iter().zip(w.coeffs()) {
            assert_relative_eq!(a, b, max_relative = 1e-10, epsilon = 1e-14);
        }
        assert_eq!(project_to_nehari(&SpectralField::zeros(&sp), &sp), Err(Error::ZeroField));
    }

    #[test]
    fn reduced_functional_is_scale_invariant() {
        let sp = spec();
        let symbol = LinearSymbol::new(&sp);
        let mut coeffs = vec![0.0; sp.n_modes() - 1];
        coeffs[0] = 0.9;
        coeffs[2] = -0.3;
        let u = SpectralField::from_coeffs(coeffs);
        let (_, _, g1) = reduced_gradient(&u, &sp, &symbol).unwrap();
        let (_, _, g2) = reduced_gradient(&u.scaled(17.0), &sp, &symbol).unwrap();
        assert_relative_eq!(g1, g2, max_relative = 1e-10);
        // and G(u) = J(project(u))
        let j = energy_j(&project_to_nehari(&u, &sp).unwrap(), &sp).unwrap();
        assert_relative_eq!(g1, j, max_relative = 1e-12);
    }

    #[test]
    fn well_depth_at_most_the_single_mode_value() {
        let sp = spec();
        let est = estimate_well_depth(&sp, &OptimizerConfig::default()).unwrap();
        assert!(est.d_hat > 0.0);
        assert!(est.d_hat <= PI / 6.0 + 1e-6, "d_hat = {}", est.d_hat);
        let i_rel = nehari_i(&est.minimizer, &sp).unwrap().abs() / h2sq(&est.minimizer, &sp);
        assert!(i_rel <= 1e-8, "minimizer off N: {i_rel}");
        assert_relative_eq!(energy_j(&est.minimizer, &sp).unwrap(), est.d_hat, epsilon = 1e-10);
        assert_eq!(est.multistart_count, 12);
    }

    #[test]
    fn lambda_alpha_respects_the_slice_and_nests() {
        let sp = spec();
        let cfg = OptimizerConfig { max_iters: 800, ..OptimizerConfig::default() };
        let well = estimate_well_depth(&sp, &cfg).unwrap();
        let a1 = well.d_hat * 1.01;
        let a2 = well.d_hat * 1.2;
        let r = nehari_slice_radius(a1, &sp);
        assert_relative_eq!(r, (4.0 * a1).sqrt(), max_relative = 1e-12);
        let e1 = estimate_lambda_alpha_given(a1, &sp, &cfg, &well).unwrap();
        let e2 = estimate_lambda_alpha_given(a2, &sp, &cfg, &well).unwrap();
        // feasibility of the returned states
        for (e, alpha) in [(&e1, a1), (&e2, a2)] {
            let h2 = h2sq(&e.maximizer, &sp);
            let rr = nehari_slice_radius(alpha, &sp);
            assert!(h2.sqrt() <= rr + 1e-10);
            let i_rel = nehari_i(&e.maximizer, &sp).unwrap().abs() / h2;
            assert!(i_rel <= 1e-8);
            assert!(e.lambda_alpha_hat > 0.0);
        }
        // monotonicity: nested feasible sets
        assert!(e2.lambda_alpha_hat >= e1.lambda_alpha_hat - 1e-10);
        // alpha below depth is rejected
        assert!(matches!(
            estimate_lambda_alpha_given(well.d_hat * 0.5, &sp, &cfg, &well),
            Err(Error::AlphaBelowDepth { .. })
        ));
    }

    #[test]
    fn classifier_branches_follow_the_criteria() {
        let sp = spec();
        let d_hat = PI / 6.0;
        // A = 2: I0 = −4π < 0, J0 = −π/2 ≤ d → low-energy branch
        let rep = classify_initial_datum(&cos_x(2.0, &sp), &sp, d_hat, None).unwrap();
        assert_eq!(rep.branch, Branch::LowEnergyBlowUp);
        assert_eq!(rep.predicted, PredictedOutcome::BlowUp);
        assert_relative_eq!(rep.i0, -4.0 * PI, max_relative = 1e-10);
        assert_relative_eq!(rep.j0, -PI / 2.0, max_relative = 1e-10);
        // A = 0.5: I0 > 0 → no static prediction
        let rep = classify_initial_datum(&cos_x(0.5, &sp), &sp, d_hat, None).unwrap();
        assert_eq!(rep.branch, Branch::NoPrediction);
        assert_eq!(rep.predicted, PredictedOutcome::NoPrediction);
        // on the manifold: I0 = 0 exactly is excluded by every hypothesis
        let u = project_to_nehari(&cos_x(1.0, &sp), &sp).unwrap();
        let rep = classify_initial_datum(&u, &sp, d_hat, None).unwrap();
        assert_eq!(rep.branch, Branch::NoPrediction);
    }
}
