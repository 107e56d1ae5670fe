//! Independent cross-check machinery for the spectral solver.
//!
//! [`fd_advance`] integrates the same problem with a deliberately
//! different discretization family: second-order centred differences for
//! u_xxxx on a cell-centred grid, ghost points by even reflection (the
//! unique second-order closure satisfying u_x = 0 and u_xxx = 0 at the
//! walls simultaneously), a θ = 1/2 scheme for the linear part with the
//! nonlocal source explicit, and the discrete mean re-projected to zero
//! after every step. Shared bugs between this and the spectral path are
//! unlikely to cancel.
//!
//! [`weak_form_residual`] tests a trajectory against the time-integrated
//! weak formulation
//!
//!   ∫∫ [u_t·φ + u_xx·φ_xx − (|u|^{p−1}u − mean)·φ] dx ds = 0
//!
//! for φ = cos(kπx/a)·ψ_m(s) with hat functions ψ_m in time. The u_t
//! term is integrated by parts in time (hats vanish at both ends), so
//! the check needs only checkpointed states, never differentiated ones.
//!
//! [`compare`] aligns two trajectories on a common time grid and reports
//! state and functional discrepancies plus outcome agreement.

use serde::Serialize;

use crate::domain::{
    BlowUpTrigger, DomainSpec, GridField, OutcomeKind, RunOutcome, SpectralField,
};
use crate::error::{Error, Result};
use crate::functionals::DiagnosticsSample;
use crate::integrator::{estimate_blowup_time, Checkpoint, StepperConfig, Trajectory};
use crate::spectral::{nonlinear_source, signed_power, LinearSymbol};

/// Evaluate a spectral state at arbitrary points: Σ c_k cos(kπx/a).
pub fn evaluate_at(u: &SpectralField, spec: &DomainSpec, xs: &[f64]) -> Vec<f64> {
    let base = std::f64::consts::PI / spec.a();
    xs.iter()
        .map(|&x| {
            u.coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| c * ((i + 1) as f64 * base * x).cos())
                .sum()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Pentadiagonal system for the θ-scheme
// ---------------------------------------------------------------------------

/// Banded LU of a pentadiagonal matrix, factorized without pivoting
/// (the θ-scheme matrix I + θ·dt·D4 is symmetric positive definite).
struct Pentadiagonal {
    n: usize,
    sub2: Vec<f64>,
    sub1: Vec<f64>,
    diag: Vec<f64>,
    sup1: Vec<f64>,
    sup2: Vec<f64>,
}

impl Pentadiagonal {
    fn factorize(
        mut sub2: Vec<f64>,
        mut sub1: Vec<f64>,
        mut diag: Vec<f64>,
        mut sup1: Vec<f64>,
        sup2: Vec<f64>,
        n: usize,
    ) -> Result<Self> {
        for k in 0..n {
            let p = diag[k];
            if p.abs() < 1e-300 || !p.is_finite() {
                return Err(Error::LinearSolveFailure(format!("pivot {p} at row {k}")));
            }
            if k + 1 < n {
                let l1 = sub1[k + 1] / p;
                diag[k + 1] -= l1 * sup1[k];
                if k + 2 < n {
                    sup1[k + 1] -= l1 * sup2[k];
                }
                sub1[k + 1] = l1;
            }
            if k + 2 < n {
                let l2 = sub2[k + 2] / p;
                sub1[k + 2] -= l2 * sup1[k];
                diag[k + 2] -= l2 * sup2[k];
                sub2[k + 2] = l2;
            }
        }
        Ok(Self { n, sub2, sub1, diag, sup1, sup2 })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = rhs.to_vec();
        for k in 1..n {
            y[k] -= self.sub1[k] * y[k - 1];
            if k >= 2 {
                y[k] -= self.sub2[k] * y[k - 2];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let mut v = y[k];
            if k + 1 < n {
                v -= self.sup1[k] * x[k + 1];
            }
            if k + 2 < n {
                v -= self.sup2[k] * x[k + 2];
            }
            x[k] = v / self.diag[k];
        }
        x
    }
}

/// The five bands of a pentadiagonal n×n matrix.
struct Bands {
    sub2: Vec<f64>,
    sub1: Vec<f64>,
    diag: Vec<f64>,
    sup1: Vec<f64>,
    sup2: Vec<f64>,
}

impl Bands {
    /// y = B·x by explicit band multiplication; the tests use this as a
    /// second route against the stencil application.
    #[cfg(test)]
    fn multiply(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i >= 1 {
                    acc += self.sub1[i] * x[i - 1];
                }
                if i >= 2 {
                    acc += self.sub2[i] * x[i - 2];
                }
                if i + 1 < n {
                    acc += self.sup1[i] * x[i + 1];
                }
                if i + 2 < n {
                    acc += self.sup2[i] * x[i + 2];
                }
                acc
            })
            .collect()
    }

    /// I + c·B, consumed into its banded LU factorization.
    fn shifted_lu(&self, c: f64, n: usize) -> Result<Pentadiagonal> {
        let mut diag = self.diag.clone();
        let mut sub1 = self.sub1.clone();
        let mut sub2 = self.sub2.clone();
        let mut sup1 = self.sup1.clone();
        let mut sup2 = self.sup2.clone();
        for i in 0..n {
            diag[i] = 1.0 + c * diag[i];
            sub1[i] *= c;
            sub2[i] *= c;
            sup1[i] *= c;
            sup2[i] *= c;
        }
        Pentadiagonal::factorize(sub2, sub1, diag, sup1, sup2, n)
    }
}

/// Biharmonic stencil rows with even-reflection ghosts, scaled by 1/h⁴.
fn biharmonic_bands(n: usize, h: f64) -> Bands {
    let s = 1.0 / (h * h * h * h);
    let mut sub2 = vec![s; n];
    let mut sub1 = vec![-4.0 * s; n];
    let mut diag = vec![6.0 * s; n];
    let mut sup1 = vec![-4.0 * s; n];
    let mut sup2 = vec![s; n];
    // ghost closure: u_{-1} = u_0, u_{-2} = u_1 (and mirrored on the right)
    diag[0] = 2.0 * s;
    sup1[0] = -3.0 * s;
    sub1[1] = -3.0 * s;
    diag[n - 1] = 2.0 * s;
    sub1[n - 1] = -3.0 * s;
    sup1[n - 2] = -3.0 * s;
    diag[n - 2] = 6.0 * s;
    sub2[0] = 0.0;
    sub2[1] = 0.0;
    sub1[0] = 0.0;
    sup1[n - 1] = 0.0;
    sup2[n - 1] = 0.0;
    sup2[n - 2] = 0.0;
    Bands { sub2, sub1, diag, sup1, sup2 }
}

/// Apply the biharmonic stencil to grid values.
fn apply_biharmonic(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    let s = 1.0 / (h * h * h * h);
    let at = |i: isize| -> f64 {
        // even reflection through both walls
        let idx = if i < 0 { (-i - 1) as usize } else if i as usize >= n { 2 * n - 1 - i as usize } else { i as usize };
        u[idx]
    };
    (0..n as isize)
        .map(|i| s * (at(i - 2) - 4.0 * at(i - 1) + 6.0 * at(i) - 4.0 * at(i + 1) + at(i + 2)))
        .collect()
}

/// Second derivative by centred differences with even-reflection ghosts.
fn apply_second_derivative(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    let s = 1.0 / (h * h);
    let at = |i: isize| -> f64 {
        let idx = if i < 0 { (-i - 1) as usize } else if i as usize >= n { 2 * n - 1 - i as usize } else { i as usize };
        u[idx]
    };
    (0..n as isize).map(|i| s * (at(i - 1) - 2.0 * at(i) + at(i + 1))).collect()
}

/// Mean-subtracted explicit source on the grid; `Err(Overflow)` when the
/// pointwise power leaves the f64 range.
fn grid_source(u: &[f64], p: f64) -> Result<Vec<f64>> {
    let mut g = Vec::with_capacity(u.len());
    let mut sum = 0.0;
    for &v in u {
        let w = signed_power(v, p);
        if !w.is_finite() {
            return Err(Error::Overflow);
        }
        g.push(w);
        sum += w;
    }
    let mean = sum / u.len() as f64;
    for w in g.iter_mut() {
        *w -= mean;
    }
    Ok(g)
}

fn grid_point_values(u: &[f64], spec: &DomainSpec, h: f64) -> Result<crate::functionals::PointValues> {
    let p = spec.p();
    let w = spec.a() / u.len() as f64;
    let (mut sum, mut l2, mut pow, mut amax) = (0.0, 0.0, 0.0, 0.0f64);
    for &v in u {
        sum += v;
        l2 += v * v;
        pow += v.abs().powf(p + 1.0);
        amax = amax.max(v.abs());
    }
    let lp1 = pow * w;
    if !lp1.is_finite() {
        return Err(Error::Overflow);
    }
    let d2 = apply_second_derivative(u, h);
    let h2: f64 = d2.iter().map(|v| v * v).sum::<f64>() * w;
    let source = grid_source(u, p)?;
    let d4 = apply_biharmonic(u, h);
    let ut_l2sq: f64 = d4
        .iter()
        .zip(&source)
        .map(|(a, b)| {
            let ut = -a + b;
            ut * ut
        })
        .sum::<f64>()
        * w;
    let l2sq = l2 * w;
    Ok(crate::functionals::PointValues {
        mass: sum * w,
        l2sq,
        lp1,
        linf: amax,
        h2sq: h2,
        j: 0.5 * h2 - lp1 / (p + 1.0),
        i: h2 - lp1,
        ut_l2sq,
    })
}

struct FdRunState {
    t: f64,
    m_acc: f64,
    e_acc: f64,
    j0: f64,
    accepted: usize,
    samples: Vec<DiagnosticsSample>,
    checkpoints: Vec<(f64, Checkpoint)>,
    s_minus_entry: Option<f64>,
}

impl FdRunState {
    fn record(&mut self, pv: &crate::functionals::PointValues, dt: f64, u: &[f64], cfg: &StepperConfig) {
        let advanced = self.samples.last().is_none_or(|s| self.t > s.t);
        if self.accepted.is_multiple_of(cfg.sample_stride) && advanced {
            let sample = DiagnosticsSample {
                t: self.t,
                dt,
                mass: pv.mass,
                l2sq: pv.l2sq,
                lp1: pv.lp1,
                linf: pv.linf,
                h2sq: pv.h2sq,
                j: pv.j,
                i: pv.i,
                ut_l2sq: pv.ut_l2sq,
                m: self.m_acc,
                mp: 0.5 * pv.l2sq,
                mpp: -pv.i,
                energy_residual: (self.e_acc + pv.j - self.j0).abs(),
            };
            if self.s_minus_entry.is_none() && sample.i < 0.0 {
                self.s_minus_entry = Some(sample.t);
            }
            self.samples.push(sample);
        }
        if cfg.checkpoint_stride > 0
            && self.accepted.is_multiple_of(cfg.checkpoint_stride)
            && advanced
        {
            self.checkpoints.push((self.t, Checkpoint::Grid(GridField::new(u.to_vec()))));
        }
    }
}

/// Method-of-lines finite-difference integration, the independent oracle
/// for [`crate::integrator::advance`].
///
/// The grid size is `spec.n_modes()` cells (≥ 64). `cfg.dt_init` is the
/// base step; near large amplitudes the step is additionally limited by
/// the explicit-source scale 0.1/(p·‖u‖_∞^{p−1}), and it halves on solver
/// failure. Blow-up is declared by the same three signals as the
/// spectral driver.
pub fn fd_advance(u0: &GridField, spec: &DomainSpec, cfg: &StepperConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let n = spec.n_modes();
    if n < 64 {
        return Err(Error::ConfigInvalid(format!("finite-difference grid needs >= 64 cells, got {n}")));
    }
    if u0.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: u0.len() });
    }
    if !u0.all_finite() {
        return Err(Error::NonFinite);
    }
    let h = spec.a() / n as f64;
    let p = spec.p();
    let theta = 0.5;

    let mut u: Vec<f64> = u0.values().to_vec();
    let mean0 = u.iter().sum::<f64>() / n as f64;
    for v in u.iter_mut() {
        *v -= mean0;
    }

    let mut pv = grid_point_values(&u, spec, h)?;
    let mut run = FdRunState {
        t: 0.0,
        m_acc: 0.0,
        e_acc: 0.0,
        j0: pv.j,
        accepted: 0,
        samples: Vec::new(),
        checkpoints: Vec::new(),
        s_minus_entry: None,
    };
    run.record(&pv, 0.0, &u, cfg);

    // factorized θ-scheme matrices are cached per dt
    let mut cached_dt = f64::NAN;
    let mut lu: Option<Pentadiagonal> = None;
    let horizon_eps = 1e-12 * cfg.t_horizon;
    let mut outcome: Option<RunOutcome> = None;

    while outcome.is_none() {
        if cfg.t_horizon - run.t <= horizon_eps {
            outcome = Some(RunOutcome {
                kind: OutcomeKind::GlobalHorizonReached,
                t_end: run.t,
                blowup_time_estimate: None,
                trigger: None,
                evidence: format!(
                    "reached t_horizon = {} in {} steps (fd)",
                    cfg.t_horizon, run.accepted
                ),
            });
            break;
        }
        if run.accepted >= cfg.max_steps {
            outcome = Some(RunOutcome {
                kind: OutcomeKind::Inconclusive,
                t_end: run.t,
                blowup_time_estimate: None,
                trigger: None,
                evidence: format!("step budget {} exhausted at t = {} (fd)", cfg.max_steps, run.t),
            });
            break;
        }

        // explicit source limits the stable step once amplitudes grow
        let source_scale = p * pv.linf.powf(p - 1.0);
        let mut dt = cfg.dt_init.min(cfg.t_horizon - run.t);
        if source_scale > 0.0 {
            dt = dt.min(0.1 / source_scale);
        }
        if dt < cfg.dt_min {
            outcome = Some(RunOutcome {
                kind: OutcomeKind::BlowUp,
                t_end: run.t,
                blowup_time_estimate: None,
                trigger: Some(BlowUpTrigger::StepSizeCollapse { dt, dt_min: cfg.dt_min }),
                evidence: format!(
                    "source scale forced dt = {dt:.3e} below dt_min = {:.3e} at t = {} \
                     with ‖u‖_∞ = {:.6e} (fd)",
                    cfg.dt_min, run.t, pv.linf
                ),
            });
            break;
        }

        // one θ-step with halving on failure
        let mut step_ok = false;
        let mut halvings = 0;
        while !step_ok {
            if dt != cached_dt {
                lu = Some(biharmonic_bands(n, h).shifted_lu(theta * dt, n)?);
                cached_dt = dt;
            }
            let source = match grid_source(&u, p) {
                Ok(g) => g,
                Err(Error::Overflow) => {
                    outcome = Some(RunOutcome {
                        kind: OutcomeKind::BlowUp,
                        t_end: run.t,
                        blowup_time_estimate: None,
                        trigger: Some(BlowUpTrigger::Overflow),
                        evidence: format!("pointwise source overflow at t = {} (fd)", run.t),
                    });
                    break;
                }
                Err(e) => return Err(e),
            };
            let d4u = apply_biharmonic(&u, h);
            let rhs: Vec<f64> = (0..n)
                .map(|i| u[i] - (1.0 - theta) * dt * d4u[i] + dt * source[i])
                .collect();
            let mut next = lu.as_ref().unwrap().solve(&rhs);
            // re-project the discrete mean to zero
            let mean = next.iter().sum::<f64>() / n as f64;
            for v in next.iter_mut() {
                *v -= mean;
            }
            if next.iter().all(|v| v.is_finite()) {
                u = next;
                step_ok = true;
            } else {
                halvings += 1;
                dt *= 0.5;
                if dt < cfg.dt_min || halvings > 60 {
                    outcome = Some(RunOutcome {
                        kind: OutcomeKind::BlowUp,
                        t_end: run.t,
                        blowup_time_estimate: None,
                        trigger: Some(BlowUpTrigger::StepSizeCollapse { dt, dt_min: cfg.dt_min }),
                        evidence: format!(
                            "step halving hit dt = {dt:.3e} at t = {} without a finite \
                             solve (fd)",
                            run.t
                        ),
                    });
                    break;
                }
            }
        }
        if outcome.is_some() {
            break;
        }

        let pv_new = match grid_point_values(&u, spec, h) {
            Ok(pv) => pv,
            Err(Error::Overflow) => {
                outcome = Some(RunOutcome {
                    kind: OutcomeKind::BlowUp,
                    t_end: run.t + dt,
                    blowup_time_estimate: None,
                    trigger: Some(BlowUpTrigger::Overflow),
                    evidence: format!("diagnostics overflow after step at t = {} (fd)", run.t + dt),
                });
                break;
            }
            Err(e) => return Err(e),
        };
        run.t += dt;
        run.accepted += 1;
        run.m_acc += 0.25 * dt * (pv.l2sq + pv_new.l2sq);
        run.e_acc += 0.5 * dt * (pv.ut_l2sq + pv_new.ut_l2sq);
        pv = pv_new;
        run.record(&pv, dt, &u, cfg);

        if pv.linf > cfg.u_max {
            outcome = Some(RunOutcome {
                kind: OutcomeKind::BlowUp,
                t_end: run.t,
                blowup_time_estimate: None,
                trigger: Some(BlowUpTrigger::AmplitudeThreshold { linf: pv.linf, u_max: cfg.u_max }),
                evidence: format!(
                    "‖u‖_∞ = {:.6e} crossed u_max = {:.3e} at t = {} (fd)",
                    pv.linf, cfg.u_max, run.t
                ),
            });
            break;
        }
    }

    let mut outcome = outcome.expect("loop always sets an outcome");
    let mut traj =
        Trajectory::from_parts(*spec, run.samples, run.checkpoints, outcome.clone(), run.s_minus_entry);
    if outcome.kind == OutcomeKind::BlowUp {
        let estimate = match estimate_blowup_time(&traj) {
            Ok(fit) => fit.t_estimate.max(outcome.t_end),
            Err(_) => outcome.t_end,
        };
        outcome.blowup_time_estimate = Some(estimate);
        traj.outcome = outcome;
    }
    Ok(traj)
}

// ---------------------------------------------------------------------------
// Weak-form residual
// ---------------------------------------------------------------------------

/// Residual magnitudes of the time-integrated weak form, one per
/// (spatial mode k, temporal hat m) test-function pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakFormResiduals {
    /// |R_{k,m}| flattened k-major: index (k−1)·n_test + (m−1).
    pub residuals: Vec<f64>,
    pub n_space: usize,
    pub n_time: usize,
    /// Spatial modes beyond the dealias-safe band; their residuals are
    /// reported but unreliable.
    pub unreliable_modes: Vec<usize>,
}

impl WeakFormResiduals {
    pub fn max_abs(&self) -> f64 {
        self.residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()))
    }
}

fn checkpoint_coeffs(cp: &Checkpoint, spec: &DomainSpec) -> Result<SpectralField> {
    match cp {
        Checkpoint::Spectral(u) => Ok(u.clone()),
        Checkpoint::Grid(g) => crate::domain::to_spectral(g, spec),
    }
}

/// Evaluates the weak form against n_test spatial cosine modes crossed
/// with n_test interior hat functions on a uniform partition of the
/// checkpointed range; returns the residual magnitudes.
///
/// Quadrature in time is trapezoidal on the checkpoint times, with the
/// partition refined at every hat kink so the piecewise-constant ψ′
/// never straddles a quadrature cell.
pub fn weak_form_residual(
    traj: &Trajectory,
    spec: &DomainSpec,
    n_test: usize,
) -> Result<WeakFormResiduals> {
    if traj.checkpoints.len() < 3 {
        return Err(Error::NoCheckpoints);
    }
    let n_test = n_test.max(1);
    let symbol = LinearSymbol::new(spec);
    let times: Vec<f64> = traj.checkpoints.iter().map(|(t, _)| *t).collect();
    let t0 = times[0];
    let t1 = *times.last().unwrap();

    // per-checkpoint spectral data: c_k(s) and source coefficients f_k(s)
    let mut c_series: Vec<Vec<f64>> = Vec::with_capacity(times.len());
    let mut f_series: Vec<Vec<f64>> = Vec::with_capacity(times.len());
    for (_, cp) in &traj.checkpoints {
        let u = checkpoint_coeffs(cp, spec)?;
        let f = nonlinear_source(&u, spec)?;
        c_series.push(u.coeffs().to_vec());
        f_series.push(f.coeffs().to_vec());
    }

    // hat nodes on a fixed uniform partition, independent of the
    // checkpoint cadence so refinement studies are comparable
    let width = (t1 - t0) / (n_test as f64 + 1.0);
    let hat_node = |m: usize| t0 + width * m as f64;

    // merged quadrature breakpoints: checkpoint times plus hat nodes
    let mut breaks = times.clone();
    for m in 0..=(n_test + 1) {
        breaks.push(hat_node(m));
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (t1 - t0).max(1.0));

    // linear interpolation of a per-checkpoint series at time s
    let interp = |series: &[Vec<f64>], k: usize, s: f64| -> f64 {
        match times.binary_search_by(|t| t.partial_cmp(&s).unwrap()) {
            Ok(i) => series[i][k],
            Err(i) => {
                let i = i.clamp(1, times.len() - 1);
                let (ta, tb) = (times[i - 1], times[i]);
                let w = (s - ta) / (tb - ta);
                series[i - 1][k] * (1.0 - w) + series[i][k] * w
            }
        }
    };

    let a_half = 0.5 * spec.a();
    let mut residuals = Vec::with_capacity(n_test * n_test);
    for k in 1..=n_test {
        let kc = k - 1; // coefficient slot, valid only while k < n_modes
        let lam = if kc < symbol.eigenvalues().len() { symbol.eigenvalues()[kc] } else { 0.0 };
        for m in 1..=n_test {
            let (tl, tc, tr) = (hat_node(m - 1), hat_node(m), hat_node(m + 1));
            let psi = |s: f64| -> f64 {
                if s <= tl || s >= tr {
                    0.0
                } else if s <= tc {
                    (s - tl) / width
                } else {
                    (tr - s) / width
                }
            };
            // ψ′ is constant inside each refined piece; evaluate it at the
            // piece midpoint so kink-adjacent pieces never see the wrong
            // one-sided value at a shared endpoint
            let dpsi_mid = |s: f64| -> f64 {
                if s <= tl || s >= tr {
                    0.0
                } else if s < tc {
                    1.0 / width
                } else {
                    -1.0 / width
                }
            };
            // R = −∫ψ′·⟨u,X_k⟩ ds + ∫ψ·(⟨u_xx,X_k″⟩ − ⟨f(u),X_k⟩) ds
            let integrand = |s: f64, d: f64| -> f64 {
                if kc >= symbol.eigenvalues().len() {
                    return 0.0;
                }
                let c = interp(&c_series, kc, s);
                let f = interp(&f_series, kc, s);
                -d * a_half * c + psi(s) * a_half * (lam * c - f)
            };
            let mut acc = 0.0;
            for w in breaks.windows(2) {
                let (sa, sb) = (w[0], w[1]);
                if sb <= tl || sa >= tr {
                    continue;
                }
                let d = dpsi_mid(0.5 * (sa + sb));
                acc += 0.5 * (sb - sa) * (integrand(sa, d) + integrand(sb, d));
            }
            residuals.push(acc.abs());
        }
    }

    let band = (spec.n_modes() - 1) / 3;
    let unreliable_modes = (1..=n_test).filter(|&k| k > band).collect();
    Ok(WeakFormResiduals { residuals, n_space: n_test, n_time: n_test, unreliable_modes })
}

// ---------------------------------------------------------------------------
// Trajectory comparison
// ---------------------------------------------------------------------------

/// Discrepancies between two trajectories of the same problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub t_overlap: (f64, f64),
    /// Max over matched checkpoint times of ‖u_a−u_b‖₂/‖u_a‖₂.
    pub max_rel_state_diff: Option<f64>,
    /// Same at the last matched checkpoint time.
    pub final_rel_state_diff: Option<f64>,
    pub max_rel_j_diff: f64,
    pub max_rel_i_diff: f64,
    pub max_rel_l2sq_diff: f64,
    pub kinds_agree: bool,
    pub kind_a: OutcomeKind,
    pub kind_b: OutcomeKind,
    /// |T_a − T_b| / T_a when both runs carry blow-up estimates.
    pub blowup_estimate_rel_diff: Option<f64>,
}

fn series_interp(samples: &[DiagnosticsSample], pick: fn(&DiagnosticsSample) -> f64, t: f64) -> f64 {
    let pos = samples.partition_point(|s| s.t < t);
    if pos == 0 {
        return pick(&samples[0]);
    }
    if pos >= samples.len() {
        return pick(samples.last().unwrap());
    }
    let (a, b) = (&samples[pos - 1], &samples[pos]);
    if b.t == a.t {
        return pick(b);
    }
    let w = (t - a.t) / (b.t - a.t);
    pick(a) * (1.0 - w) + pick(b) * w
}

fn grid_values_of(cp: &Checkpoint, spec: &DomainSpec, xs: &[f64]) -> Result<Vec<f64>> {
    match cp {
        Checkpoint::Spectral(u) => Ok(evaluate_at(u, spec, xs)),
        Checkpoint::Grid(g) => {
            if g.len() != xs.len() {
                return Err(Error::SizeMismatch { expected: xs.len(), got: g.len() });
            }
            Ok(g.values().to_vec())
        }
    }
}

fn interp_checkpoint_values(
    traj: &Trajectory,
    xs: &[f64],
    t: f64,
) -> Result<Option<Vec<f64>>> {
    let cps = &traj.checkpoints;
    if cps.is_empty() {
        return Ok(None);
    }
    let pos = cps.partition_point(|(s, _)| *s < t);
    let tol = 1e-9 * (1.0 + t.abs());
    if pos < cps.len() && (cps[pos].0 - t).abs() <= tol {
        return Ok(Some(grid_values_of(&cps[pos].1, &traj.spec, xs)?));
    }
    if pos == 0 || pos >= cps.len() {
        return Ok(None);
    }
    let (ta, ca) = (&cps[pos - 1].0, &cps[pos - 1].1);
    let (tb, cb) = (&cps[pos].0, &cps[pos].1);
    let va = grid_values_of(ca, &traj.spec, xs)?;
    let vb = grid_values_of(cb, &traj.spec, xs)?;
    let w = (t - ta) / (tb - ta);
    Ok(Some(va.iter().zip(&vb).map(|(a, b)| a * (1.0 - w) + b * w).collect()))
}

/// Aligns two trajectories on their time overlap and reports relative
/// state and functional differences plus outcome agreement.
///
/// Scalar series are compared at the coarser trajectory's sample times
/// with the finer one linearly interpolated; each series is normalized
/// by its own sup over the overlap. States are compared on the grid of
/// whichever trajectory holds grid checkpoints (spectral states are
/// synthesized there), at the coarser checkpoint cadence.
pub fn compare(traj_a: &Trajectory, traj_b: &Trajectory) -> Result<ComparisonReport> {
    if traj_a.samples.is_empty() || traj_b.samples.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let lo = traj_a.samples[0].t.max(traj_b.samples[0].t);
    let hi = traj_a.samples.last().unwrap().t.min(traj_b.samples.last().unwrap().t);
    if hi <= lo || hi.is_nan() || lo.is_nan() {
        return Err(Error::DisjointRanges);
    }

    // coarser sample grid hosts the comparison
    let count = |traj: &Trajectory| traj.samples.iter().filter(|s| s.t >= lo && s.t <= hi).count();
    let (coarse, fine) =
        if count(traj_a) <= count(traj_b) { (traj_a, traj_b) } else { (traj_b, traj_a) };

    let mut max_rel = [0.0f64; 3];
    let picks: [fn(&DiagnosticsSample) -> f64; 3] = [|s| s.j, |s| s.i, |s| s.l2sq];
    for (slot, pick) in picks.iter().enumerate() {
        let sup = coarse
            .samples
            .iter()
            .filter(|s| s.t >= lo && s.t <= hi)
            .fold(0.0f64, |m, s| m.max(pick(s).abs()))
            .max(1e-300);
        for s in coarse.samples.iter().filter(|s| s.t >= lo && s.t <= hi) {
            let other = series_interp(&fine.samples, *pick, s.t);
            max_rel[slot] = max_rel[slot].max((pick(s) - other).abs() / sup);
        }
    }

    // state comparison on a common grid
    let xs: Option<Vec<f64>> = match (
        traj_a.checkpoints.first().map(|(_, c)| c),
        traj_b.checkpoints.first().map(|(_, c)| c),
    ) {
        (Some(Checkpoint::Grid(_)), _) => Some(traj_a.spec.collocation_points()),
        (_, Some(Checkpoint::Grid(_))) => Some(traj_b.spec.collocation_points()),
        (Some(Checkpoint::Spectral(_)), Some(Checkpoint::Spectral(_))) => {
            Some(traj_a.spec.collocation_points())
        }
        _ => None,
    };
    let mut max_state: Option<f64> = None;
    let mut final_state: Option<f64> = None;
    if let Some(xs) = xs {
        let (ccoarse, cfine) = if traj_a.checkpoints.len() <= traj_b.checkpoints.len() {
            (traj_a, traj_b)
        } else {
            (traj_b, traj_a)
        };
        for (t, cp) in ccoarse.checkpoints.iter().filter(|(t, _)| *t >= lo && *t <= hi) {
            let va = grid_values_of(cp, &ccoarse.spec, &xs)?;
            if let Some(vb) = interp_checkpoint_values(cfine, &xs, *t)? {
                let num: f64 = va.iter().zip(&vb).map(|(a, b)| (a - b) * (a - b)).sum();
                let den: f64 = va.iter().map(|a| a * a).sum::<f64>().max(1e-300);
                let rel = (num / den).sqrt();
                max_state = Some(max_state.map_or(rel, |m: f64| m.max(rel)));
                final_state = Some(rel);
            }
        }
    }

    let est_a = traj_a.outcome.blowup_time_estimate;
    let est_b = traj_b.outcome.blowup_time_estimate;
    let blowup_estimate_rel_diff = match (est_a, est_b) {
        (Some(a), Some(b)) if a > 0.0 => Some((a - b).abs() / a),
        _ => None,
    };

    Ok(ComparisonReport {
        t_overlap: (lo, hi),
        max_rel_state_diff: max_state,
        final_rel_state_diff: final_state,
        max_rel_j_diff: max_rel[0],
        max_rel_i_diff: max_rel[1],
        max_rel_l2sq_diff: max_rel[2],
        kinds_agree: traj_a.outcome.kind == traj_b.outcome.kind,
        kind_a: traj_a.outcome.kind,
        kind_b: traj_b.outcome.kind,
        blowup_estimate_rel_diff,
    })
}
