//! Cross-validation of the spectral solver against the independent
//! finite-difference path, and the weak-form residual refinement study.

use std::f64::consts::PI;

use filmlab_core::domain::{DomainSpec, GridField, OutcomeKind, SpectralField};
use filmlab_core::integrator::{advance, StepperConfig};
use filmlab_core::oracle::{compare, fd_advance, weak_form_residual};

fn cos_x(amp: f64, sp: &DomainSpec) -> SpectralField {
    let mut coeffs = vec![0.0; sp.n_modes() - 1];
    coeffs[0] = amp;
    SpectralField::from_coeffs(coeffs)
}

fn cos_grid(amp: f64, sp: &DomainSpec) -> GridField {
    GridField::new(sp.collocation_points().iter().map(|x| amp * x.cos()).collect())
}

#[test]
fn decaying_run_agrees_across_solver_families() {
    let sp = DomainSpec::new(PI, 3.0, 64).unwrap();
    let spectral_cfg = StepperConfig {
        dt_init: 1e-5,
        dt_max: 2e-3,
        t_horizon: 1.0,
        checkpoint_stride: 10,
        ..StepperConfig::default()
    };
    let spectral = advance(&cos_x(0.5, &sp), &sp, &spectral_cfg).unwrap();

    let fd_spec = DomainSpec::new(PI, 3.0, 2048).unwrap();
    let fd_cfg = StepperConfig {
        dt_init: 2e-4,
        dt_max: 2e-4,
        t_horizon: 1.0,
        sample_stride: 5,
        checkpoint_stride: 50,
        ..StepperConfig::default()
    };
    let fd = fd_advance(&cos_grid(0.5, &fd_spec), &fd_spec, &fd_cfg).unwrap();

    assert_eq!(spectral.outcome.kind, OutcomeKind::GlobalHorizonReached);
    assert_eq!(fd.outcome.kind, OutcomeKind::GlobalHorizonReached);

    let rep = compare(&spectral, &fd).unwrap();
    assert!(rep.kinds_agree);
    let state = rep.max_rel_state_diff.expect("checkpoints matched");
    assert!(state <= 1e-3, "relative L² state difference {state}");
    assert!(rep.max_rel_j_diff <= 1e-3, "J series difference {}", rep.max_rel_j_diff);

    // the finite-difference energy is non-increasing within the
    // per-step tolerance on this resolved run
    let j0 = fd.samples[0].j;
    for w in fd.samples.windows(2) {
        assert!(
            w[1].j <= w[0].j + 1e-8 * (1.0 + j0.abs()),
            "fd energy grew at t = {}",
            w[1].t
        );
    }
}

#[test]
fn cross_solver_difference_shrinks_under_simultaneous_refinement() {
    let sp = DomainSpec::new(PI, 3.0, 64).unwrap();
    let spectral_cfg = StepperConfig {
        dt_init: 1e-3,
        dt_max: 1e-3,
        t_horizon: 0.5,
        checkpoint_stride: 10,
        ..StepperConfig::default()
    };
    let spectral = advance(&cos_x(0.5, &sp), &sp, &spectral_cfg).unwrap();

    let fd_diff = |n_fd: usize, dt: f64| {
        let fd_spec = DomainSpec::new(PI, 3.0, n_fd).unwrap();
        let cfg = StepperConfig {
            dt_init: dt,
            dt_max: dt,
            t_horizon: 0.5,
            sample_stride: 4,
            checkpoint_stride: 40,
            ..StepperConfig::default()
        };
        let fd = fd_advance(&cos_grid(0.5, &fd_spec), &fd_spec, &cfg).unwrap();
        compare(&spectral, &fd).unwrap().max_rel_state_diff.unwrap()
    };
    let coarse = fd_diff(256, 1.6e-3);
    let fine = fd_diff(1024, 4e-4);
    assert!(
        fine < coarse,
        "state difference did not shrink under refinement: {coarse:.3e} → {fine:.3e}"
    );
}

#[test]
fn blowup_run_agrees_across_solver_families() {
    let sp = DomainSpec::new(PI, 3.0, 64).unwrap();
    let spectral_cfg = StepperConfig {
        dt_init: 1e-6,
        dt_min: 1e-20,
        dt_max: 0.05,
        rel_tol: 1e-6,
        t_horizon: 10.0,
        u_max: 1e8,
        ..StepperConfig::default()
    };
    let spectral = advance(&cos_x(2.0, &sp), &sp, &spectral_cfg).unwrap();

    let fd_spec = DomainSpec::new(PI, 3.0, 2048).unwrap();
    let fd_cfg = StepperConfig {
        dt_init: 1e-4,
        dt_max: 1e-4,
        dt_min: 1e-14,
        t_horizon: 10.0,
        u_max: 1e5,
        ..StepperConfig::default()
    };
    let fd = fd_advance(&cos_grid(2.0, &fd_spec), &fd_spec, &fd_cfg).unwrap();

    assert_eq!(spectral.outcome.kind, OutcomeKind::BlowUp);
    assert_eq!(fd.outcome.kind, OutcomeKind::BlowUp);
    let ta = spectral.outcome.blowup_time_estimate.unwrap();
    let tb = fd.outcome.blowup_time_estimate.unwrap();
    assert!(
        (ta - tb).abs() / ta <= 0.10,
        "blow-up time estimates disagree: spectral {ta}, fd {tb}"
    );
}

#[test]
fn weak_form_residuals_refine_at_second_order() {
    let sp = DomainSpec::new(PI, 3.0, 64).unwrap();
    let run = |dt: f64| {
        let cfg = StepperConfig {
            dt_init: dt,
            dt_max: dt,
            t_horizon: 1.0,
            checkpoint_stride: 1,
            ..StepperConfig::default()
        };
        advance(&cos_x(0.5, &sp), &sp, &cfg).unwrap()
    };
    let coarse = weak_form_residual(&run(4e-3), &sp, 8).unwrap();
    let fine = weak_form_residual(&run(2e-3), &sp, 8).unwrap();
    assert_eq!(coarse.residuals.len(), 64);
    assert!(coarse.unreliable_modes.is_empty());
    let ratio = coarse.max_abs() / fine.max_abs();
    assert!(ratio >= 3.4, "refinement ratio {ratio} below second order");
}

#[test]
fn weak_form_flags_modes_beyond_the_resolved_band() {
    // N = 8 modes: the dealias-safe band is (8−1)/3 = 2, so test modes
    // k = 3.. are reported but flagged
    let sp = DomainSpec::new(PI, 3.0, 8).unwrap();
    let cfg = StepperConfig {
        dt_init: 1e-3,
        dt_max: 1e-3,
        t_horizon: 0.1,
        checkpoint_stride: 1,
        ..StepperConfig::default()
    };
    let traj = advance(&cos_x(0.5, &sp), &sp, &cfg).unwrap();
    let res = weak_form_residual(&traj, &sp, 4).unwrap();
    assert_eq!(res.unreliable_modes, vec![3, 4]);
    assert_eq!(res.residuals.len(), 16);
}
