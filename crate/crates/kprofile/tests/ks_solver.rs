//! Solver validation: exact linear decay, residual convergence order, and
//! bit-exact determinism.

use kprofile::{ks_residual, ks_simulate, KsConfig, KsSolver};
use std::f64::consts::PI;

/// With the quadratic term disabled every Fourier mode evolves by its
/// exact exponential factor, so one step must reproduce it to 1e-8.
#[test]
fn linear_modes_decay_exactly() {
    let alpha = 19.0;
    let n = 32;
    let config = KsConfig {
        linear_only: true,
        ..KsConfig::new(alpha)
    };
    for k in 1..=10usize {
        let mut solver = KsSolver::new(&config).unwrap();
        let u: Vec<f64> = (0..n)
            .map(|j| (k as f64 * 2.0 * PI * j as f64 / n as f64).cos())
            .collect();
        solver.set_state(&u).unwrap();
        solver.step().unwrap();
        let kf = k as f64;
        let factor = ((alpha * kf * kf - 4.0 * kf.powi(4)) * config.dt).exp();
        let state = solver.state();
        for (got, init) in state.iter().zip(&u) {
            assert!(
                (got - factor * init).abs() < 1e-8,
                "mode {k}: predicted {} got {got}",
                factor * init
            );
        }
    }
}

/// Central-difference residual of the full equation halves by ~4x when dt
/// halves; windows are taken at the same physical time on each run.
#[test]
fn residual_shrinks_quadratically_in_dt() {
    let residual_at = |dt: f64, steps_to_window: usize| -> f64 {
        let config = KsConfig {
            dt,
            ..KsConfig::new(19.0)
        };
        let mut solver = KsSolver::new(&config).unwrap();
        solver.step_n(steps_to_window).unwrap();
        let mut window = Vec::new();
        for _ in 0..5 {
            window.push(solver.state());
            solver.step().unwrap();
        }
        ks_residual(&window, &config).unwrap()
    };
    let coarse = residual_at(1e-3, 2000);
    let fine = residual_at(5e-4, 4000);
    assert!(
        coarse > 0.0 && fine < 0.35 * coarse,
        "expected ~4x reduction, got coarse {coarse} fine {fine}"
    );
}

/// The long-run residual stays small on the settled orbit.
#[test]
fn settled_orbit_residual_is_small() {
    let config = KsConfig {
        transient_steps: 50_000,
        ..KsConfig::new(19.0)
    };
    let mut solver = KsSolver::new(&config).unwrap();
    solver.step_n(config.transient_steps).unwrap();
    let mut window = Vec::new();
    for _ in 0..5 {
        window.push(solver.state());
        solver.step().unwrap();
    }
    let r = ks_residual(&window, &config).unwrap();
    assert!(r < 1e-2, "settled residual {r}");
}

/// Identical configurations must give bit-identical trajectories.
#[test]
fn simulation_is_deterministic() {
    let config = KsConfig {
        transient_steps: 3000,
        sample_stride: 7,
        n_samples: 40,
        ..KsConfig::new(54.0)
    };
    let a = ks_simulate(&config).unwrap();
    let b = ks_simulate(&config).unwrap();
    assert_eq!(a.as_slice().len(), b.as_slice().len());
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}
