//! Scheme-order checks: global trajectory error and conserved-quantity
//! drift both scale as dt⁴.

use std::sync::Arc;

use magdisk::curves::circle_orbit;
use magdisk::flow::{integrate, FieldStrength, PhaseState};
use magdisk::hyperbolic::DiskPoint;
use magdisk::integrals::{integral_value, Observable};
use magdisk::quotient::FuchsianGroup;

fn test_state(e: f64) -> PhaseState {
    PhaseState::with_energy_direction(DiskPoint::new(0.2, -0.1).unwrap(), e, 0.7).unwrap()
}

/// Max position gap against a reference run at dt/10, compared at shared
/// sample times.
fn global_error(state: &PhaseState, total_time: f64, dt: f64) -> f64 {
    let coarse = integrate(state, total_time, dt, FieldStrength::UNIT).unwrap();
    let fine = integrate(state, total_time, dt / 10.0, FieldStrength::UNIT).unwrap();
    let mut worst = 0.0_f64;
    for (k, sample) in coarse.samples().iter().enumerate() {
        let reference = &fine.samples()[10 * k];
        assert!((reference.t - sample.t).abs() < 1e-12);
        let dz = (sample.state.position().as_complex()
            - reference.state.position().as_complex())
        .norm();
        worst = worst.max(dz);
    }
    worst
}

#[test]
fn trajectory_error_scales_as_dt_fourth() {
    let state = test_state(0.125);
    let total_time = 5.0;
    let dts = [1e-2, 5e-3, 2.5e-3];
    let errors: Vec<f64> = dts.iter().map(|&dt| global_error(&state, total_time, dt)).collect();
    // error/dt⁴ stays within a factor of 2 across the ladder.
    let normalized: Vec<f64> = errors
        .iter()
        .zip(dts.iter())
        .map(|(e, dt)| e / dt.powi(4))
        .collect();
    let max = normalized.iter().cloned().fold(f64::MIN, f64::max);
    let min = normalized.iter().cloned().fold(f64::MAX, f64::min);
    assert!(
        max / min < 2.0,
        "error/dt^4 varies too much: {normalized:?} (errors {errors:?})"
    );
    // And the observed order is 4 within 0.3.
    for k in 1..dts.len() {
        let order = (errors[k - 1] / errors[k]).log2();
        assert!(
            (order - 4.0).abs() < 0.3,
            "observed order {order} between dt = {} and {}",
            dts[k - 1],
            dts[k]
        );
    }
}

#[test]
fn integral_drift_scales_as_dt_fourth() {
    let group = Arc::new(FuchsianGroup::genus2_octagon());
    let f = Observable::re().on_quotient(group);
    let e = 0.125;
    let state = test_state(e);
    let period = circle_orbit(DiskPoint::origin(), e, 0.0).unwrap().period();
    let drift_at = |dt: f64| -> f64 {
        let traj = integrate(&state, 2.0 * period, dt, FieldStrength::UNIT).unwrap();
        let i0 = integral_value(&state, &f).unwrap();
        traj.samples()
            .iter()
            .step_by(20)
            .map(|s| (integral_value(&s.state, &f).unwrap() - i0).abs())
            .fold(0.0_f64, f64::max)
    };
    // At dt = 1e-3 the drift sits at rounding noise, so probe the scaling
    // on coarser steps where truncation dominates.
    let coarse = drift_at(8e-3);
    let fine = drift_at(4e-3);
    let order = (coarse / fine).log2();
    assert!(
        (order - 4.0).abs() < 0.8,
        "drift order {order} (coarse {coarse:.3e}, fine {fine:.3e})"
    );
}

#[test]
fn energy_drift_accumulates_slowly_over_long_runs() {
    let state = test_state(0.125);
    let e0 = state.energy();
    let traj = integrate(&state, 100.0, 1e-3, FieldStrength::UNIT).unwrap();
    let drift = traj
        .samples()
        .iter()
        .map(|s| ((s.state.energy() - e0) / e0).abs())
        .fold(0.0_f64, f64::max);
    assert!(drift < 1e-8, "relative energy drift {drift:.3e} over T = 100");
}
