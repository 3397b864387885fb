//! Numerical regime diagnostics: top Lyapunov exponent and fundamental-
//! domain coverage.
//!
//! Subcritical orbits are closed, so their exponent vanishes; at the
//! critical level single trajectories equidistribute over the surface; above
//! it the flow is uniformly hyperbolic with transverse expansion rate
//! `√(2E − s²)` (equal to `√(2E)` for the field-free geodesic flow, i.e. 1
//! at unit speed — the calibration point of the estimator).

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::curves::{classify_by_energy, curvature_for_energy, CurveClass};
use crate::error::{Error, Result};
use crate::flow::{rhs, rk4_step_raw, FieldStrength, PhaseState};
use crate::hyperbolic::DiskPoint;
use crate::integrals::{integral_value, Observable};
use crate::quotient::{reduce_state, FuchsianGroup};

/// How the tangent dynamics is advanced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TangentBackend {
    /// Shadow-trajectory cloning at the given phase-space separation,
    /// rescaled at every renormalization. Scheme-agnostic default.
    Cloning { separation: f64 },
    /// Analytic variational equations co-integrated with the state; serves
    /// as the oracle certifying the cloning backend.
    Variational,
}

impl std::fmt::Display for TangentBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TangentBackend::Cloning { separation } => {
                write!(f, "cloning(separation={separation:.1e})")
            }
            TangentBackend::Variational => write!(f, "variational"),
        }
    }
}

/// Parameters of a Lyapunov run.
#[derive(Debug, Clone, Copy)]
pub struct LyapunovConfig {
    pub dt: f64,
    pub renorm_interval: f64,
    pub backend: TangentBackend,
    pub field: FieldStrength,
    /// Seed for the block-bootstrap stderr resampling.
    pub seed: u64,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            renorm_interval: 1.0,
            backend: TangentBackend::Cloning { separation: 1e-8 },
            field: FieldStrength::UNIT,
            seed: 0,
        }
    }
}

/// Top-exponent estimate with bootstrap error bar.
#[derive(Debug, Clone, Copy)]
pub struct LyapunovEstimate {
    /// Per unit time.
    pub lambda: f64,
    pub stderr: f64,
    pub total_time: f64,
    pub renorm_interval: f64,
    pub backend: TangentBackend,
}

/// Minimum number of renormalization windows for a meaningful estimate.
const MIN_WINDOWS: usize = 10;

/// Windows discarded while the tangent direction aligns with the most
/// expanding one.
fn warmup_windows(total: usize) -> usize {
    10.min(total.saturating_sub(MIN_WINDOWS))
}

fn check_energy_label(state: &PhaseState, e: f64) -> Result<()> {
    let actual = state.energy();
    if (actual - e).abs() > 1e-6 * (1.0 + e.abs()) {
        return Err(Error::EnergyMismatch {
            expected: e,
            actual,
        });
    }
    Ok(())
}

fn state_array(state: &PhaseState) -> [f64; 4] {
    [
        state.position().re(),
        state.position().im(),
        state.momentum().re,
        state.momentum().im,
    ]
}

fn state_from_array(u: [f64; 4]) -> Result<PhaseState> {
    Ok(PhaseState::new(
        DiskPoint::new(u[0], u[1])?,
        u[2],
        u[3],
    ))
}

/// Top Lyapunov exponent of the flow through `state` at energy `e`,
/// estimated over `total_time` on the quotient (the state is pulled back to
/// the fundamental domain after every step so the run stays in a compact
/// chart region). The tangent vector is renormalized every
/// `config.renorm_interval`; log stretch factors are averaged and their
/// block-bootstrap spread reported as `stderr`.
pub fn lyapunov_top(
    state: &PhaseState,
    e: f64,
    total_time: f64,
    config: &LyapunovConfig,
    group: &FuchsianGroup,
) -> Result<LyapunovEstimate> {
    check_energy_label(state, e)?;
    if !(config.dt > 0.0) {
        return Err(Error::InvalidTimeStep { dt: config.dt });
    }
    let n_windows = (total_time / config.renorm_interval).floor() as usize;
    if n_windows < MIN_WINDOWS {
        return Err(Error::InsufficientData {
            windows: n_windows,
            needed: MIN_WINDOWS,
        });
    }
    let steps_per_window = (config.renorm_interval / config.dt).round().max(1.0) as usize;

    let stretches = match config.backend {
        TangentBackend::Cloning { separation } => run_cloning(
            state,
            config,
            group,
            n_windows,
            steps_per_window,
            separation,
        )?,
        TangentBackend::Variational => {
            run_variational(state, config, group, n_windows, steps_per_window)?
        }
    };

    let warmup = warmup_windows(n_windows);
    let counted = &stretches[warmup..];
    let window_time = steps_per_window as f64 * config.dt;
    let lambda = counted.iter().sum::<f64>() / (counted.len() as f64 * window_time);
    let stderr = block_bootstrap_stderr(counted, window_time, config.seed);
    Ok(LyapunovEstimate {
        lambda,
        stderr,
        total_time: n_windows as f64 * window_time,
        renorm_interval: window_time,
        backend: config.backend,
    })
}

fn phase_separation(a: &PhaseState, b: &PhaseState) -> f64 {
    let ua = state_array(a);
    let ub = state_array(b);
    ua.iter()
        .zip(ub.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn run_cloning(
    state: &PhaseState,
    config: &LyapunovConfig,
    group: &FuchsianGroup,
    n_windows: usize,
    steps_per_window: usize,
    separation: f64,
) -> Result<Vec<f64>> {
    let (mut main, _) = reduce_state(state, group)?;
    // Initial offset along a fixed phase-space direction.
    let mut shadow = {
        let u = state_array(&main);
        let h = separation * 0.5;
        state_from_array([u[0] + h, u[1] + h, u[2] + h, u[3] + h])?
    };
    let s = config.field.strength();
    let mut stretches = Vec::with_capacity(n_windows);
    for _ in 0..n_windows {
        for _ in 0..steps_per_window {
            let next_main = state_from_array(rk4_step_raw(&state_array(&main), config.dt, s))?;
            let next_shadow =
                state_from_array(rk4_step_raw(&state_array(&shadow), config.dt, s))?;
            let (reduced, reduction) = reduce_state(&next_main, group)?;
            main = reduced;
            shadow = if reduction.word.is_empty() {
                next_shadow
            } else {
                // The clone rides the same isometry so the separation stays
                // meaningful across the seam.
                next_shadow.transformed_by(&reduction.transform)?
            };
        }
        let d = phase_separation(&main, &shadow);
        stretches.push((d / separation).ln());
        // Pull the clone back to the reference separation along the current
        // separation direction.
        let um = state_array(&main);
        let us = state_array(&shadow);
        let scale = separation / d;
        shadow = state_from_array([
            um[0] + (us[0] - um[0]) * scale,
            um[1] + (us[1] - um[1]) * scale,
            um[2] + (us[2] - um[2]) * scale,
            um[3] + (us[3] - um[3]) * scale,
        ])?;
    }
    Ok(stretches)
}

/// Jacobian of the phase-space vector field at `u`.
fn jacobian(u: &[f64; 4], s: f64) -> [[f64; 4]; 4] {
    let (x, y, px, py) = (u[0], u[1], u[2], u[3]);
    let b = 1.0 - x * x - y * y;
    let p_sq = px * px + py * py;
    let a = 0.25 * b * b;
    [
        [-x * b * px, -y * b * px, a, 0.0],
        [-x * b * py, -y * b * py, 0.0, a],
        [
            0.5 * p_sq * (b - 2.0 * x * x),
            -x * y * p_sq,
            x * b * px,
            x * b * py + s,
        ],
        [
            -x * y * p_sq,
            0.5 * p_sq * (b - 2.0 * y * y),
            y * b * px - s,
            y * b * py,
        ],
    ]
}

fn mat_vec(m: &[[f64; 4]; 4], v: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|i| {
        m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2] + m[i][3] * v[3]
    })
}

fn axpy(u: &[f64; 4], scale: f64, v: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|i| u[i] + scale * v[i])
}

/// One RK4 step of the state and tangent vector together.
fn rk4_tangent_step(u: &[f64; 4], w: &[f64; 4], dt: f64, s: f64) -> ([f64; 4], [f64; 4]) {
    let k1 = rhs(u, s);
    let l1 = mat_vec(&jacobian(u, s), w);
    let u2 = axpy(u, 0.5 * dt, &k1);
    let w2 = axpy(w, 0.5 * dt, &l1);
    let k2 = rhs(&u2, s);
    let l2 = mat_vec(&jacobian(&u2, s), &w2);
    let u3 = axpy(u, 0.5 * dt, &k2);
    let w3 = axpy(w, 0.5 * dt, &l2);
    let k3 = rhs(&u3, s);
    let l3 = mat_vec(&jacobian(&u3, s), &w3);
    let u4 = axpy(u, dt, &k3);
    let w4 = axpy(w, dt, &l3);
    let k4 = rhs(&u4, s);
    let l4 = mat_vec(&jacobian(&u4, s), &w4);
    let sixth = dt / 6.0;
    let un = std::array::from_fn(|i| {
        u[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    });
    let wn = std::array::from_fn(|i| {
        w[i] + sixth * (l1[i] + 2.0 * l2[i] + 2.0 * l3[i] + l4[i])
    });
    (un, wn)
}

/// Transports a tangent vector through the phase-space lift of an isometry.
///
/// With `D(z) = b̄ z + ā` the lift maps `(z, p) ↦ (m(z), p·conj(D)²)`, so
/// `δz ↦ δz/D²` and `δp ↦ conj(D)² δp + 2 b p conj(D) conj(δz)`.
fn transport_tangent(
    m: &crate::hyperbolic::MobiusTransform,
    z: Complex64,
    p: Complex64,
    w: &[f64; 4],
) -> [f64; 4] {
    let d = m.b().conj() * z + m.a().conj();
    let dz = Complex64::new(w[0], w[1]);
    let dp = Complex64::new(w[2], w[3]);
    let dz_new = dz / (d * d);
    let dp_new = d.conj() * d.conj() * dp + 2.0 * m.b() * p * d.conj() * dz.conj();
    [dz_new.re, dz_new.im, dp_new.re, dp_new.im]
}

fn run_variational(
    state: &PhaseState,
    config: &LyapunovConfig,
    group: &FuchsianGroup,
    n_windows: usize,
    steps_per_window: usize,
) -> Result<Vec<f64>> {
    let (reduced, _) = reduce_state(state, group)?;
    let mut u = state_array(&reduced);
    let norm0 = 0.5_f64;
    let mut w = [norm0, norm0, norm0, norm0];
    let s = config.field.strength();
    let mut stretches = Vec::with_capacity(n_windows);
    for _ in 0..n_windows {
        for _ in 0..steps_per_window {
            let (un, wn) = rk4_tangent_step(&u, &w, config.dt, s);
            let advanced = state_from_array(un)?;
            let (back, reduction) = reduce_state(&advanced, group)?;
            if reduction.word.is_empty() {
                u = un;
                w = wn;
            } else {
                let z = Complex64::new(un[0], un[1]);
                let p = Complex64::new(un[2], un[3]);
                w = transport_tangent(&reduction.transform, z, p, &wn);
                u = state_array(&back);
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        stretches.push(norm.ln());
        for x in &mut w {
            *x /= norm;
        }
    }
    Ok(stretches)
}

/// Standard error of the mean stretch rate from an overlapping-block
/// bootstrap over renormalization windows.
fn block_bootstrap_stderr(samples: &[f64], window_time: f64, seed: u64) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let block = (n / 20).max(1);
    let n_blocks = n.div_ceil(block);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reps = 200;
    let mut means = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut total = 0.0;
        let mut count = 0usize;
        for _ in 0..n_blocks {
            let start = rng.random_range(0..=(n - block));
            for sample in &samples[start..start + block] {
                total += sample;
                count += 1;
            }
        }
        means.push(total / (count as f64 * window_time));
    }
    let mean = means.iter().sum::<f64>() / reps as f64;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (reps as f64 - 1.0);
    var.sqrt()
}

/// Parameters of a coverage run.
#[derive(Debug, Clone, Copy)]
pub struct CoverageConfig {
    pub dt: f64,
    pub field: FieldStrength,
    /// Time between recorded (t, fraction) points; defaults to
    /// `total_time / 200` when zero.
    pub record_interval: f64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            field: FieldStrength::UNIT,
            record_interval: 0.0,
        }
    }
}

/// Fraction of fundamental-domain grid cells visited by one trajectory.
#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub grid_n: usize,
    pub visited_fraction: f64,
    /// Non-decreasing series of (t, fraction).
    pub time_series: Vec<(f64, f64)>,
}

/// Integrates on the cover with per-step reduction and marks visited cells
/// of a `grid_n × grid_n` Euclidean grid over `[−1, 1]²` clipped to the
/// fundamental domain (a cell belongs to the domain if its center does).
pub fn coverage(
    state: &PhaseState,
    e: f64,
    total_time: f64,
    grid_n: usize,
    config: &CoverageConfig,
    group: &FuchsianGroup,
) -> Result<CoverageReport> {
    check_energy_label(state, e)?;
    if !(total_time > 0.0) {
        return Err(Error::InvalidDuration { total_time });
    }
    if !(config.dt > 0.0) || config.dt > total_time {
        return Err(Error::InvalidTimeStep { dt: config.dt });
    }

    let cell = 2.0 / grid_n as f64;
    let mut domain_mask = vec![false; grid_n * grid_n];
    let mut domain_cells = 0usize;
    for j in 0..grid_n {
        for i in 0..grid_n {
            let re = -1.0 + (i as f64 + 0.5) * cell;
            let im = -1.0 + (j as f64 + 0.5) * cell;
            if let Ok(center) = DiskPoint::new(re, im) {
                if group.is_in_dirichlet_domain(center) {
                    domain_mask[j * grid_n + i] = true;
                    domain_cells += 1;
                }
            }
        }
    }

    let mut visited = vec![false; grid_n * grid_n];
    let mut visited_count = 0usize;
    let mark = |z: DiskPoint, visited: &mut [bool], count: &mut usize| {
        let i = (((z.re() + 1.0) / cell) as usize).min(grid_n - 1);
        let j = (((z.im() + 1.0) / cell) as usize).min(grid_n - 1);
        let idx = j * grid_n + i;
        if domain_mask[idx] && !visited[idx] {
            visited[idx] = true;
            *count += 1;
        }
    };

    let record_interval = if config.record_interval > 0.0 {
        config.record_interval
    } else {
        total_time / 200.0
    };
    let record_every = (record_interval / config.dt).round().max(1.0) as usize;
    let steps = (total_time / config.dt).round().max(1.0) as usize;

    let (mut current, _) = reduce_state(state, group)?;
    mark(current.position(), &mut visited, &mut visited_count);
    let mut series = Vec::new();
    let s = config.field.strength();
    for k in 1..=steps {
        let advanced = state_from_array(rk4_step_raw(&state_array(&current), config.dt, s))?;
        let (reduced, _) = reduce_state(&advanced, group)?;
        current = reduced;
        mark(current.position(), &mut visited, &mut visited_count);
        if k % record_every == 0 || k == steps {
            series.push((
                k as f64 * config.dt,
                visited_count as f64 / domain_cells as f64,
            ));
        }
    }
    Ok(CoverageReport {
        grid_n,
        visited_fraction: visited_count as f64 / domain_cells as f64,
        time_series: series,
    })
}

/// One row of the regime summary.
#[derive(Debug, Clone)]
pub struct RegimeRow {
    pub energy: f64,
    pub curvature: f64,
    pub class: CurveClass,
    pub lyapunov: LyapunovEstimate,
    pub coverage_fraction: f64,
    /// Drift of `I_f` over ten periods for subcritical rows; `None` where
    /// the integral does not exist (the operation refuses above E = 1/2).
    pub integral_drift: Option<f64>,
}

/// Per-regime run settings for [`regime_report`].
#[derive(Debug, Clone, Copy)]
pub struct RegimeSettings {
    pub lyapunov_time: f64,
    pub coverage_time: f64,
    pub grid_n: usize,
    pub dt: f64,
    pub seed: u64,
}

impl Default for RegimeSettings {
    fn default() -> Self {
        Self {
            lyapunov_time: 200.0,
            coverage_time: 300.0,
            grid_n: 50,
            dt: 1e-3,
            seed: 1,
        }
    }
}

/// Step size keeping the per-step arc length roughly constant: the base dt
/// up to speed 2, halved for each further doubling of the speed.
pub fn default_dt(e: f64, base_dt: f64) -> f64 {
    let speed = (2.0 * e).sqrt();
    if speed <= 2.0 {
        base_dt
    } else {
        base_dt / 2.0_f64.powf((speed / 2.0).log2().ceil())
    }
}

/// Builds the summary table across energies: curvature, class, Lyapunov
/// estimate, coverage fraction, and subcritical integral drift.
pub fn regime_report(
    energies: &[f64],
    settings: &RegimeSettings,
    group: &std::sync::Arc<FuchsianGroup>,
) -> Result<Vec<RegimeRow>> {
    let mut rows = Vec::with_capacity(energies.len());
    for &e in energies {
        let curvature = curvature_for_energy(e)?;
        let class = classify_by_energy(e)?;
        let dt = default_dt(e, settings.dt);
        let start = PhaseState::with_energy_direction(
            DiskPoint::new(0.12, 0.07).expect("fixed start is interior"),
            e,
            0.4,
        )?;
        let lyap_config = LyapunovConfig {
            dt,
            seed: settings.seed,
            ..LyapunovConfig::default()
        };
        let lyapunov = lyapunov_top(&start, e, settings.lyapunov_time, &lyap_config, group)?;
        let coverage_config = CoverageConfig {
            dt,
            ..CoverageConfig::default()
        };
        let cov = coverage(
            &start,
            e,
            settings.coverage_time,
            settings.grid_n,
            &coverage_config,
            group,
        )?;
        let integral_drift = if e < 0.5 {
            let f = Observable::re().on_quotient(std::sync::Arc::clone(group));
            let period = crate::curves::circle_orbit(DiskPoint::origin(), e, 0.0)?.period();
            let traj = crate::flow::integrate(&start, 10.0 * period, dt, FieldStrength::UNIT)?;
            let reference = integral_value(&start, &f)?;
            let mut drift = 0.0_f64;
            for sample in traj.samples().iter().step_by(25) {
                drift = drift.max((integral_value(&sample.state, &f)? - reference).abs());
            }
            Some(drift)
        } else {
            None
        };
        rows.push(RegimeRow {
            energy: e,
            curvature,
            class,
            lyapunov,
            coverage_fraction: cov.visited_fraction,
            integral_drift,
        });
    }
    Ok(rows)
}


#[cfg(test)]
mod measurements {
    use super::*;
    use crate::integrals::{integral_observable, poisson_bracket, BRACKET_STEP};

    #[test]
    #[ignore]
    fn measure_subcritical_lyapunov_decay() {
        let g = FuchsianGroup::genus2_octagon();
        let state = PhaseState::with_energy_direction(
            DiskPoint::new(0.12, 0.07).unwrap(), 0.125, 0.4).unwrap();
        for total in [400.0, 600.0, 1000.0, 1500.0] {
            for backend in [TangentBackend::Cloning { separation: 1e-8 }, TangentBackend::Variational] {
                let config = LyapunovConfig { backend, ..LyapunovConfig::default() };
                let est = lyapunov_top(&state, 0.125, total, &config, &g).unwrap();
                println!("E=1/8 T={total:6.0} {backend}: lambda = {:+.5} stderr = {:.5}", est.lambda, est.stderr);
            }
        }
    }

    #[test]
    #[ignore]
    fn measure_supercritical_lyapunov() {
        let g = FuchsianGroup::genus2_octagon();
        for e in [1.0, 2.0, 4.5] {
            let state = PhaseState::with_energy_direction(
                DiskPoint::new(0.12, 0.07).unwrap(), e, 0.4).unwrap();
            let expected = (2.0 * e - 1.0).sqrt();
            for backend in [TangentBackend::Cloning { separation: 1e-8 }, TangentBackend::Variational] {
                let config = LyapunovConfig { dt: default_dt(e, 1e-3), backend, ..LyapunovConfig::default() };
                let est = lyapunov_top(&state, e, 300.0, &config, &g).unwrap();
                println!("E={e} {backend}: lambda = {:.5} stderr = {:.5} vs sqrt(2E-1) = {expected:.5}", est.lambda, est.stderr);
            }
        }
    }

    #[test]
    #[ignore]
    fn measure_center_bracket_values() {
        let f = crate::integrals::Observable::re();
        let gobs = crate::integrals::Observable::im();
        let i_f = integral_observable(&f);
        let i_g = integral_observable(&gobs);
        for &(re, im, dir, e) in &[
            (0.0, 0.0, 0.0, 0.125),
            (0.2, -0.1, 0.9, 0.2),
            (-0.3, 0.15, 2.2, 0.3),
            (0.1, 0.3, 4.0, 0.4),
            (0.4, 0.2, 1.3, 0.45),
        ] {
            let state = PhaseState::with_energy_direction(
                DiskPoint::new(re, im).unwrap(), e, dir).unwrap();
            let v = poisson_bracket(&i_f, &i_g, &state, FieldStrength::UNIT, BRACKET_STEP).unwrap();
            println!("{{I_re, I_im}} at ({re:+.2},{im:+.2}) dir {dir:.1} E={e}: {v:+.8}");
        }
    }

    #[test]
    #[ignore]
    fn measure_coverage_short_runs() {
        let g = FuchsianGroup::genus2_octagon();
        for (e, total) in [(0.125, 50.0), (0.5, 400.0)] {
            let state = PhaseState::with_energy_direction(
                DiskPoint::new(0.12, 0.07).unwrap(), e, 0.4).unwrap();
            let report = coverage(&state, e, total, 50, &CoverageConfig::default(), &g).unwrap();
            println!("E={e} T={total}: fraction = {:.4}", report.visited_fraction);
        }
    }

    #[test]
    #[ignore]
    fn measure_stderr_shrink_ratio() {
        let g = FuchsianGroup::genus2_octagon();
        let state = PhaseState::with_energy_direction(
            DiskPoint::new(0.12, 0.07).unwrap(), 2.0, 0.4).unwrap();
        for seed in [0u64, 1, 2] {
            let config = LyapunovConfig { seed, ..LyapunovConfig::default() };
            let short = lyapunov_top(&state, 2.0, 100.0, &config, &g).unwrap();
            let long = lyapunov_top(&state, 2.0, 400.0, &config, &g).unwrap();
            println!("seed {seed}: stderr(100) = {:.5}, stderr(400) = {:.5}, ratio = {:.3}",
                short.stderr, long.stderr, short.stderr / long.stderr);
        }
    }
}
