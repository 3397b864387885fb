//! The magnetic geodesic flow as a Hamiltonian system.
//!
//! Phase space is the cotangent bundle of the disk with Hamiltonian
//! `H = ½ λ⁻² (p_x² + p_y²)` and symplectic form twisted by the magnetic
//! 2-form `F = s·λ² dx∧dy` (s times the hyperbolic area form). Hamilton's
//! equations take the Lorentz-force shape
//!
//! ```text
//! ẋⁱ = λ⁻² pᵢ,        ṗᵢ = −∂ᵢH + F_{ij} ẋʲ,
//! ```
//!
//! which for this metric collapses to
//! `ṗ_x = ½ x (1−r²)|p|² + s p_y`, `ṗ_y = ½ y (1−r²)|p|² − s p_x`.
//! No vector potential is ever constructed; the force enters through `F` only.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hyperbolic::{conformal_factor, DiskPoint, MobiusTransform, BOUNDARY_MARGIN};

/// Scalar multiplying the hyperbolic area form; the reference flow has `s = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldStrength {
    s: f64,
}

impl FieldStrength {
    /// The unit-strength field `F = dμ` (the hyperbolic area form).
    pub const UNIT: FieldStrength = FieldStrength { s: 1.0 };

    /// Field switched off: the ordinary geodesic flow.
    pub const ZERO: FieldStrength = FieldStrength { s: 0.0 };

    pub fn new(s: f64) -> Result<Self> {
        if !(s >= 0.0) {
            return Err(Error::NegativeFieldStrength { strength: s });
        }
        Ok(Self { s })
    }

    pub fn strength(&self) -> f64 {
        self.s
    }
}

impl Default for FieldStrength {
    fn default() -> Self {
        Self::UNIT
    }
}

/// A point of phase space: disk position plus covector momentum.
///
/// The momentum is stored as the complex number `p_x + i p_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    position: DiskPoint,
    momentum: Complex64,
}

impl PhaseState {
    pub fn new(position: DiskPoint, p_x: f64, p_y: f64) -> Self {
        Self {
            position,
            momentum: Complex64::new(p_x, p_y),
        }
    }

    /// Builds the state from a chart velocity `v`, lowering with `p = λ² v`.
    pub fn from_velocity(position: DiskPoint, velocity: Complex64) -> Result<Self> {
        let lambda = conformal_factor(position)?;
        Ok(Self {
            position,
            momentum: velocity * (lambda * lambda),
        })
    }

    /// State at `position` with hyperbolic speed `√(2E)` in the chart
    /// direction `angle` (radians).
    pub fn with_energy_direction(position: DiskPoint, energy: f64, angle: f64) -> Result<Self> {
        if !(energy > 0.0) {
            return Err(Error::NonpositiveEnergy { energy });
        }
        let lambda = conformal_factor(position)?;
        // |p| = λ √(2E) makes ½ λ⁻² |p|² = E.
        let momentum = Complex64::from_polar(lambda * (2.0 * energy).sqrt(), angle);
        Ok(Self { position, momentum })
    }

    pub fn position(&self) -> DiskPoint {
        self.position
    }

    pub fn momentum(&self) -> Complex64 {
        self.momentum
    }

    /// Chart velocity `v = λ⁻² p`.
    pub fn velocity(&self) -> Result<Complex64> {
        let lambda = conformal_factor(self.position)?;
        Ok(self.momentum / (lambda * lambda))
    }

    /// Kinetic energy `½ λ⁻² |p|²`; the magnetic field does not contribute.
    pub fn energy(&self) -> f64 {
        let inv_sq = {
            let one_minus = 1.0 - self.position.norm_sqr();
            one_minus * one_minus / 4.0
        };
        0.5 * inv_sq * self.momentum.norm_sqr()
    }

    /// Image of the state under an isometry: position by the Möbius action,
    /// momentum by the covector pushforward. Energy is invariant.
    pub fn transformed_by(&self, m: &MobiusTransform) -> Result<PhaseState> {
        let z = self.position.as_complex();
        let position = m.apply(self.position)?;
        let momentum = m.push_covector(z, self.momentum);
        Ok(PhaseState { position, momentum })
    }

    fn to_array(self) -> [f64; 4] {
        [
            self.position.re(),
            self.position.im(),
            self.momentum.re,
            self.momentum.im,
        ]
    }

    fn from_array(u: [f64; 4]) -> Result<Self> {
        if !u.iter().all(|x| x.is_finite()) {
            return Err(Error::EscapedDisk { radius: f64::NAN });
        }
        let r = (u[0] * u[0] + u[1] * u[1]).sqrt();
        if r >= 1.0 - BOUNDARY_MARGIN {
            return Err(Error::EscapedDisk { radius: r });
        }
        Ok(Self {
            position: DiskPoint::new(u[0], u[1])?,
            momentum: Complex64::new(u[2], u[3]),
        })
    }
}

/// Energy of a state; free-function form of [`PhaseState::energy`].
pub fn energy(state: &PhaseState) -> f64 {
    state.energy()
}

/// Phase-space derivative `(ẋ, ẏ, ṗ_x, ṗ_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDerivative {
    pub dx: f64,
    pub dy: f64,
    pub dp_x: f64,
    pub dp_y: f64,
}

#[inline]
pub(crate) fn rhs(u: &[f64; 4], s: f64) -> [f64; 4] {
    let (x, y, px, py) = (u[0], u[1], u[2], u[3]);
    let b = 1.0 - x * x - y * y;
    let a = 0.25 * b * b;
    let p_sq = px * px + py * py;
    [
        a * px,
        a * py,
        0.5 * x * b * p_sq + s * py,
        0.5 * y * b * p_sq - s * px,
    ]
}

/// Hamiltonian vector field of `H` under the twisted symplectic structure.
pub fn vector_field(state: &PhaseState, field: FieldStrength) -> Result<PhaseDerivative> {
    let r = state.position.norm();
    if r >= 1.0 - BOUNDARY_MARGIN {
        return Err(Error::BoundaryProximity { radius: r });
    }
    let d = rhs(&state.to_array(), field.strength());
    Ok(PhaseDerivative {
        dx: d[0],
        dy: d[1],
        dp_x: d[2],
        dp_y: d[3],
    })
}

#[inline]
pub(crate) fn rk4_step_raw(u: &[f64; 4], dt: f64, s: f64) -> [f64; 4] {
    let k1 = rhs(u, s);
    let u2 = [
        u[0] + 0.5 * dt * k1[0],
        u[1] + 0.5 * dt * k1[1],
        u[2] + 0.5 * dt * k1[2],
        u[3] + 0.5 * dt * k1[3],
    ];
    let k2 = rhs(&u2, s);
    let u3 = [
        u[0] + 0.5 * dt * k2[0],
        u[1] + 0.5 * dt * k2[1],
        u[2] + 0.5 * dt * k2[2],
        u[3] + 0.5 * dt * k2[3],
    ];
    let k3 = rhs(&u3, s);
    let u4 = [
        u[0] + dt * k3[0],
        u[1] + dt * k3[1],
        u[2] + dt * k3[2],
        u[3] + dt * k3[3],
    ];
    let k4 = rhs(&u4, s);
    let sixth = dt / 6.0;
    [
        u[0] + sixth * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        u[1] + sixth * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        u[2] + sixth * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        u[3] + sixth * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
    ]
}

/// One classical 4th-order explicit step of the flow.
pub fn step(state: &PhaseState, dt: f64, field: FieldStrength) -> Result<PhaseState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidTimeStep { dt });
    }
    PhaseState::from_array(rk4_step_raw(&state.to_array(), dt, field.strength()))
}

/// Like [`step`], then rescales the momentum so the energy after the step
/// equals the energy before it exactly (up to one floating multiply).
pub fn step_projected(state: &PhaseState, dt: f64, field: FieldStrength) -> Result<PhaseState> {
    step_projected_to(state, dt, field, state.energy())
}

fn step_projected_to(
    state: &PhaseState,
    dt: f64,
    field: FieldStrength,
    target: f64,
) -> Result<PhaseState> {
    let mut next = step(state, dt, field)?;
    let e = next.energy();
    if e > 0.0 {
        next.momentum *= (target / e).sqrt();
    }
    Ok(next)
}

/// A sample of an integrated trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedState {
    pub t: f64,
    pub state: PhaseState,
}

/// Uniform-step trajectory of the flow.
#[derive(Debug, Clone)]
pub struct Trajectory {
    samples: Vec<TimedState>,
    step: f64,
}

impl Trajectory {
    pub fn from_samples(samples: Vec<TimedState>, step: f64) -> Self {
        Self { samples, step }
    }

    pub fn samples(&self) -> &[TimedState] {
        &self.samples
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> &TimedState {
        &self.samples[0]
    }

    pub fn last(&self) -> &TimedState {
        self.samples.last().expect("trajectory is never empty")
    }

    /// Numerical geodesic curvature of the projected position curve at
    /// sample `index`, from the covariant acceleration over speed squared.
    /// Velocities are differentiated by central differences, so
    /// `1 ≤ index ≤ len − 2`.
    pub fn geodesic_curvature(&self, index: usize) -> Result<f64> {
        geodesic_curvature(self, index)
    }
}

/// Integrates the flow over `total_time` with uniform steps `dt`.
pub fn integrate(
    state: &PhaseState,
    total_time: f64,
    dt: f64,
    field: FieldStrength,
) -> Result<Trajectory> {
    integrate_impl(state, total_time, dt, field, false)
}

/// Integrates with per-step energy projection enabled.
pub fn integrate_projected(
    state: &PhaseState,
    total_time: f64,
    dt: f64,
    field: FieldStrength,
) -> Result<Trajectory> {
    integrate_impl(state, total_time, dt, field, true)
}

fn integrate_impl(
    state: &PhaseState,
    total_time: f64,
    dt: f64,
    field: FieldStrength,
    project: bool,
) -> Result<Trajectory> {
    if !(total_time > 0.0) {
        return Err(Error::InvalidDuration { total_time });
    }
    if !(dt > 0.0) || dt > total_time {
        return Err(Error::InvalidTimeStep { dt });
    }
    let steps = (total_time / dt).round().max(1.0) as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut current = *state;
    // Project to the trajectory's initial energy, not the previous step's,
    // so rounding cannot accumulate over long runs.
    let target = state.energy();
    samples.push(TimedState {
        t: 0.0,
        state: current,
    });
    for k in 1..=steps {
        current = if project {
            step_projected_to(&current, dt, field, target)?
        } else {
            step(&current, dt, field)?
        };
        samples.push(TimedState {
            t: k as f64 * dt,
            state: current,
        });
    }
    Ok(Trajectory { samples, step: dt })
}

/// Geodesic curvature estimate at an interior sample of a trajectory.
///
/// Computes `k_g = |v̇ + Γ(v,v)| / (λ |v|²)` with the chart velocity `v`
/// differenced centrally and the conformal-metric Christoffel terms
/// `Γˣ(v,v) = φ_x(v_x²−v_y²) + 2φ_y v_x v_y` (and symmetrically for y),
/// where `φ = log λ`.
pub fn geodesic_curvature(traj: &Trajectory, index: usize) -> Result<f64> {
    let len = traj.samples.len();
    if index == 0 || index + 1 >= len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    geodesic_curvature_of_triple(
        &traj.samples[index - 1].state,
        &traj.samples[index].state,
        &traj.samples[index + 1].state,
        traj.step,
    )
}

/// Geodesic curvature from three consecutive equally spaced states sharing
/// one chart (neighbors of a quotient sample must be aligned first).
pub fn geodesic_curvature_of_triple(
    prev: &PhaseState,
    here: &PhaseState,
    next: &PhaseState,
    dt: f64,
) -> Result<f64> {
    let v_prev = prev.velocity()?;
    let v_next = next.velocity()?;
    let v = here.velocity()?;
    if v.norm_sqr() == 0.0 {
        return Err(Error::ZeroSpeed);
    }
    let vdot = (v_next - v_prev) / (2.0 * dt);

    let z = here.position();
    let one_minus = 1.0 - z.norm_sqr();
    let phi_x = 2.0 * z.re() / one_minus;
    let phi_y = 2.0 * z.im() / one_minus;
    let (vx, vy) = (v.re, v.im);
    let gamma_x = phi_x * (vx * vx - vy * vy) + 2.0 * phi_y * vx * vy;
    let gamma_y = phi_y * (vy * vy - vx * vx) + 2.0 * phi_x * vx * vy;

    let accel = Complex64::new(vdot.re + gamma_x, vdot.im + gamma_y);
    let lambda = conformal_factor(z)?;
    Ok(accel.norm() / (lambda * v.norm_sqr()))
}
