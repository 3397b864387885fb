//! Integrals of motion of the subcritical flow.
//!
//! Every function `f` on the surface yields a conserved quantity
//! `I_f(x, p) = f(c)` where `c` is the flow-invariant hyperbolic center of
//! the orbit through `(x, p)`; on the quotient, `f` is evaluated at the
//! fundamental-domain representative of the center. The module also
//! provides the twisted Poisson bracket by finite differences, a root
//! finder that isolates the closed trajectory with prescribed values of two
//! independent integrals, and the energy-dependence probe of `I_f`.

use std::sync::Arc;

use crate::curves::{circle_orbit, hyperbolic_center, CircleOrbit};
use crate::error::{Error, Result};
use crate::flow::{FieldStrength, PhaseState};
use crate::hyperbolic::{conformal_factor, distance, DiskPoint};
use crate::quotient::{local_quotient_distance, reduce, FuchsianGroup};

/// Default finite-difference step for Poisson brackets: balances O(h²)
/// truncation against roundoff in double precision.
pub const BRACKET_STEP: f64 = 1e-5;

/// Minimum singular value of the (f, g) Jacobian accepted as functionally
/// independent at a root.
pub const INDEPENDENCE_SIGMA_MIN: f64 = 1e-6;

/// A smooth observable on the disk, or on the quotient when constructed
/// with a group (evaluation then happens at the fundamental-domain
/// representative, which makes it Γ-invariant).
#[derive(Clone)]
pub struct Observable {
    label: String,
    f: Arc<dyn Fn(DiskPoint) -> f64 + Send + Sync>,
    group: Option<Arc<FuchsianGroup>>,
}

impl std::fmt::Debug for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Observable")
            .field("label", &self.label)
            .field("quotient", &self.group.is_some())
            .finish()
    }
}

impl Observable {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(DiskPoint) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
            group: None,
        }
    }

    /// Coordinate observable `z ↦ Re z`.
    pub fn re() -> Self {
        Self::new("re", |z| z.re())
    }

    /// Coordinate observable `z ↦ Im z`.
    pub fn im() -> Self {
        Self::new("im", |z| z.im())
    }

    /// Hyperbolic distance to the origin.
    pub fn distance_to_origin() -> Self {
        Self::new("dist0", |z| distance(DiskPoint::origin(), z))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), move |_| c)
    }

    /// Realizes the observable on the quotient: arguments are reduced to
    /// their fundamental-domain representative before evaluation.
    pub fn on_quotient(mut self, group: Arc<FuchsianGroup>) -> Self {
        self.group = Some(group);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn group(&self) -> Option<&Arc<FuchsianGroup>> {
        self.group.as_ref()
    }

    pub fn eval(&self, z: DiskPoint) -> Result<f64> {
        match &self.group {
            Some(group) => Ok((self.f)(reduce(z, group)?.representative)),
            None => Ok((self.f)(z)),
        }
    }
}

/// Maximum invariance residual `|f(γ z) − f(z)|` of a quotient observable
/// over the group generators at the given sample points.
pub fn gamma_invariance_residual(
    obs: &Observable,
    group: &FuchsianGroup,
    samples: &[DiskPoint],
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for &z in samples {
        let base = obs.eval(z)?;
        for (_, gamma) in group.side_pairings() {
            let moved = gamma.apply(z)?;
            worst = worst.max((obs.eval(moved)? - base).abs());
        }
    }
    Ok(worst)
}

/// The integral of motion `I_f = f(center)`. Defined on `E < 1/2` only.
pub fn integral_value(state: &PhaseState, f: &Observable) -> Result<f64> {
    let e = state.energy();
    if !(e > 0.0) {
        return Err(Error::NonpositiveEnergy { energy: e });
    }
    if e >= 0.5 {
        return Err(Error::OutOfRegime { energy: e });
    }
    f.eval(hyperbolic_center(state, e)?)
}

/// An integral value tagged with the (subcritical) energy level it lives on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralValue {
    pub value: f64,
    pub energy_level: f64,
}

/// Like [`integral_value`], keeping the energy level with the value.
pub fn integral_on_level(state: &PhaseState, f: &Observable) -> Result<IntegralValue> {
    Ok(IntegralValue {
        value: integral_value(state, f)?,
        energy_level: state.energy(),
    })
}

/// Phase-space observable for bracket computations.
pub type PhaseFn<'a> = dyn Fn(&PhaseState) -> Result<f64> + 'a;

/// The Hamiltonian as a phase-space observable.
pub fn hamiltonian() -> impl Fn(&PhaseState) -> Result<f64> {
    |state: &PhaseState| Ok(state.energy())
}

/// `I_f` as a phase-space observable.
pub fn integral_observable(f: &Observable) -> impl Fn(&PhaseState) -> Result<f64> + '_ {
    move |state: &PhaseState| integral_value(state, f)
}

#[derive(Debug, Clone, Copy)]
struct PhaseGradient {
    x: f64,
    y: f64,
    px: f64,
    py: f64,
}

fn perturbed_position(state: &PhaseState, dx: f64, dy: f64, h: f64) -> Result<PhaseState> {
    let z = state.position();
    let position = DiskPoint::new(z.re() + dx, z.im() + dy).map_err(|_| {
        Error::StencilExitsDisk {
            re: z.re(),
            im: z.im(),
            h,
        }
    })?;
    Ok(PhaseState::new(
        position,
        state.momentum().re,
        state.momentum().im,
    ))
}

fn phase_gradient(f: &PhaseFn<'_>, state: &PhaseState, h: f64) -> Result<PhaseGradient> {
    let two_h = 2.0 * h;
    let x = (f(&perturbed_position(state, h, 0.0, h)?)?
        - f(&perturbed_position(state, -h, 0.0, h)?)?)
        / two_h;
    let y = (f(&perturbed_position(state, 0.0, h, h)?)?
        - f(&perturbed_position(state, 0.0, -h, h)?)?)
        / two_h;
    let p = state.momentum();
    let bump_p = |dpx: f64, dpy: f64| {
        PhaseState::new(state.position(), p.re + dpx, p.im + dpy)
    };
    let px = (f(&bump_p(h, 0.0))? - f(&bump_p(-h, 0.0))?) / two_h;
    let py = (f(&bump_p(0.0, h))? - f(&bump_p(0.0, -h))?) / two_h;
    Ok(PhaseGradient { x, y, px, py })
}

/// Twisted Poisson bracket by central differences with step `h`:
///
/// ```text
/// {F, G} = Σᵢ (∂F/∂xⁱ ∂G/∂pᵢ − ∂F/∂pᵢ ∂G/∂xⁱ) + F₁₂ (∂F/∂p₁ ∂G/∂p₂ − ∂F/∂p₂ ∂G/∂p₁)
/// ```
///
/// with `F₁₂ = s λ²` the magnetic area form.
pub fn poisson_bracket(
    f1: &PhaseFn<'_>,
    f2: &PhaseFn<'_>,
    state: &PhaseState,
    field: FieldStrength,
    h: f64,
) -> Result<f64> {
    let g1 = phase_gradient(f1, state, h)?;
    let g2 = phase_gradient(f2, state, h)?;
    let canonical = g1.x * g2.px - g1.px * g2.x + g1.y * g2.py - g1.py * g2.y;
    let lambda = conformal_factor(state.position())?;
    let f12 = field.strength() * lambda * lambda;
    let twisted = f12 * (g1.px * g2.py - g1.py * g2.px);
    Ok(canonical + twisted)
}

/// A closed trajectory isolated by fixing the values of two integrals.
#[derive(Debug, Clone)]
pub struct LocatedOrbit {
    /// The closed orbit centered at the first convergent root.
    pub orbit: CircleOrbit,
    /// Distinct roots found by the multi-start search (quotient-reduced
    /// when the observables live on the quotient).
    pub roots: Vec<DiskPoint>,
    /// Largest pairwise separation among all convergent root candidates,
    /// measured in the quotient metric when applicable.
    pub max_root_separation: f64,
}

/// Finds the center `z*` with `f(z*) = c_f`, `g(z*) = c_g` by damped Newton
/// iteration from a 32×32 grid of starts, and returns the closed orbit
/// `circle_orbit(z*, E, 0)`. The first convergent root (in deterministic
/// grid order) wins; all convergent roots are compared for uniqueness.
pub fn locate_closed_trajectory(
    c_f: f64,
    c_g: f64,
    f: &Observable,
    g: &Observable,
    e: f64,
) -> Result<LocatedOrbit> {
    if !(e > 0.0) {
        return Err(Error::NonpositiveEnergy { energy: e });
    }
    if e >= 0.5 {
        return Err(Error::OutOfRegime { energy: e });
    }
    let group = f.group().or_else(|| g.group());
    let grid_n = 32;
    let scale = 1.0 + c_f.abs() + c_g.abs();
    let tol = 1e-12 * scale;
    let fd_h = 1e-6;

    let mut converged: Vec<DiskPoint> = Vec::new();
    let mut sigma_at_first: Option<f64> = None;

    for j in 0..grid_n {
        for i in 0..grid_n {
            let re = -0.9 + 1.8 * (i as f64 + 0.5) / grid_n as f64;
            let im = -0.9 + 1.8 * (j as f64 + 0.5) / grid_n as f64;
            let Ok(start) = DiskPoint::new(re, im) else {
                continue;
            };
            if start.norm() > 0.9 {
                continue;
            }
            if let Some(gr) = group {
                if !gr.is_in_dirichlet_domain(start) {
                    continue;
                }
            }
            if let Some((root, sigma)) = newton_2d(c_f, c_g, f, g, start, tol, fd_h) {
                let reduced = match group {
                    Some(gr) => reduce(root, gr)?.representative,
                    None => root,
                };
                if sigma_at_first.is_none() {
                    sigma_at_first = Some(sigma);
                }
                converged.push(reduced);
            }
        }
    }

    if converged.is_empty() {
        return Err(Error::RootNotFound);
    }
    let sigma = sigma_at_first.expect("set with first root");
    if sigma < INDEPENDENCE_SIGMA_MIN {
        return Err(Error::DegenerateLevel { sigma_min: sigma });
    }

    let metric = |a: DiskPoint, b: DiskPoint| -> f64 {
        match group {
            Some(gr) => local_quotient_distance(a, b, gr),
            None => distance(a, b),
        }
    };
    let mut max_separation = 0.0_f64;
    for i in 0..converged.len() {
        for j in (i + 1)..converged.len() {
            max_separation = max_separation.max(metric(converged[i], converged[j]));
        }
    }
    let mut distinct: Vec<DiskPoint> = Vec::new();
    for &root in &converged {
        if distinct.iter().all(|&r| metric(r, root) > 1e-8) {
            distinct.push(root);
        }
    }
    let orbit = circle_orbit(converged[0], e, 0.0)?;
    Ok(LocatedOrbit {
        orbit,
        roots: distinct,
        max_root_separation: max_separation,
    })
}

/// Damped Newton for `(f − c_f, g − c_g) = 0`. Returns the root and the
/// smallest singular value of the finite-difference Jacobian at it.
fn newton_2d(
    c_f: f64,
    c_g: f64,
    f: &Observable,
    g: &Observable,
    start: DiskPoint,
    tol: f64,
    h: f64,
) -> Option<(DiskPoint, f64)> {
    let residual = |z: DiskPoint| -> Option<(f64, f64)> {
        Some((f.eval(z).ok()? - c_f, g.eval(z).ok()? - c_g))
    };
    let mut z = start;
    let (mut rf, mut rg) = residual(z)?;
    for _ in 0..60 {
        let norm = rf.hypot(rg);
        if norm < tol {
            let jac = jacobian_2d(f, g, z, h)?;
            return Some((z, sigma_min(jac)));
        }
        let jac = jacobian_2d(f, g, z, h)?;
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-14 {
            return None;
        }
        let step_re = (jac[1][1] * rf - jac[0][1] * rg) / det;
        let step_im = (jac[0][0] * rg - jac[1][0] * rf) / det;
        // Damping: halve the step until the residual decreases.
        let mut alpha = 1.0;
        let mut advanced = false;
        for _ in 0..12 {
            let candidate = DiskPoint::new(z.re() - alpha * step_re, z.im() - alpha * step_im);
            if let Ok(c) = candidate {
                if c.norm() <= 0.995 {
                    if let Some((nf, ng)) = residual(c) {
                        if nf.hypot(ng) < norm {
                            z = c;
                            rf = nf;
                            rg = ng;
                            advanced = true;
                            break;
                        }
                    }
                }
            }
            alpha *= 0.5;
        }
        if !advanced {
            return None;
        }
    }
    None
}

fn jacobian_2d(f: &Observable, g: &Observable, z: DiskPoint, h: f64) -> Option<[[f64; 2]; 2]> {
    let eval = |obs: &Observable, re: f64, im: f64| -> Option<f64> {
        obs.eval(DiskPoint::new(re, im).ok()?).ok()
    };
    let d = |obs: &Observable| -> Option<(f64, f64)> {
        let dx = (eval(obs, z.re() + h, z.im())? - eval(obs, z.re() - h, z.im())?) / (2.0 * h);
        let dy = (eval(obs, z.re(), z.im() + h)? - eval(obs, z.re(), z.im() - h)?) / (2.0 * h);
        Some((dx, dy))
    };
    let (fx, fy) = d(f)?;
    let (gx, gy) = d(g)?;
    Some([[fx, fy], [gx, gy]])
}

/// Smallest singular value of a 2×2 matrix.
fn sigma_min(m: [[f64; 2]; 2]) -> f64 {
    let frob_sq = m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let gap = (frob_sq * frob_sq - 4.0 * det * det).max(0.0).sqrt();
    (0.5 * (frob_sq - gap)).max(0.0).sqrt()
}

/// A one-parameter family of states: fixed position and chart direction,
/// momentum scaled to the requested energy.
#[derive(Debug, Clone, Copy)]
pub struct StateFamily {
    pub position: DiskPoint,
    pub direction: f64,
}

impl StateFamily {
    pub fn state_at_energy(&self, e: f64) -> Result<PhaseState> {
        PhaseState::with_energy_direction(self.position, e, self.direction)
    }
}

/// Samples `E ↦ I_f` along the family over the energy grid. The entire grid
/// must stay strictly below the critical level.
pub fn integral_energy_dependence(
    family: &StateFamily,
    f: &Observable,
    e_grid: &[f64],
) -> Result<Vec<f64>> {
    for &e in e_grid {
        if !(e > 0.0) {
            return Err(Error::NonpositiveEnergy { energy: e });
        }
        if e >= 0.5 {
            return Err(Error::OutOfRegime { energy: e });
        }
    }
    e_grid
        .iter()
        .map(|&e| integral_value(&family.state_at_energy(e)?, f))
        .collect()
}
