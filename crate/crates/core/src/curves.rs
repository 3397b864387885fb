//! Constant-geodesic-curvature curves on the disk: classification, exact
//! closed orbits below the critical energy, and the hyperbolic-center
//! construction.
//!
//! For the unit-strength field, trajectories at energy `E` have geodesic
//! curvature `k_g = 1/√(2E)` and fall into four classes: geodesics
//! (`k_g = 0`), hypercycles (`0 < k_g < 1`), horocycles (`k_g = 1`) and
//! hyperbolic circles (`k_g > 1`). Below `E = 1/2` every orbit is a closed
//! hyperbolic circle of radius `ρ` with `coth ρ = k_g`, traversed clockwise,
//! and its center is a constant of the motion.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flow::{FieldStrength, PhaseState};
use crate::hyperbolic::{DiskPoint, MobiusTransform};

/// Half-width of the band around threshold curvature values (0 and 1)
/// classified as the degenerate classes.
pub const CURVATURE_CLASS_TOL: f64 = 1e-9;

/// Relative tolerance for the declared-vs-actual energy consistency check.
pub const ENERGY_CONSISTENCY_TOL: f64 = 1e-6;

/// The four classes of constant-geodesic-curvature curves on the disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveClass {
    Geodesic,
    Hypercycle,
    Horocycle,
    HyperbolicCircle,
}

impl CurveClass {
    /// Number of intersection/tangency points of the Euclidean
    /// representative with the unit circle.
    pub fn boundary_contacts(&self) -> u8 {
        match self {
            CurveClass::Geodesic | CurveClass::Hypercycle => 2,
            CurveClass::Horocycle => 1,
            CurveClass::HyperbolicCircle => 0,
        }
    }
}

impl std::fmt::Display for CurveClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            CurveClass::Geodesic => "Geodesic",
            CurveClass::Hypercycle => "Hypercycle",
            CurveClass::Horocycle => "Horocycle",
            CurveClass::HyperbolicCircle => "HyperbolicCircle",
        };
        f.write_str(name)
    }
}

/// Classifies by geodesic curvature. Thresholds 0 and 1 are recognized
/// within [`CURVATURE_CLASS_TOL`].
pub fn classify_by_curvature(k_g: f64) -> Result<CurveClass> {
    if k_g < 0.0 || !k_g.is_finite() {
        return Err(Error::NegativeCurvature { curvature: k_g });
    }
    if k_g <= CURVATURE_CLASS_TOL {
        Ok(CurveClass::Geodesic)
    } else if (k_g - 1.0).abs() <= CURVATURE_CLASS_TOL {
        Ok(CurveClass::Horocycle)
    } else if k_g < 1.0 {
        Ok(CurveClass::Hypercycle)
    } else {
        Ok(CurveClass::HyperbolicCircle)
    }
}

/// Geodesic curvature of the unit-field flow at energy `E`: `k_g = 1/√(2E)`.
pub fn curvature_for_energy(e: f64) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::NonpositiveEnergy { energy: e });
    }
    Ok(1.0 / (2.0 * e).sqrt())
}

/// Classifies the unit-field flow at energy `E` via `k_g = 1/√(2E)`.
pub fn classify_by_energy(e: f64) -> Result<CurveClass> {
    classify_by_curvature(curvature_for_energy(e)?)
}

/// The isometry mapping `state.position` to the origin with the pushed
/// velocity pointing along +x.
pub(crate) fn normalizing_isometry(state: &PhaseState) -> Result<MobiusTransform> {
    if state.momentum().norm_sqr() == 0.0 {
        return Err(Error::ZeroMomentum);
    }
    let z = state.position();
    let translate = MobiusTransform::translation_to(z).inverse();
    let v0 = translate.push_tangent(z.as_complex(), state.momentum());
    // The covector and the velocity share their direction (the metric is
    // conformal), so the rotation angle can be read off the pushed momentum.
    Ok(MobiusTransform::rotation(-v0.arg()).compose(&translate))
}

fn check_energy(state: &PhaseState, e: f64) -> Result<f64> {
    let actual = state.energy();
    if (actual - e).abs() > ENERGY_CONSISTENCY_TOL * (1.0 + e.abs()) {
        return Err(Error::EnergyMismatch {
            expected: e,
            actual,
        });
    }
    Ok(actual)
}

/// Hyperbolic radius `ρ = arccoth(1/√(2E)) = arctanh(√(2E))` of the closed
/// orbit at subcritical energy.
pub fn orbit_radius(e: f64) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::NonpositiveEnergy { energy: e });
    }
    if e >= 0.5 {
        return Err(Error::OutOfRegime { energy: e });
    }
    Ok((2.0 * e).sqrt().atanh())
}

/// The flow-invariant hyperbolic center of the orbit through `state`.
///
/// The state is mapped to the origin with velocity along +x; there the
/// center sits at Euclidean `−i·tanh(ρ/2)` (90° clockwise of the velocity),
/// and is mapped back.
pub fn hyperbolic_center(state: &PhaseState, e: f64) -> Result<DiskPoint> {
    check_energy(state, e)?;
    let rho = orbit_radius(e)?;
    let m = normalizing_isometry(state)?;
    let center_normalized = Complex64::new(0.0, -(0.5 * rho).tanh());
    m.inverse().apply(DiskPoint::from_complex(center_normalized)?)
}

/// Exact closed orbit at subcritical energy: a hyperbolic circle traced
/// clockwise at constant speed `√(2E)`.
#[derive(Debug, Clone, Copy)]
pub struct CircleOrbit {
    center: DiskPoint,
    hyp_radius: f64,
    energy: f64,
    period: f64,
    phase: f64,
}

impl CircleOrbit {
    pub fn center(&self) -> DiskPoint {
        self.center
    }

    pub fn hyp_radius(&self) -> f64 {
        self.hyp_radius
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }
}

/// Builds the closed orbit with the given hyperbolic center, energy and
/// initial phase (the starting angle in the center-normalized chart).
pub fn circle_orbit(center: DiskPoint, e: f64, phase: f64) -> Result<CircleOrbit> {
    let rho = orbit_radius(e)?;
    let period = 2.0 * std::f64::consts::PI * rho.sinh() / (2.0 * e).sqrt();
    Ok(CircleOrbit {
        center,
        hyp_radius: rho,
        energy: e,
        period,
        phase,
    })
}

/// Recovers the exact orbit passing through `state` at `t = 0`.
pub fn orbit_from_state(state: &PhaseState) -> Result<CircleOrbit> {
    let e = state.energy();
    let center = hyperbolic_center(state, e)?;
    // Phase = angle of the state's position in the center-normalized chart.
    let to_center = MobiusTransform::translation_to(center);
    let q = to_center
        .inverse()
        .apply(state.position())?
        .as_complex();
    circle_orbit(center, e, q.arg())
}

/// Exact state of the closed orbit at time `t`.
pub fn orbit_state(orbit: &CircleOrbit, t: f64) -> Result<PhaseState> {
    let r_e = (0.5 * orbit.hyp_radius).tanh();
    let omega = 2.0 * std::f64::consts::PI / orbit.period;
    let theta = orbit.phase - omega * t;
    let q = Complex64::from_polar(r_e, theta);
    // Clockwise parametrization: dq/dt = −iω q.
    let q_dot = Complex64::new(0.0, -omega) * q;
    let m = MobiusTransform::translation_to(orbit.center);
    let z = m.apply(DiskPoint::from_complex(q)?)?;
    let v = m.push_tangent(q, q_dot);
    PhaseState::from_velocity(z, v)
}

/// Euclidean shape of a full constant-curvature curve in the disk chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EuclideanShape {
    Circle { center: (f64, f64), radius: f64 },
    Line { point: (f64, f64), direction: (f64, f64) },
}

impl EuclideanShape {
    /// Residual of internal tangency to the unit circle, `||c| + r − 1|`.
    /// Lines cannot be tangent; their residual is `1 − dist(0, line)` > 0.
    pub fn tangency_residual(&self) -> f64 {
        match self {
            EuclideanShape::Circle { center, radius } => {
                let c = (center.0 * center.0 + center.1 * center.1).sqrt();
                (c + radius - 1.0).abs()
            }
            EuclideanShape::Line { .. } => 1.0 - self.line_offset(),
        }
    }

    /// Residual of orthogonal crossing of the unit circle:
    /// `||c|² − r² − 1|` for circles, the distance from the origin for lines
    /// (diameters are the orthogonal lines).
    pub fn orthogonality_residual(&self) -> f64 {
        match self {
            EuclideanShape::Circle { center, radius } => {
                (center.0 * center.0 + center.1 * center.1 - radius * radius - 1.0).abs()
            }
            EuclideanShape::Line { .. } => self.line_offset(),
        }
    }

    fn line_offset(&self) -> f64 {
        match self {
            EuclideanShape::Line { point, direction } => {
                let norm = (direction.0 * direction.0 + direction.1 * direction.1).sqrt();
                (point.0 * direction.1 - point.1 * direction.0).abs() / norm
            }
            EuclideanShape::Circle { .. } => unreachable!(),
        }
    }
}

/// Euclidean representative of a full trajectory plus its contact data.
#[derive(Debug, Clone, Copy)]
pub struct EuclideanRepresentation {
    pub shape: EuclideanShape,
    pub boundary_contacts: u8,
    pub class: CurveClass,
}

/// Tolerance for tangency/orthogonality recognition in contact counting.
const CONTACT_TOL: f64 = 1e-9;

/// The Euclidean circle (or line) containing the full trajectory of the
/// flow with field `field` through `state` at energy `e`.
///
/// In the state-normalized chart the curve is a circle of Euclidean radius
/// `1/(2 k_g)` tangent to the velocity at the origin and curving clockwise
/// (a diameter when `k_g = 0`); mapping three of its points back and fitting
/// recovers the representative in the original chart.
pub fn euclidean_representation(
    state: &PhaseState,
    e: f64,
    field: FieldStrength,
) -> Result<EuclideanRepresentation> {
    check_energy(state, e)?;
    if !(e > 0.0) {
        return Err(Error::NonpositiveEnergy { energy: e });
    }
    let k_g = field.strength() / (2.0 * e).sqrt();
    let m_inv = normalizing_isometry(state)?.inverse();

    // Three well-separated points on the normalized curve, close enough to
    // the origin to stay strictly inside the disk.
    let pts_normalized: [Complex64; 3] = if k_g <= CURVATURE_CLASS_TOL {
        [
            Complex64::new(-0.2, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.2, 0.0),
        ]
    } else {
        let r_e = 1.0 / (2.0 * k_g);
        let center = Complex64::new(0.0, -r_e);
        let delta = (0.25 / r_e).min(1.0);
        let angle = std::f64::consts::FRAC_PI_2;
        [
            center + Complex64::from_polar(r_e, angle - delta),
            center + Complex64::from_polar(r_e, angle),
            center + Complex64::from_polar(r_e, angle + delta),
        ]
    };
    let p: Vec<Complex64> = pts_normalized
        .iter()
        .map(|q| m_inv.apply_complex(*q))
        .collect();

    let shape = fit_circle_through(p[0], p[1], p[2]);
    let boundary_contacts = match shape {
        EuclideanShape::Line { .. } => 2,
        EuclideanShape::Circle { center, radius } => {
            let c = (center.0 * center.0 + center.1 * center.1).sqrt();
            let outer = c + radius - 1.0;
            if outer < -CONTACT_TOL {
                0
            } else if outer.abs() <= CONTACT_TOL {
                1
            } else {
                2
            }
        }
    };
    let class = match boundary_contacts {
        0 => CurveClass::HyperbolicCircle,
        1 => CurveClass::Horocycle,
        _ => {
            let scale = match shape {
                EuclideanShape::Circle { radius, .. } => 1.0 + radius * radius,
                EuclideanShape::Line { .. } => 1.0,
            };
            if shape.orthogonality_residual() <= CONTACT_TOL * scale {
                CurveClass::Geodesic
            } else {
                CurveClass::Hypercycle
            }
        }
    };
    Ok(EuclideanRepresentation {
        shape,
        boundary_contacts,
        class,
    })
}

/// Circumcircle through three points; a line if they are collinear.
fn fit_circle_through(p1: Complex64, p2: Complex64, p3: Complex64) -> EuclideanShape {
    let d21 = p2 - p1;
    let d31 = p3 - p1;
    let cross = d21.re * d31.im - d21.im * d31.re;
    let scale = d21.norm() * d31.norm();
    if cross.abs() <= 1e-12 * scale.max(1e-300) {
        let dir = d31 / d31.norm();
        return EuclideanShape::Line {
            point: (p1.re, p1.im),
            direction: (dir.re, dir.im),
        };
    }
    let s21 = 0.5 * (p2.norm_sqr() - p1.norm_sqr());
    let s31 = 0.5 * (p3.norm_sqr() - p1.norm_sqr());
    let cx = (s21 * d31.im - s31 * d21.im) / cross;
    let cy = (s31 * d21.re - s21 * d31.re) / cross;
    let radius = ((p1.re - cx).powi(2) + (p1.im - cy).powi(2)).sqrt();
    EuclideanShape::Circle {
        center: (cx, cy),
        radius,
    }
}
