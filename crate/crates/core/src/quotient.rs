//! The compact genus-2 surface as the quotient of the disk by the
//! regular-octagon Fuchsian group.
//!
//! The group is generated by four hyperbolic translations
//! `g_k = R_k T R_k⁻¹`, where `R_k` is the Euclidean rotation by `kπ/4` and
//! `T` translates along the real axis with `cosh(ℓ/2) = 1 + √2`. Opposite
//! sides of the regular octagon (all vertex angles `π/4`) are paired, and
//! the single defining relation is the alternating word
//! `g₀ g₁⁻¹ g₂ g₃⁻¹ g₀⁻¹ g₁ g₂⁻¹ g₃ = ±1`.
//!
//! Reduction to the Dirichlet fundamental domain centered at the origin is
//! greedy nearest-point descent over the eight side pairings; integration
//! always happens on the cover and is pushed down for output.

use num_complex::Complex64;

use crate::error::Result;
use crate::flow::{step, FieldStrength, PhaseState, TimedState, Trajectory};
use crate::hyperbolic::{distance, DiskPoint, MobiusTransform};

/// Tolerance on the relator's distance to ±identity.
pub const RELATOR_TOL: f64 = 1e-10;

/// One letter of a word in the group generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenStep {
    /// Generator index in `0..4`.
    pub index: usize,
    /// Whether the inverse generator is meant.
    pub inverse: bool,
}

impl std::fmt::Display for GenStep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.inverse {
            write!(f, "g{}^-1", self.index)
        } else {
            write!(f, "g{}", self.index)
        }
    }
}

/// The genus-2 octagon group: four generators, their inverses, and the
/// length-8 relator.
#[derive(Debug, Clone)]
pub struct FuchsianGroup {
    generators: [MobiusTransform; 4],
    inverses: [MobiusTransform; 4],
    relator_residual: f64,
}

/// The defining relation, as a word applied left factor first:
/// `g₀ g₁⁻¹ g₂ g₃⁻¹ g₀⁻¹ g₁ g₂⁻¹ g₃`.
pub const RELATOR_WORD: [GenStep; 8] = [
    GenStep { index: 0, inverse: false },
    GenStep { index: 1, inverse: true },
    GenStep { index: 2, inverse: false },
    GenStep { index: 3, inverse: true },
    GenStep { index: 0, inverse: true },
    GenStep { index: 1, inverse: false },
    GenStep { index: 2, inverse: true },
    GenStep { index: 3, inverse: false },
];

impl FuchsianGroup {
    /// Builds the regular-octagon group and validates it: SU(1,1) residuals,
    /// hyperbolic traces, and the relator within [`RELATOR_TOL`] of ±identity.
    pub fn genus2_octagon() -> Self {
        let sqrt2 = std::f64::consts::SQRT_2;
        let a = 1.0 + sqrt2; // cosh(ℓ/2)
        let b = (2.0 + 2.0 * sqrt2).sqrt(); // sinh(ℓ/2)
        let generators = std::array::from_fn(|k| {
            let phase = k as f64 * std::f64::consts::FRAC_PI_4;
            MobiusTransform::new(Complex64::new(a, 0.0), Complex64::from_polar(b, phase))
                .expect("octagon generator satisfies |a|^2 - |b|^2 = 1 exactly")
        });
        let inverses = std::array::from_fn(|k: usize| generators[k].inverse());
        let group = Self {
            generators,
            inverses,
            relator_residual: 0.0,
        };
        let residual = group
            .relator()
            .distance_up_to_sign(&MobiusTransform::identity());
        assert!(
            residual < RELATOR_TOL,
            "octagon relator residual {residual:.3e} exceeds {RELATOR_TOL:.0e}"
        );
        for g in &group.generators {
            debug_assert!(g.det_residual() < 1e-12);
            debug_assert!(g.trace().abs() > 2.0, "generators must be hyperbolic");
        }
        Self {
            relator_residual: residual,
            ..group
        }
    }

    pub fn generators(&self) -> &[MobiusTransform; 4] {
        &self.generators
    }

    /// The transform named by a word letter.
    pub fn element(&self, step: GenStep) -> &MobiusTransform {
        if step.inverse {
            &self.inverses[step.index]
        } else {
            &self.generators[step.index]
        }
    }

    /// Evaluates a word as an action on points: the first letter in the
    /// slice is applied first (matching [`Reduction::word`] order), so the
    /// matrix product runs in reverse slice order.
    pub fn evaluate_word(&self, word: &[GenStep]) -> MobiusTransform {
        word.iter().fold(MobiusTransform::identity(), |acc, &s| {
            self.element(s).compose(&acc)
        })
    }

    /// The relator word evaluated as a matrix; equals ±identity.
    pub fn relator(&self) -> MobiusTransform {
        // Evaluated as a left-to-right product g₀·g₁⁻¹·…, i.e. the first
        // letter is the leftmost matrix factor.
        RELATOR_WORD
            .iter()
            .fold(MobiusTransform::identity(), |acc, &s| {
                acc.compose(self.element(s))
            })
    }

    pub fn relator_residual(&self) -> f64 {
        self.relator_residual
    }

    /// The eight side-pairing candidates in the deterministic descent order
    /// `g₀, g₁, g₂, g₃, g₀⁻¹, g₁⁻¹, g₂⁻¹, g₃⁻¹`.
    pub fn side_pairings(&self) -> impl Iterator<Item = (GenStep, &MobiusTransform)> {
        (0..8).map(move |j| {
            let step = GenStep {
                index: j % 4,
                inverse: j >= 4,
            };
            (step, self.element(step))
        })
    }

    /// Whether `z` lies in the closed Dirichlet domain centered at the
    /// origin (within slack 1e−12 on squared Euclidean radii; `d(0,·)` is
    /// monotone in `|·|`, so radii compare like distances).
    pub fn is_in_dirichlet_domain(&self, z: DiskPoint) -> bool {
        let r_sq = z.norm_sqr();
        self.side_pairings().all(|(_, g)| {
            g.apply_complex(z.as_complex()).norm_sqr() >= r_sq - 1e-12
        })
    }
}

/// Result of reducing a point to the fundamental domain.
#[derive(Debug, Clone)]
pub struct Reduction {
    /// Representative in the closed Dirichlet domain.
    pub representative: DiskPoint,
    /// The letters applied, in application order.
    pub word: Vec<GenStep>,
    /// The composed isometry carrying the input to the representative.
    pub transform: MobiusTransform,
}

/// Hard cap on descent steps; geometric termination keeps real runs far
/// below it (a point at |z| = 0.999 reduces in a handful of steps).
const MAX_REDUCE_STEPS: usize = 10_000;

/// Reduces `z` to the Dirichlet domain by greedy nearest-point descent over
/// the eight side pairings. Ties are broken by the lowest candidate index,
/// which makes the word deterministic.
pub fn reduce(z: DiskPoint, group: &FuchsianGroup) -> Result<Reduction> {
    let mut current = z;
    let mut word = Vec::new();
    let mut transform = MobiusTransform::identity();
    for _ in 0..MAX_REDUCE_STEPS {
        let r_sq = current.norm_sqr();
        let mut best: Option<(GenStep, f64)> = None;
        for (step, g) in group.side_pairings() {
            let candidate_sq = g.apply_complex(current.as_complex()).norm_sqr();
            let improves_best = match best {
                None => true,
                Some((_, b)) => candidate_sq < b - 1e-15,
            };
            if improves_best {
                best = Some((step, candidate_sq));
            }
        }
        match best {
            Some((step, candidate_sq)) if candidate_sq < r_sq - 1e-14 => {
                let g = *group.element(step);
                current = g.apply(current)?;
                transform = g.compose(&transform);
                word.push(step);
            }
            _ => break,
        }
    }
    Ok(Reduction {
        representative: current,
        word,
        transform,
    })
}

/// Reduces a phase-space state: the position by [`reduce`], the momentum by
/// the covector pushforward of the composed isometry. Energy is unchanged.
pub fn reduce_state(state: &PhaseState, group: &FuchsianGroup) -> Result<(PhaseState, Reduction)> {
    let reduction = reduce(state.position(), group)?;
    let reduced = if reduction.word.is_empty() {
        *state
    } else {
        state.transformed_by(&reduction.transform)?
    };
    Ok((reduced, reduction))
}

/// Pushes every sample of a cover trajectory down to the quotient.
pub fn project_trajectory(traj: &Trajectory, group: &FuchsianGroup) -> Result<Trajectory> {
    let mut samples = Vec::with_capacity(traj.len());
    for sample in traj.samples() {
        let (state, _) = reduce_state(&sample.state, group)?;
        samples.push(TimedState {
            t: sample.t,
            state,
        });
    }
    Ok(Trajectory::from_samples(samples, traj.step()))
}

/// Integrates on the cover, reducing the state to the fundamental domain
/// after every step. The returned samples live in the closed domain.
pub fn integrate_reduced(
    state: &PhaseState,
    total_time: f64,
    dt: f64,
    field: FieldStrength,
    group: &FuchsianGroup,
) -> Result<Trajectory> {
    if !(total_time > 0.0) {
        return Err(crate::error::Error::InvalidDuration { total_time });
    }
    if !(dt > 0.0) || dt > total_time {
        return Err(crate::error::Error::InvalidTimeStep { dt });
    }
    let steps = (total_time / dt).round().max(1.0) as usize;
    let (mut current, _) = reduce_state(state, group)?;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(TimedState {
        t: 0.0,
        state: current,
    });
    for k in 1..=steps {
        let advanced = step(&current, dt, field)?;
        let (reduced, _) = reduce_state(&advanced, group)?;
        current = reduced;
        samples.push(TimedState {
            t: k as f64 * dt,
            state: current,
        });
    }
    Ok(Trajectory::from_samples(samples, dt))
}

/// Distance in the quotient metric for points in or near the fundamental
/// domain: the minimum of `d(a, γ b)` over the identity and the eight side
/// pairings. Exact for nearby points; used by seam-continuity checks.
pub fn local_quotient_distance(a: DiskPoint, b: DiskPoint, group: &FuchsianGroup) -> f64 {
    let mut best = distance(a, b);
    for (_, g) in group.side_pairings() {
        if let Ok(gb) = g.apply(b) {
            best = best.min(distance(a, gb));
        }
    }
    best
}

/// Moves `neighbor` into the chart of `reference` by the group element that
/// brings it closest: the identity, a side pairing, or (near the octagon
/// vertices, where many copies meet) a product of two pairings. Used to
/// difference quotient trajectories across seams.
pub fn align_to_chart(
    reference: &PhaseState,
    neighbor: &PhaseState,
    group: &FuchsianGroup,
) -> Result<PhaseState> {
    let target = reference.position();
    let mut best_d = distance(target, neighbor.position());
    let mut best: Option<MobiusTransform> = None;
    for (_, g) in group.side_pairings() {
        let moved = g.apply(neighbor.position())?;
        let d = distance(target, moved);
        if d < best_d {
            best_d = d;
            best = Some(*g);
        }
    }
    // Vertex neighborhoods may need a length-2 word; only search them when
    // no single pairing brings the neighbor within one plausible step arc.
    if best_d > 0.05 {
        for (_, g1) in group.side_pairings() {
            for (_, g2) in group.side_pairings() {
                let composed = g1.compose(g2);
                let moved = composed.apply(neighbor.position())?;
                let d = distance(target, moved);
                if d < best_d {
                    best_d = d;
                    best = Some(composed);
                }
            }
        }
    }
    match best {
        Some(m) => neighbor.transformed_by(&m),
        None => Ok(*neighbor),
    }
}

/// One side of the octagon: the geodesic arc at hyperbolic distance `ℓ/2`
/// from the origin with outward normal at `normal_angle`.
#[derive(Debug, Clone, Copy)]
pub struct SideArc {
    pub normal_angle: f64,
    /// Euclidean center of the arc's circle (orthogonal to the unit circle).
    pub center: Complex64,
    pub radius: f64,
    /// Index of the opposite side this one is glued to.
    pub partner: usize,
    /// Letter mapping this side onto its partner.
    pub pairing: GenStep,
}

/// The Dirichlet domain of the octagon group: a regular hyperbolic octagon
/// with all vertex angles `π/4`, vertices at Euclidean radius `2^{-1/4}`.
#[derive(Debug, Clone)]
pub struct FundamentalDomain {
    vertices: [DiskPoint; 8],
    sides: [SideArc; 8],
}

impl FundamentalDomain {
    pub fn octagon() -> Self {
        let vertex_radius = 2.0_f64.powf(-0.25);
        let vertices = std::array::from_fn(|k| {
            let angle = std::f64::consts::FRAC_PI_8 + k as f64 * std::f64::consts::FRAC_PI_4;
            DiskPoint::from_complex(Complex64::from_polar(vertex_radius, angle))
                .expect("octagon vertices are interior points")
        });
        // Side arcs: the closest point to the origin sits at Euclidean
        // u = √(√2 − 1); the containing circle is orthogonal to ∂D with
        // center (1 + u²)/(2u) = √2/(2u) and radius (1 − u²)/(2u).
        let u = (std::f64::consts::SQRT_2 - 1.0).sqrt();
        let center_dist = std::f64::consts::SQRT_2 / (2.0 * u);
        let radius = (2.0 - std::f64::consts::SQRT_2) / (2.0 * u);
        let sides = std::array::from_fn(|k| {
            let normal_angle = k as f64 * std::f64::consts::FRAC_PI_4;
            SideArc {
                normal_angle,
                center: Complex64::from_polar(center_dist, normal_angle),
                radius,
                partner: (k + 4) % 8,
                pairing: GenStep {
                    index: k % 4,
                    // Side k (k < 4) is carried onto side k+4 by g_k⁻¹; the
                    // back side k+4 is carried forward by g_k.
                    inverse: k < 4,
                },
            }
        });
        Self { vertices, sides }
    }

    pub fn vertices(&self) -> &[DiskPoint; 8] {
        &self.vertices
    }

    pub fn sides(&self) -> &[SideArc; 8] {
        &self.sides
    }
}
