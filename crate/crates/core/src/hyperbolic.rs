//! Poincaré-disk geometry of constant curvature −1 and its isometry group.
//!
//! The disk `D = {|z| < 1}` carries the conformal metric `ds² = λ(z)²(dx² + dy²)`
//! with `λ(z) = 2/(1 − |z|²)`, normalized so the Gaussian curvature is exactly −1.
//! Orientation-preserving isometries are the Möbius maps
//! `z ↦ (a z + b)/(b̄ z + ā)` with `|a|² − |b|² = 1`, identified up to overall sign.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Distance from `|z| = 1` below which conformal quantities are refused.
pub const BOUNDARY_MARGIN: f64 = 1e-12;

/// Tolerance on the `|a|² − |b|² = 1` constraint.
pub const SU11_TOL: f64 = 1e-12;

/// A point of the open unit disk model of the hyperbolic plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint {
    z: Complex64,
}

impl DiskPoint {
    /// Validates strict disk membership `re² + im² < 1`.
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(re * re + im * im < 1.0) {
            return Err(Error::OutsideDisk { re, im });
        }
        Ok(Self {
            z: Complex64::new(re, im),
        })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn origin() -> Self {
        Self {
            z: Complex64::new(0.0, 0.0),
        }
    }

    pub fn re(&self) -> f64 {
        self.z.re
    }

    pub fn im(&self) -> f64 {
        self.z.im
    }

    pub fn as_complex(&self) -> Complex64 {
        self.z
    }

    /// Euclidean norm `|z|`.
    pub fn norm(&self) -> f64 {
        self.z.norm()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.z.norm_sqr()
    }
}

/// An element of SU(1,1)/±1 acting as an orientation-preserving isometry
/// of the disk. Stored as the first row `(a, b)` of the matrix
/// `[[a, b], [b̄, ā]]`; the value is identified with its negative.
#[derive(Debug, Clone, Copy)]
pub struct MobiusTransform {
    a: Complex64,
    b: Complex64,
}

impl MobiusTransform {
    /// Validates the SU(1,1) condition `|a|² − |b|² = 1` within [`SU11_TOL`].
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let residual = (a.norm_sqr() - b.norm_sqr() - 1.0).abs();
        if residual > SU11_TOL {
            return Err(Error::NotUnitDeterminant { residual });
        }
        Ok(Self { a, b })
    }

    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// Rotation by `theta` about the origin: `z ↦ e^{iθ} z`.
    pub fn rotation(theta: f64) -> Self {
        Self {
            a: Complex64::from_polar(1.0, 0.5 * theta),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// Hyperbolic translation along the positive real axis with translation
    /// length `length`: `a = cosh(ℓ/2)`, `b = sinh(ℓ/2)`.
    pub fn translation_along_x(length: f64) -> Self {
        let half = 0.5 * length;
        Self {
            a: Complex64::new(half.cosh(), 0.0),
            b: Complex64::new(half.sinh(), 0.0),
        }
    }

    /// The isometry mapping the origin to `c`: `z ↦ (z + c)/(1 + c̄ z)`.
    pub fn translation_to(c: DiskPoint) -> Self {
        let scale = 1.0 / (1.0 - c.norm_sqr()).sqrt();
        Self {
            a: Complex64::new(scale, 0.0),
            b: c.as_complex() * scale,
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// Residual of the SU(1,1) determinant condition.
    pub fn det_residual(&self) -> f64 {
        (self.a.norm_sqr() - self.b.norm_sqr() - 1.0).abs()
    }

    /// Matrix trace `a + ā = 2 Re a`; real for this group realization.
    pub fn trace(&self) -> f64 {
        2.0 * self.a.re
    }

    /// Applies the transform without disk validation. Used internally and for
    /// curve fitting where arguments may lie outside the closed disk.
    pub fn apply_complex(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }

    /// Applies the isometry to a disk point.
    pub fn apply(&self, z: DiskPoint) -> Result<DiskPoint> {
        let denom = self.b.conj() * z.as_complex() + self.a.conj();
        let magnitude = denom.norm();
        if magnitude < 1e-12 {
            return Err(Error::NumericDegeneracy { magnitude });
        }
        let w = (self.a * z.as_complex() + self.b) / denom;
        // Guard against roundoff pushing a near-boundary image onto |w| = 1.
        if w.norm_sqr() >= 1.0 {
            let n = w.norm();
            return DiskPoint::from_complex(w / n * (1.0 - BOUNDARY_MARGIN));
        }
        DiskPoint::from_complex(w)
    }

    /// Group law `self ∘ other` as a renormalized matrix product.
    pub fn compose(&self, other: &Self) -> Self {
        let a = self.a * other.a + self.b * other.b.conj();
        let b = self.a * other.b + self.b * other.a.conj();
        // Renormalize so |a|² − |b|² = 1 survives arbitrarily long products.
        let det = a.norm_sqr() - b.norm_sqr();
        let scale = 1.0 / det.sqrt();
        Self {
            a: a * scale,
            b: b * scale,
        }
    }

    /// Inverse element: `(a, b) ↦ (ā, −b)`.
    pub fn inverse(&self) -> Self {
        Self {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    /// Complex derivative `m'(z) = 1/(b̄ z + ā)²` of the holomorphic action.
    pub fn derivative_at(&self, z: Complex64) -> Complex64 {
        let denom = self.b.conj() * z + self.a.conj();
        1.0 / (denom * denom)
    }

    /// Pushforward of a tangent vector at `z`: `v ↦ m'(z) v`.
    pub fn push_tangent(&self, z: Complex64, v: Complex64) -> Complex64 {
        self.derivative_at(z) * v
    }

    /// Pushforward of a covector at `z`: `p ↦ p / conj(m'(z))`.
    pub fn push_covector(&self, z: Complex64, p: Complex64) -> Complex64 {
        let denom = self.b.conj() * z + self.a.conj();
        p * (denom.conj() * denom.conj())
    }

    /// Max-norm distance between the matrix entries of `self` and `other`,
    /// minimized over the overall ±1 ambiguity.
    pub fn distance_up_to_sign(&self, other: &Self) -> f64 {
        let plus = (self.a - other.a).norm().max((self.b - other.b).norm());
        let minus = (self.a + other.a).norm().max((self.b + other.b).norm());
        plus.min(minus)
    }

    /// Equality modulo the ±1 matrix ambiguity.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.distance_up_to_sign(other) <= tol
    }
}

/// Conformal factor `λ(z) = 2/(1 − |z|²)` of the curvature −1 disk metric.
pub fn conformal_factor(z: DiskPoint) -> Result<f64> {
    let norm = z.norm();
    if norm >= 1.0 - BOUNDARY_MARGIN {
        return Err(Error::BoundaryProximity { radius: norm });
    }
    Ok(2.0 / (1.0 - z.norm_sqr()))
}

/// The metric evaluated at a point: `ds² = λ²(dx² + dy²)` with
/// `λ = 2/(1 − |z|²) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricData {
    position: DiskPoint,
    conformal_factor: f64,
}

impl MetricData {
    pub fn at(position: DiskPoint) -> Result<Self> {
        Ok(Self {
            position,
            conformal_factor: conformal_factor(position)?,
        })
    }

    pub fn position(&self) -> DiskPoint {
        self.position
    }

    pub fn conformal_factor(&self) -> f64 {
        self.conformal_factor
    }

    /// Squared length of a chart tangent vector in this metric.
    pub fn squared_length(&self, v: Complex64) -> f64 {
        self.conformal_factor * self.conformal_factor * v.norm_sqr()
    }
}

/// Hyperbolic distance `d(z, w) = 2 arctanh |(z − w)/(1 − z̄ w)|`.
pub fn distance(z: DiskPoint, w: DiskPoint) -> f64 {
    let zc = z.as_complex();
    let wc = w.as_complex();
    let num = (zc - wc).norm();
    let den = (Complex64::new(1.0, 0.0) - zc.conj() * wc).norm();
    2.0 * (num / den).atanh()
}

/// Finite-difference estimate of the Gaussian curvature
/// `K = −Δ(log λ)/λ²` at `z`, using a 5-point stencil of half-width `h`.
///
/// Returns −1 up to O(h²) truncation for the adopted metric.
pub fn gaussian_curvature_check(z: DiskPoint, h: f64) -> Result<f64> {
    if z.norm() + 2.0 * h >= 1.0 {
        return Err(Error::StencilExitsDisk {
            re: z.re(),
            im: z.im(),
            h,
        });
    }
    let log_lambda = |re: f64, im: f64| -> Result<f64> {
        Ok(conformal_factor(DiskPoint::new(re, im)?)?.ln())
    };
    let center = log_lambda(z.re(), z.im())?;
    let laplacian = (log_lambda(z.re() + h, z.im())?
        + log_lambda(z.re() - h, z.im())?
        + log_lambda(z.re(), z.im() + h)?
        + log_lambda(z.re(), z.im() - h)?
        - 4.0 * center)
        / (h * h);
    let lambda = conformal_factor(z)?;
    Ok(-laplacian / (lambda * lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(actual: f64, expected: f64, tol: f64, label: &str) {
        assert!(
            (actual - expected).abs() <= tol,
            "{label}: got {actual}, expected {expected} (tol {tol})"
        );
    }

    #[test]
    fn conformal_factor_reference_values() {
        let origin = DiskPoint::origin();
        assert_close(conformal_factor(origin).unwrap(), 2.0, 0.0, "lambda(0)");

        let half = DiskPoint::new(0.5, 0.0).unwrap();
        assert_close(
            conformal_factor(half).unwrap(),
            8.0 / 3.0,
            1e-15,
            "lambda(0.5)",
        );

        let near = DiskPoint::new(0.99, 0.0).unwrap();
        assert_close(
            conformal_factor(near).unwrap(),
            2.0 / (1.0 - 0.99 * 0.99),
            1e-10,
            "lambda(0.99)",
        );
    }

    #[test]
    fn conformal_factor_rejects_boundary_shell() {
        let z = DiskPoint::new(1.0 - 1e-13, 0.0).unwrap();
        assert!(matches!(
            conformal_factor(z),
            Err(Error::BoundaryProximity { .. })
        ));
    }

    #[test]
    fn disk_point_rejects_exterior() {
        assert!(DiskPoint::new(1.0, 0.0).is_err());
        assert!(DiskPoint::new(0.8, 0.7).is_err());
        assert!(DiskPoint::new(f64::NAN, 0.0).is_err());
    }

    /// Independent oracle: the distance d(0, r) as the numeric line integral
    /// of the conformal factor along the radius (composite Simpson rule).
    fn radial_distance_quadrature(r: f64) -> f64 {
        let n = 2000;
        let h = r / n as f64;
        let f = |t: f64| 2.0 / (1.0 - t * t);
        let mut acc = f(0.0) + f(r);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(k as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn distance_matches_metric_line_integral() {
        // d(0, 0.5) = 2 arctanh(1/2) = ln 3, cross-checked by quadrature.
        let oracle = radial_distance_quadrature(0.5);
        assert_close(oracle, 3.0_f64.ln(), 1e-12, "quadrature oracle vs ln 3");

        let d = distance(DiskPoint::origin(), DiskPoint::new(0.5, 0.0).unwrap());
        assert_close(d, oracle, 1e-12, "distance vs quadrature");
        assert_close(d, 1.0986122886681098, 1e-14, "distance vs ln 3");
    }

    #[test]
    fn distance_is_zero_on_diagonal_and_symmetric() {
        let z = DiskPoint::new(0.3, -0.4).unwrap();
        let w = DiskPoint::new(-0.1, 0.7).unwrap();
        assert_eq!(distance(z, z), 0.0);
        assert_close(distance(z, w), distance(w, z), 1e-15, "symmetry");
        assert!(distance(z, w) > 0.0);
    }

    #[test]
    fn distance_is_rotation_invariant_from_origin() {
        // d(0, w) depends only on |w|: compare w with a rotated copy.
        let w = DiskPoint::new(0.3, 0.4).unwrap();
        let m = MobiusTransform::rotation(1.2345);
        let w2 = m.apply(w).unwrap();
        assert_close(
            distance(DiskPoint::origin(), w),
            distance(DiskPoint::origin(), w2),
            1e-15,
            "rotational symmetry",
        );
    }

    #[test]
    fn mobius_identity_fixes_points() {
        let id = MobiusTransform::identity();
        let z = DiskPoint::new(0.25, -0.6).unwrap();
        let w = id.apply(z).unwrap();
        assert_eq!(w, z);
    }

    #[test]
    fn mobius_maps_origin_to_b_over_conj_a() {
        // a = √2, b = 1 satisfies 2 − 1 = 1; image of 0 is 1/√2.
        let m = MobiusTransform::new(
            Complex64::new(2.0_f64.sqrt(), 0.0),
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        let w = m.apply(DiskPoint::origin()).unwrap();
        assert_close(w.re(), 1.0 / 2.0_f64.sqrt(), 1e-15, "image re");
        assert_close(w.im(), 0.0, 1e-15, "image im");
    }

    #[test]
    fn mobius_inverse_formula() {
        let m = MobiusTransform::new(
            Complex64::new(2.0_f64.sqrt(), 0.0),
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        let inv = m.inverse();
        assert_close(inv.a().re, 2.0_f64.sqrt(), 1e-15, "inverse a");
        assert_close(inv.b().re, -1.0, 1e-15, "inverse b");

        let id = MobiusTransform::identity();
        assert!(m.compose(&inv).approx_eq(&id, 1e-15));
        assert!(id.inverse().approx_eq(&id, 0.0));
    }

    #[test]
    fn mobius_rejects_bad_determinant() {
        let err = MobiusTransform::new(Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0));
        assert!(matches!(err, Err(Error::NotUnitDeterminant { .. })));
    }

    #[test]
    fn translation_to_moves_origin() {
        let c = DiskPoint::new(0.3, -0.2).unwrap();
        let m = MobiusTransform::translation_to(c);
        let image = m.apply(DiskPoint::origin()).unwrap();
        assert_close(image.re(), c.re(), 1e-15, "translation re");
        assert_close(image.im(), c.im(), 1e-15, "translation im");
    }

    #[test]
    fn curvature_is_minus_one_at_reference_points() {
        let k0 = gaussian_curvature_check(DiskPoint::origin(), 1e-3).unwrap();
        assert_close(k0, -1.0, 1e-6, "K at origin");

        // Away from the origin the O(h²) truncation constant grows, so the
        // stencil tightens to hold the same tolerance.
        let k_half = gaussian_curvature_check(DiskPoint::new(0.5, 0.0).unwrap(), 2e-4).unwrap();
        assert_close(k_half, -1.0, 1e-6, "K at 0.5");

        let k_generic =
            gaussian_curvature_check(DiskPoint::new(-0.35, 0.62).unwrap(), 1e-4).unwrap();
        assert_close(k_generic, -1.0, 1e-6, "K at generic point");
    }

    #[test]
    fn metric_data_matches_conformal_factor() {
        let z = DiskPoint::new(0.5, 0.0).unwrap();
        let metric = MetricData::at(z).unwrap();
        assert_eq!(metric.conformal_factor(), conformal_factor(z).unwrap());
        assert!(metric.conformal_factor() > 0.0);
        // |v|² in the metric at the origin: λ = 2 doubles lengths.
        let origin = MetricData::at(DiskPoint::origin()).unwrap();
        assert_close(
            origin.squared_length(Complex64::new(0.5, 0.0)),
            1.0,
            1e-15,
            "metric length",
        );
    }

    #[test]
    fn curvature_stencil_domain_guard() {
        let z = DiskPoint::new(0.9999, 0.0).unwrap();
        assert!(matches!(
            gaussian_curvature_check(z, 1e-3),
            Err(Error::StencilExitsDisk { .. })
        ));
    }

    #[test]
    fn covector_pushforward_preserves_pairing() {
        // Pairing p·v = Re(p̄ v) is invariant under (v, p) ↦ (m'v, p/conj(m')).
        let b = Complex64::new(0.5, -0.25);
        let a = Complex64::from_polar((1.0 + b.norm_sqr()).sqrt(), 0.7);
        let m = MobiusTransform::new(a, b).unwrap();
        let z = Complex64::new(0.2, 0.1);
        let v = Complex64::new(0.4, -0.3);
        let p = Complex64::new(-0.9, 0.2);
        let before = (p.conj() * v).re;
        let after = (m.push_covector(z, p).conj() * m.push_tangent(z, v)).re;
        assert_close(after, before, 1e-12, "pairing invariance");
    }
}
