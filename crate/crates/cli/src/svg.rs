//! Static SVG rendering of the disk, the fundamental domain, and curves.
//!
//! The unit disk maps to a 1000×1000 viewBox with the y-axis flipped, so
//! clockwise orbits render clockwise on screen.

use std::fmt::Write as _;

use num_complex::Complex64;

use magdisk::hyperbolic::MobiusTransform;
use magdisk::quotient::{FuchsianGroup, FundamentalDomain};

use crate::output::SampleRecord;

const SIZE: f64 = 1000.0;

fn map_x(re: f64) -> f64 {
    0.5 * SIZE + 0.5 * SIZE * re
}

fn map_y(im: f64) -> f64 {
    0.5 * SIZE - 0.5 * SIZE * im
}

fn fmt(x: f64) -> String {
    format!("{x:.6}")
}

pub struct SvgBuilder {
    body: String,
}

impl Default for SvgBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl SvgBuilder {
    pub fn new() -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 1000 1000">"#
        );
        // The ideal boundary.
        let _ = writeln!(
            body,
            r#"  <circle cx="500" cy="500" r="500" fill="none" stroke="black" stroke-width="1.5"/>"#
        );
        Self { body }
    }

    /// Polyline through disk points.
    pub fn add_path(&mut self, points: &[Complex64], stroke: &str, width: f64) {
        if points.len() < 2 {
            return;
        }
        let mut d = String::new();
        for (i, p) in points.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{},{} ", fmt(map_x(p.re)), fmt(map_y(p.im)));
        }
        let _ = writeln!(
            self.body,
            r#"  <path d="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            d.trim_end()
        );
    }

    /// A Euclidean circle given in disk coordinates.
    pub fn add_circle(&mut self, center: Complex64, radius: f64, stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"  <circle cx="{}" cy="{}" r="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            fmt(map_x(center.re)),
            fmt(map_y(center.im)),
            fmt(0.5 * SIZE * radius),
        );
    }

    /// Outline of the fundamental octagon transported by `transform`.
    pub fn add_domain(&mut self, transform: &MobiusTransform, stroke: &str) {
        let domain = FundamentalDomain::octagon();
        let mut outline = Vec::new();
        for k in 0..8 {
            let side = &domain.sides()[k];
            let v1 = domain.vertices()[(k + 7) % 8].as_complex();
            let v2 = domain.vertices()[k].as_complex();
            let a1 = (v1 - side.center).arg();
            let a2 = (v2 - side.center).arg();
            let mut lo = a1;
            let mut hi = a2;
            if hi - lo > std::f64::consts::PI {
                hi -= 2.0 * std::f64::consts::PI;
            } else if lo - hi > std::f64::consts::PI {
                lo -= 2.0 * std::f64::consts::PI;
            }
            for i in 0..20 {
                let t = lo + (hi - lo) * i as f64 / 20.0;
                let point = side.center + Complex64::from_polar(side.radius, t);
                outline.push(transform.apply_complex(point));
            }
        }
        if let Some(first) = outline.first().copied() {
            outline.push(first);
        }
        self.add_path(&outline, stroke, 0.8);
    }

    /// The octagon tiling out to the given word depth (0 = just the domain).
    pub fn add_tiling(&mut self, group: &FuchsianGroup, depth: usize) {
        let mut elements = vec![MobiusTransform::identity()];
        let mut frontier = vec![MobiusTransform::identity()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for m in &frontier {
                for (_, g) in group.side_pairings() {
                    let candidate = m.compose(g);
                    if elements
                        .iter()
                        .all(|e| e.distance_up_to_sign(&candidate) > 1e-9)
                    {
                        elements.push(candidate);
                        next.push(candidate);
                    }
                }
            }
            frontier = next;
        }
        for m in &elements {
            self.add_domain(m, "#3366aa");
        }
    }

    /// Trajectory samples as a polyline, breaking the line at quotient seam
    /// jumps so reduced trajectories do not draw spurious chords.
    pub fn add_trajectory(&mut self, records: &[SampleRecord]) {
        let mut run: Vec<Complex64> = Vec::new();
        let mut prev: Option<Complex64> = None;
        // Downsample long runs; cap at ~4000 drawn points.
        let stride = (records.len() / 4000).max(1);
        for r in records.iter().step_by(stride) {
            let p = Complex64::new(r.re, r.im);
            if let Some(q) = prev {
                if (p - q).norm() > 0.1 {
                    self.add_path(&run, "#aa2222", 1.2);
                    run.clear();
                }
            }
            run.push(p);
            prev = Some(p);
        }
        self.add_path(&run, "#aa2222", 1.2);
    }

    /// Least-squares (Kåsa) circle fit through the sample positions; used to
    /// draw closed subcritical orbits as exact circle elements.
    pub fn add_fitted_orbit_circle(&mut self, records: &[SampleRecord]) {
        if let Some((center, radius)) = kasa_fit(records) {
            self.add_circle(center, radius, "#117733", 1.2);
        }
    }

    pub fn finish(mut self) -> String {
        let _ = writeln!(self.body, "</svg>");
        self.body
    }
}

/// Algebraic circle fit: minimizes Σ(|z − c|² − r²)² over (c, r).
fn kasa_fit(records: &[SampleRecord]) -> Option<(Complex64, f64)> {
    let n = records.len() as f64;
    if records.len() < 3 {
        return None;
    }
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut sxz, mut syz, mut sz) = (0.0, 0.0, 0.0);
    for r in records {
        let (x, y) = (r.re, r.im);
        let z = x * x + y * y;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        sxz += x * z;
        syz += y * z;
        sz += z;
    }
    // Normal equations for z = 2cx·x + 2cy·y + (r² − |c|²).
    let a = [
        [2.0 * sxx, 2.0 * sxy, sx],
        [2.0 * sxy, 2.0 * syy, sy],
        [2.0 * sx, 2.0 * sy, n],
    ];
    let b = [sxz, syz, sz];
    let det3 = |m: &[[f64; 3]; 3]| -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det3(&a);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut solution = [0.0f64; 3];
    for (k, slot) in solution.iter_mut().enumerate() {
        let mut m = a;
        for row in 0..3 {
            m[row][k] = b[row];
        }
        *slot = det3(&m) / d;
    }
    let center = Complex64::new(solution[0], solution[1]);
    let r_sq = solution[2] + center.norm_sqr();
    if r_sq <= 0.0 {
        return None;
    }
    Some((center, r_sq.sqrt()))
}
