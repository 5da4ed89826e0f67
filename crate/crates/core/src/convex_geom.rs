//! Convex polygons, Wulff shapes, anisotropic perimeter and the
//! Steiner / Gauss-Bonnet / isoperimetric checks.
//!
//! Curves are polygons. The outer normal is constant along each edge, so the
//! anisotropic perimeter `Σ H(ν_e)|e|` is exact for the polygon and every
//! discretization error lives in how a smooth boundary was sampled.

use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use rand::Rng;

use crate::anorm::{Norm, PolarNorm};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::report::{Check, Report};

/// Relative tolerance for coincident vertices and collinear triples.
pub const CLEAN_TOL: f64 = 1e-12;

/// Default polygon resolution of `δW` in the Steiner check.
pub const STEINER_WULFF_N: usize = 4096;

/// A closed convex polygon with counterclockwise vertices; the last vertex
/// connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCurve {
    vertices: Vec<Vec2>,
}

fn bbox_of(points: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

impl ConvexCurve {
    /// Validates and cleans a counterclockwise convex vertex list: coincident
    /// neighbours and collinear (or backtracking) vertices are dropped.
    pub fn new(vertices: Vec<Vec2>) -> Result<ConvexCurve> {
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve("non-finite vertex".into()));
        }
        if vertices.len() < 3 {
            return Err(Error::InvalidCurve(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        let (lo, hi) = bbox_of(&vertices);
        let scale = (hi - lo).norm();
        if !(scale > 0.0) {
            return Err(Error::InvalidCurve("all vertices coincide".into()));
        }
        let mut v = vertices;
        // coincident neighbours
        let mut out: Vec<Vec2> = Vec::with_capacity(v.len());
        for p in v.drain(..) {
            if out.last().is_some_and(|q| (p - *q).norm() <= CLEAN_TOL * scale) {
                continue;
            }
            out.push(p);
        }
        while out.len() > 1 && (out[0] - *out.last().unwrap()).norm() <= CLEAN_TOL * scale {
            out.pop();
        }
        v = out;
        // collinear triples, repeated until stable
        loop {
            let n = v.len();
            if n < 3 {
                return Err(Error::InvalidCurve("degenerate polygon after cleaning".into()));
            }
            let mut keep = vec![true; n];
            let mut changed = false;
            for i in 0..n {
                let prev = v[(i + n - 1) % n];
                let next = v[(i + 1) % n];
                let e1 = v[i] - prev;
                let e2 = next - v[i];
                let c = e1.cross(e2);
                let s = e1.norm() * e2.norm();
                if c.abs() <= CLEAN_TOL * s {
                    keep[i] = false;
                    changed = true;
                    break;
                } else if c < 0.0 {
                    return Err(Error::InvalidCurve(format!(
                        "not convex/counterclockwise at vertex {i} ({}, {})",
                        v[i].x, v[i].y
                    )));
                }
            }
            if !changed {
                break;
            }
            v = v
                .into_iter()
                .zip(keep)
                .filter_map(|(p, k)| k.then_some(p))
                .collect();
        }
        if signed_area(&v) <= 0.0 {
            return Err(Error::InvalidCurve("signed area is not positive".into()));
        }
        // A locally convex polygon may still wind more than once.
        let n = v.len();
        let turning: f64 = (0..n)
            .map(|i| {
                let e1 = v[(i + 1) % n] - v[i];
                let e2 = v[(i + 2) % n] - v[(i + 1) % n];
                e1.cross(e2).atan2(e1.dot(e2))
            })
            .sum();
        if (turning - TAU).abs() > 1e-6 {
            return Err(Error::InvalidCurve(format!(
                "total turning {turning} ≠ 2π; polygon is not simple"
            )));
        }
        Ok(ConvexCurve { vertices: v })
    }

    /// Convex hull (Andrew's monotone chain), collinear points dropped.
    pub fn hull(points: &[Vec2]) -> Result<ConvexCurve> {
        let mut pts: Vec<Vec2> = points.iter().copied().filter(|p| p.is_finite()).collect();
        if pts.len() < 3 {
            return Err(Error::InvalidCurve("hull needs at least 3 finite points".into()));
        }
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup();
        let (lo, hi) = bbox_of(&pts);
        let tol = CLEAN_TOL * (hi - lo).norm_sq();
        let turn = |o: Vec2, a: Vec2, b: Vec2| (a - o).cross(b - o);
        let mut lower: Vec<Vec2> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= tol {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Vec2> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= tol {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        ConvexCurve::new(lower)
    }

    pub fn unit_square() -> ConvexCurve {
        ConvexCurve::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .expect("unit square")
    }

    /// Regular `n`-gon inscribed in the circle of radius `r` about `center`,
    /// first vertex at angle `phase`.
    pub fn regular_polygon(n: usize, r: f64, center: Vec2, phase: f64) -> Result<ConvexCurve> {
        if n < 3 || !(r > 0.0) {
            return Err(Error::InvalidCurve(format!("regular polygon needs n ≥ 3, r > 0 (n={n}, r={r})")));
        }
        ConvexCurve::new(
            (0..n)
                .map(|k| center + Vec2::from_angle(phase + TAU * k as f64 / n as f64) * r)
                .collect(),
        )
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges as `(start, end)` pairs, counterclockwise.
    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area.
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Euclidean perimeter.
    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| (b - a).norm()).sum()
    }

    pub fn centroid(&self) -> Vec2 {
        let a = self.area();
        let mut c = Vec2::ZERO;
        for (p, q) in self.edges() {
            c += (p + q) * p.cross(q);
        }
        c / (6.0 * a)
    }

    pub fn bbox(&self) -> (Vec2, Vec2) {
        bbox_of(&self.vertices)
    }

    /// Length scale used for relative tolerances.
    pub fn scale(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (hi - lo).norm()
    }

    /// Closed-set membership with absolute slack `tol`.
    pub fn contains_tol(&self, p: Vec2, tol: f64) -> bool {
        let v = &self.vertices;
        let n = v.len();
        let side = |a: Vec2, b: Vec2| {
            let e = b - a;
            e.cross(p - a) / e.norm()
        };
        // fan search from v₀; the full scan settles points near the boundary
        let d = p - v[0];
        if (v[1] - v[0]).cross(d) >= 0.0 && (v[n - 1] - v[0]).cross(d) <= 0.0 {
            let (mut lo, mut hi) = (1, n - 1);
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if (v[mid] - v[0]).cross(d) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let s = side(v[lo], v[lo + 1]);
            if s >= 0.0 {
                return true;
            }
            if s < -tol {
                return false;
            }
        } else if side(v[0], v[1]) < -tol || side(v[n - 1], v[0]) < -tol {
            return false;
        }
        self.edges().all(|(a, b)| side(a, b) >= -tol)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.contains_tol(p, 1e-12 * self.scale())
    }

    /// `[x_min, x_max]` of the intersection with the horizontal line at `y`.
    pub fn row_span(&self, y: f64) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in self.edges() {
            let (y0, y1) = (a.y.min(b.y), a.y.max(b.y));
            if y < y0 || y > y1 {
                continue;
            }
            if a.y == b.y {
                lo = lo.min(a.x.min(b.x));
                hi = hi.max(a.x.max(b.x));
            } else {
                let s = (y - a.y) / (b.y - a.y);
                let x = a.x + s * (b.x - a.x);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Closest point of the closed polygon and the distance to it; zero inside.
    pub fn distance(&self, p: Vec2) -> (f64, Vec2) {
        if self.contains_tol(p, 0.0) {
            return (0.0, p);
        }
        let mut best = (f64::INFINITY, p);
        for (a, b) in self.edges() {
            let e = b - a;
            let s = ((p - a).dot(e) / e.norm_sq()).clamp(0.0, 1.0);
            let q = a + e * s;
            let d = (p - q).norm();
            if d < best.0 {
                best = (d, q);
            }
        }
        best
    }

    /// Nearest boundary point of an exterior point `p`, its distance, and the
    /// vertex index when the nearest point is a vertex. `None` inside.
    pub fn nearest_feature(&self, p: Vec2) -> Option<(f64, Vec2, Option<usize>)> {
        if self.contains_tol(p, 0.0) {
            return None;
        }
        let n = self.vertices.len();
        let mut best = (f64::INFINITY, p, None);
        for i in 0..n {
            let a = self.vertices[i];
            let e = self.vertices[(i + 1) % n] - a;
            let s = (p - a).dot(e) / e.norm_sq();
            let (q, vertex) = if s <= 0.0 {
                (a, Some(i))
            } else if s >= 1.0 {
                (a + e, Some((i + 1) % n))
            } else {
                (a + e * s, None)
            };
            let d = (p - q).norm();
            if d < best.0 {
                best = (d, q, vertex);
            }
        }
        Some(best)
    }

    pub fn translate(&self, by: Vec2) -> ConvexCurve {
        ConvexCurve {
            vertices: self.vertices.iter().map(|&v| v + by).collect(),
        }
    }

    /// Scales about the origin; `s` must be positive.
    pub fn scaled(&self, s: f64) -> ConvexCurve {
        assert!(s > 0.0, "scale factor must be positive");
        ConvexCurve {
            vertices: self.vertices.iter().map(|&v| v * s).collect(),
        }
    }

    /// Parses one `x y` pair per line; blank lines and `#` comments ignored.
    pub fn read<R: BufRead>(reader: R) -> Result<ConvexCurve> {
        let mut pts = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut it = body.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<f64> {
                tok.ok_or_else(|| Error::Parse(format!("line {}: expected two numbers", lineno + 1)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let x = parse(it.next())?;
            let y = parse(it.next())?;
            if it.next().is_some() {
                return Err(Error::Parse(format!("line {}: trailing tokens", lineno + 1)));
            }
            pts.push(Vec2::new(x, y));
        }
        ConvexCurve::new(pts)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# convex curve, counterclockwise, {} vertices", self.len())?;
        for v in &self.vertices {
            writeln!(w, "{} {}", v.x, v.y)?;
        }
        Ok(())
    }
}

/// `W_R(x₀) = {x : H°(x − x₀) < R}`.
#[derive(Debug, Clone)]
pub struct WulffShape {
    polar: PolarNorm,
    radius: f64,
    center: Vec2,
    kappa: f64,
}

impl WulffShape {
    pub fn new(polar: PolarNorm, radius: f64, center: Vec2) -> Result<WulffShape> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Config(format!("Wulff radius must be positive, got {radius}")));
        }
        if !center.is_finite() {
            return Err(Error::InvalidInput("non-finite Wulff center".into()));
        }
        let kappa = polar.kappa();
        Ok(WulffShape {
            polar,
            radius,
            center,
            kappa,
        })
    }

    pub fn polar(&self) -> &PolarNorm {
        &self.polar
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> Vec2 {
        self.center
    }

    /// Area of the unit Wulff shape.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Exact area `κR²`.
    pub fn area(&self) -> f64 {
        self.kappa * self.radius * self.radius
    }
}

/// Polygon with vertices `x₀ + R e_k / H°(e_k)` at `n` uniform angles.
pub fn wulff_curve(shape: &WulffShape, n: usize) -> Result<ConvexCurve> {
    if n < 16 {
        return Err(Error::Config(format!("Wulff polygon needs n ≥ 16, got {n}")));
    }
    let verts = (0..n)
        .map(|k| {
            let e = Vec2::from_angle(TAU * k as f64 / n as f64);
            let h = shape.polar.eval(e)?;
            Ok(shape.center + e * (shape.radius / h))
        })
        .collect::<Result<Vec<_>>>()?;
    ConvexCurve::new(verts)
}

pub fn area(curve: &ConvexCurve) -> f64 {
    curve.area()
}

/// Area of the `n`-vertex unit Wulff polygon.
pub fn kappa_of(polar: &PolarNorm, n: usize) -> Result<f64> {
    if n < 64 {
        return Err(Error::Config(format!("kappa_of needs n ≥ 64, got {n}")));
    }
    let shape = WulffShape::new(polar.clone(), 1.0, Vec2::ZERO)?;
    Ok(wulff_curve(&shape, n)?.area())
}

/// `P_H(K) = Σ_e H(ν_e)|e|`, exact for polygons.
pub fn perimeter_h(curve: &ConvexCurve, norm: &Norm) -> Result<f64> {
    let mut total = 0.0;
    for (a, b) in curve.edges() {
        let e = b - a;
        if e.norm() == 0.0 {
            return Err(Error::InvalidCurve("degenerate edge".into()));
        }
        // H(ν)|e| = H(|e|ν) by homogeneity; |e|ν is e turned clockwise.
        total += norm.h(Vec2::new(e.y, -e.x));
    }
    Ok(total)
}

/// Minkowski sum of two convex polygons by merging edges in slope order.
/// Parallel edges are concatenated.
pub fn minkowski_sum(a: &ConvexCurve, b: &ConvexCurve) -> Result<ConvexCurve> {
    fn rotate_to_lowest(v: &[Vec2]) -> Vec<Vec2> {
        let start = (0..v.len())
            .min_by(|&i, &j| v[i].y.total_cmp(&v[j].y).then(v[i].x.total_cmp(&v[j].x)))
            .unwrap_or(0);
        v[start..].iter().chain(v[..start].iter()).copied().collect()
    }
    let p = rotate_to_lowest(a.vertices());
    let q = rotate_to_lowest(b.vertices());
    let (n, m) = (p.len(), q.len());
    let mut out = Vec::with_capacity(n + m);
    let (mut i, mut j) = (0usize, 0usize);
    while i < n || j < m {
        out.push(p[i % n] + q[j % m]);
        let ep = p[(i + 1) % n] - p[i % n];
        let eq = q[(j + 1) % m] - q[j % m];
        let c = ep.cross(eq);
        if j >= m || (i < n && c > 0.0) {
            i += 1;
        } else if i >= n || c < 0.0 {
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    // Roundoff between nearly parallel edges can leave tiny reflex turns.
    ConvexCurve::hull(&out)
}

/// Residuals of the Steiner formulas for `K + δW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteinerResiduals {
    pub delta: f64,
    pub kappa: f64,
    pub perimeter_h: f64,
    pub area: f64,
    /// `|P_H(K+δW) − P_H(K) − 2κδ|`; its vanishing is the first-variation
    /// form of the Gauss-Bonnet identity `∫ k_H H(ν) = 2κ`.
    pub perimeter_residual: f64,
    /// `||K+δW| − |K| − P_H(K)δ − κδ²|`
    pub area_residual: f64,
}

impl SteinerResiduals {
    pub fn relative_perimeter(&self) -> f64 {
        self.perimeter_residual / self.perimeter_h
    }

    pub fn relative_area(&self) -> f64 {
        self.area_residual / self.area
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.relative_perimeter() <= tol && self.relative_area() <= tol
    }

    pub fn to_report(&self, prefix: &str, tol: f64) -> Report {
        let mut r = Report::default();
        r.push(Check::at_most(format!("{prefix}steiner_perimeter_rel"), self.relative_perimeter(), tol));
        r.push(Check::at_most(format!("{prefix}steiner_area_rel"), self.relative_area(), tol));
        r
    }
}

pub fn steiner_gauss_bonnet_check(
    k: &ConvexCurve,
    norm: &Norm,
    polar: &PolarNorm,
    delta: f64,
) -> Result<SteinerResiduals> {
    steiner_gauss_bonnet_check_with(k, norm, polar, delta, STEINER_WULFF_N)
}

pub fn steiner_gauss_bonnet_check_with(
    k: &ConvexCurve,
    norm: &Norm,
    polar: &PolarNorm,
    delta: f64,
    wulff_n: usize,
) -> Result<SteinerResiduals> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Config(format!("Steiner check needs δ > 0, got {delta}")));
    }
    let w = WulffShape::new(polar.clone(), delta, Vec2::ZERO)?;
    let kappa = w.kappa();
    let sum = minkowski_sum(k, &wulff_curve(&w, wulff_n)?)?;
    let p = perimeter_h(k, norm)?;
    let a = k.area();
    let p_sum = perimeter_h(&sum, norm)?;
    let a_sum = sum.area();
    Ok(SteinerResiduals {
        delta,
        kappa,
        perimeter_h: p,
        area: a,
        perimeter_residual: (p_sum - p - 2.0 * kappa * delta).abs(),
        area_residual: (a_sum - a - p * delta - kappa * delta * delta).abs(),
    })
}

/// `P_H(K)² − 4κ|K|`, nonnegative for every convex `K`, zero for Wulff shapes.
pub fn isoperimetric_deficit(k: &ConvexCurve, norm: &Norm, kappa: f64) -> Result<f64> {
    let p = perimeter_h(k, norm)?;
    Ok(p * p - 4.0 * kappa * k.area())
}

/// Hull of `n_points` uniform samples in a randomly stretched, rotated and
/// shifted disk.
pub fn random_convex_polygon<R: Rng>(rng: &mut R, n_points: usize) -> Result<ConvexCurve> {
    let stretch = rng.gen_range(0.2..1.0);
    let rot = rng.gen_range(0.0..TAU);
    let shift = Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
    let scale = rng.gen_range(0.3..2.0);
    let m = crate::geom::Mat2::rotation(rot);
    let pts: Vec<Vec2> = (0..n_points.max(3))
        .map(|_| {
            let r = rng.gen_range(0.0f64..1.0).sqrt();
            let e = Vec2::from_angle(rng.gen_range(0.0..TAU));
            let p = Vec2::new(e.x * r, e.y * r * stretch);
            m.mul_vec(p) * scale + shift
        })
        .collect();
    ConvexCurve::hull(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn euclid_polar() -> PolarNorm {
        PolarNorm::analytic(Norm::euclidean()).unwrap()
    }

    fn ellipse_pair() -> (Norm, PolarNorm) {
        let n = Norm::ellipse(2.0, 1.0).unwrap();
        (n.clone(), PolarNorm::analytic(n).unwrap())
    }

    #[test]
    fn rejects_bad_curves() {
        assert!(ConvexCurve::new(vec![Vec2::ZERO, Vec2::new(1.0, 0.0)]).is_err());
        // clockwise
        assert!(ConvexCurve::new(vec![Vec2::ZERO, Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0)]).is_err());
        // reflex vertex
        let dart = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(0.0, 2.0),
            Vec2::new(0.5, 1.0),
        ];
        assert!(matches!(ConvexCurve::new(dart), Err(Error::InvalidCurve(_))));
    }

    #[test]
    fn cleans_collinear_and_duplicate_vertices() {
        let c = ConvexCurve::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.5, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.area(), 1.0);
    }

    #[test]
    fn wulff_curve_examples() {
        let shape = WulffShape::new(euclid_polar(), 1.0, Vec2::ZERO).unwrap();
        let c = wulff_curve(&shape, 256).unwrap();
        assert_eq!(c.len(), 256);
        assert!(c.vertices().iter().all(|v| (v.norm() - 1.0).abs() < 1e-15));
        let (_, pol) = ellipse_pair();
        let shape = WulffShape::new(pol, 1.0, Vec2::ZERO).unwrap();
        let c = wulff_curve(&shape, 512).unwrap();
        let (lo, hi) = c.bbox();
        assert!((hi.x - 0.5).abs() < 1e-15 && (lo.x + 0.5).abs() < 1e-15);
        assert!((hi.y - 1.0).abs() < 1e-15 && (lo.y + 1.0).abs() < 1e-15);
        assert!(matches!(wulff_curve(&shape, 15), Err(Error::Config(_))));
    }

    #[test]
    fn area_examples() {
        assert_eq!(ConvexCurve::unit_square().area(), 1.0);
        let disk = wulff_curve(&WulffShape::new(euclid_polar(), 1.0, Vec2::ZERO).unwrap(), 4096).unwrap();
        assert!((disk.area() / PI - 1.0).abs() < 1e-5);
        let (_, pol) = ellipse_pair();
        let el = wulff_curve(&WulffShape::new(pol, 1.0, Vec2::ZERO).unwrap(), 4096).unwrap();
        assert!((el.area() / (PI / 2.0) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn perimeter_examples() {
        let sq = ConvexCurve::unit_square();
        let (n, _) = ellipse_pair();
        assert!((perimeter_h(&sq, &n).unwrap() - 3.0).abs() < 1e-15);
        assert!((perimeter_h(&sq, &Norm::euclidean()).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn minkowski_squares() {
        let sq = ConvexCurve::unit_square();
        let s = minkowski_sum(&sq, &sq).unwrap();
        assert_eq!(s.len(), 4);
        assert!((s.area() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn minkowski_square_disk_classical_steiner() {
        let sq = ConvexCurve::unit_square();
        let d = wulff_curve(&WulffShape::new(euclid_polar(), 0.5, Vec2::ZERO).unwrap(), 4096).unwrap();
        let s = minkowski_sum(&sq, &d).unwrap();
        assert!((s.area() - (1.0 + 2.0 + PI * 0.25)).abs() < 1e-4);
    }

    #[test]
    fn minkowski_rejects_nonconvex_input_at_construction() {
        let bad = ConvexCurve::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, 0.2),
            Vec2::new(2.0, 2.0),
            Vec2::new(0.0, 2.0),
        ]);
        assert!(matches!(bad, Err(Error::InvalidCurve(_))));
    }

    #[test]
    fn steiner_examples() {
        let pol = euclid_polar();
        let e = Norm::euclidean();
        let r = steiner_gauss_bonnet_check(&ConvexCurve::unit_square(), &e, &pol, 0.25).unwrap();
        assert!(r.perimeter_residual <= 1e-6, "{r:?}");
        let (n, pol) = ellipse_pair();
        let k = wulff_curve(&WulffShape::new(pol.clone(), 1.0, Vec2::ZERO).unwrap(), 4096).unwrap();
        let r = steiner_gauss_bonnet_check(&k, &n, &pol, 0.1).unwrap();
        assert!(r.relative_perimeter() <= 1e-4, "{r:?}");
        assert!(matches!(
            steiner_gauss_bonnet_check(&k, &n, &pol, 0.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn isoperimetric_examples() {
        let e = Norm::euclidean();
        let d = isoperimetric_deficit(&ConvexCurve::unit_square(), &e, PI).unwrap();
        assert!((d - (16.0 - 4.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn curve_text_roundtrip() {
        let c = ConvexCurve::regular_polygon(7, 1.3, Vec2::new(0.1, -0.2), 0.3).unwrap();
        let mut buf = Vec::new();
        c.write(&mut buf).unwrap();
        let back = ConvexCurve::read(&buf[..]).unwrap();
        assert_eq!(back, c);
        assert!(ConvexCurve::read("0 0\n1 0 # x\n\n1 1\n0 1 2\n".as_bytes()).is_err());
        assert!(ConvexCurve::read("# only a comment\n0 0\n1 0\n0 abc\n".as_bytes()).is_err());
    }

    #[test]
    fn row_span_and_distance() {
        let sq = ConvexCurve::unit_square();
        assert_eq!(sq.row_span(0.5), Some((0.0, 1.0)));
        assert_eq!(sq.row_span(1.5), None);
        let (d, q) = sq.distance(Vec2::new(2.0, 2.0));
        assert!((d - 2f64.sqrt()).abs() < 1e-15 && q == Vec2::new(1.0, 1.0));
        assert_eq!(sq.distance(Vec2::new(0.5, 0.5)).0, 0.0);
    }
}
