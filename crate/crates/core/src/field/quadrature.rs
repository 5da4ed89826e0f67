//! Cell quadrature over convex regions, the three Hessian-integral forms,
//! the Reilly identity and Lebesgue norms.
//!
//! Cells wholly inside the region use the cell center with weight `h²`.
//! Cells cut by the region boundary are clipped, and integrated at the
//! centroid of the clipped piece with its area as weight.

use crate::anorm::Norm;
use crate::convex_geom::ConvexCurve;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::par;

use super::{extract_level_set, Grid, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub x: Vec2,
    pub weight: f64,
}

/// Sutherland–Hodgman against the half-plane `side(p) ≥ 0`, `side` affine.
fn clip(poly: &[Vec2], side: impl Fn(Vec2) -> f64) -> Vec<Vec2> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        let (sa, sb) = (side(a), side(b));
        if sa >= 0.0 {
            out.push(a);
        }
        if (sa >= 0.0) != (sb >= 0.0) {
            out.push(a.lerp(b, sa / (sa - sb)));
        }
    }
    out
}

fn area_centroid(poly: &[Vec2]) -> Option<(f64, Vec2)> {
    let n = poly.len();
    if n < 3 {
        return None;
    }
    let o = poly[0];
    let mut a2 = 0.0;
    let mut c = Vec2::ZERO;
    for k in 1..n - 1 {
        let p = poly[k] - o;
        let q = poly[k + 1] - o;
        let w = p.cross(q);
        a2 += w;
        c += (p + q) * w;
    }
    (a2 > 0.0).then(|| (0.5 * a2, o + c / (3.0 * a2)))
}

fn row_points(grid: &Grid, region: &ConvexCurve, j: usize) -> Vec<QuadPoint> {
    let h = grid.spacing;
    let y0 = grid.origin.y + h * j as f64;
    let y1 = y0 + h;
    let strip = clip(&clip(region.vertices(), |p| p.y - y0), |p| y1 - p.y);
    if strip.len() < 3 {
        return Vec::new();
    }
    let xmin = strip.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let xmax = strip.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let full = match (region.row_span(y0), region.row_span(y1)) {
        (Some((a0, b0)), Some((a1, b1))) => Some((a0.max(a1), b0.min(b1))),
        _ => None,
    };
    let i0 = (((xmin - grid.origin.x) / h).floor().max(0.0)) as usize;
    let i1 = ((((xmax - grid.origin.x) / h).floor().max(0.0)) as usize).min(grid.nx - 2);
    let mut out = Vec::new();
    for i in i0..=i1 {
        let x0 = grid.origin.x + h * i as f64;
        let x1 = x0 + h;
        if full.is_some_and(|(a, b)| x0 >= a && x1 <= b) {
            out.push(QuadPoint {
                x: Vec2::new(x0 + 0.5 * h, y0 + 0.5 * h),
                weight: h * h,
            });
            continue;
        }
        let piece = clip(&clip(&strip, |p| p.x - x0), |p| x1 - p.x);
        if let Some((a, c)) = area_centroid(&piece) {
            out.push(QuadPoint { x: c, weight: a });
        }
    }
    out
}

/// Quadrature nodes and weights for `∫_region`, in row-major cell order.
pub fn cell_quadrature_points(grid: &Grid, region: &ConvexCurve) -> Vec<QuadPoint> {
    let (lo, hi) = region.bbox();
    let h = grid.spacing;
    let j0 = (((lo.y - grid.origin.y) / h).floor().max(0.0)) as usize;
    let j1 = ((((hi.y - grid.origin.y) / h).floor().max(0.0)) as usize).min(grid.ny - 2);
    if j0 > j1 {
        return Vec::new();
    }
    par::map_range(j1 - j0 + 1, |r| row_points(grid, region, j0 + r))
        .into_iter()
        .flatten()
        .collect()
}

/// Three estimates of `I_H[u, Ω] = ∫ u det_H[u]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianIntegral {
    /// `∫ u det_H[u]`
    pub direct: f64,
    /// `½ ∫ k_H H(∇u)³`
    pub curvature_form: f64,
    /// `−½ ∫ Σ S^ij(A[u]) F_ξᵢ(∇u) u_j`
    pub parts_form: f64,
    /// Area of cells skipped for lack of a finite-difference stencil.
    pub skipped_area: f64,
}

impl HessianIntegral {
    pub fn forms(&self) -> [f64; 3] {
        [self.direct, self.curvature_form, self.parts_form]
    }

    /// Median of the three forms.
    pub fn best(&self) -> f64 {
        let mut f = self.forms();
        f.sort_by(f64::total_cmp);
        f[1]
    }

    /// Largest `|a − b| / max(|a|, |b|)` over pairs of forms.
    pub fn max_pairwise_relative(&self) -> f64 {
        let f = self.forms();
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
        rel(f[0], f[1]).max(rel(f[0], f[2])).max(rel(f[1], f[2]))
    }
}

/// All three forms by one pass of cell quadrature over `Ω`. The maximum set
/// contributes nothing.
pub fn hessian_integral(field: &ScalarField, norm: &Norm) -> Result<HessianIntegral> {
    let pts = cell_quadrature_points(field.grid(), field.boundary());
    let terms = par::map_slice(&pts, |q| -> Result<[f64; 4]> {
        if field.is_flat_at(q.x) {
            return Ok([0.0; 4]);
        }
        match field.local_unchecked(norm, q.x) {
            Ok(l) => {
                let u = field.value_unchecked(q.x);
                let h3 = l.h * l.h * l.h;
                Ok([
                    q.weight * u * l.det_h,
                    q.weight * 0.5 * l.curvature * h3,
                    -q.weight * 0.5 * l.cofactor_form,
                    0.0,
                ])
            }
            Err(Error::SingularGradient(_)) => Ok([0.0; 4]),
            Err(Error::Stencil(_)) => Ok([0.0, 0.0, 0.0, q.weight]),
            Err(e) => Err(e),
        }
    });
    let mut s = [0.0; 4];
    for t in terms {
        let t = t?;
        for k in 0..4 {
            s[k] += t[k];
        }
    }
    Ok(HessianIntegral {
        direct: s[0],
        curvature_form: s[1],
        parts_form: s[2],
        skipped_area: s[3],
    })
}

/// Both sides of `∫_{u>t} det_H[u] = ½ ∫_{u=t} k_H H(∇u)³/|∇u|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReillyResidual {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / |lhs|`
    pub residual: f64,
    /// False when `{u > t}` spans fewer than ten cells.
    pub reliable: bool,
}

pub fn reilly_residual(field: &ScalarField, norm: &Norm, t: f64) -> Result<ReillyResidual> {
    let region = extract_level_set(field, t)?;
    let pts = cell_quadrature_points(field.grid(), &region);
    let lhs_terms = par::map_slice(&pts, |q| -> Result<f64> {
        if field.is_flat_at(q.x) {
            return Ok(0.0);
        }
        match field.local_unchecked(norm, q.x) {
            Ok(l) => Ok(q.weight * l.det_h),
            Err(Error::SingularGradient(_)) | Err(Error::Stencil(_)) => Ok(0.0),
            Err(e) => Err(e),
        }
    });
    let mut lhs = 0.0;
    for v in lhs_terms {
        lhs += v?;
    }
    let mut rhs = 0.0;
    for (a, b) in region.edges() {
        let l = field.local_unchecked(norm, (a + b) * 0.5)?;
        rhs += 0.5 * l.curvature * l.h.powi(3) / l.gradient.norm() * (b - a).norm();
    }
    Ok(ReillyResidual {
        t,
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / lhs.abs(),
        reliable: region.area() >= 10.0 * field.grid().cell_area(),
    })
}

/// `‖u‖_{L^p(Ω)}`; `p = ∞` gives `M`.
pub fn lp_norm(field: &ScalarField, p: f64) -> Result<f64> {
    if p == f64::INFINITY {
        return Ok(field.max_value());
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::Config(format!("L^p norm needs p ≥ 1, got {p}")));
    }
    let pts = cell_quadrature_points(field.grid(), field.boundary());
    let terms = par::map_slice(&pts, |q| q.weight * field.value_unchecked(q.x).powf(p));
    Ok(par::ordered_sum(&terms).powf(1.0 / p))
}
