//! Marching squares for `{u = t}`.
//!
//! Crossings on grid edges are root-refined against the model when one is
//! present, and linearly interpolated otherwise. Segments are chained to
//! confirm the contour closes, then the crossing points are convexified by
//! a hull: superlevel sets of a concave function are convex, so any reflex
//! vertex is discretization noise.

use std::collections::HashMap;

use crate::convex_geom::ConvexCurve;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::par;

use super::ScalarField;

/// Edge ids: `2·index(i, j)` is the edge to `(i+1, j)`, `2·index(i, j) + 1`
/// the edge to `(i, j+1)`.
type EdgeId = usize;

fn refine(field: &ScalarField, a: Vec2, b: Vec2, va: f64, vb: f64, t: f64) -> Vec2 {
    let Some(model) = field.model() else {
        let s = (va - t) / (va - vb);
        return a.lerp(b, s);
    };
    // Illinois regula falsi on the model restricted to the edge.
    let f = |s: f64| model.value(a.lerp(b, s)) - t;
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return a;
    }
    if fhi == 0.0 || flo.signum() == fhi.signum() {
        return a.lerp(b, (va - t) / (va - vb));
    }
    let mut side = 0i8;
    for _ in 0..100 {
        let s = (lo * fhi - hi * flo) / (fhi - flo);
        let fs = f(s);
        if fs == 0.0 || hi - lo < 1e-15 {
            return a.lerp(b, s);
        }
        if fs.signum() == flo.signum() {
            lo = s;
            flo = fs;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = s;
            fhi = fs;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    a.lerp(b, 0.5 * (lo + hi))
}

/// Segments of the row of cells `j`, as pairs of edge ids with their points.
fn row_segments(field: &ScalarField, t: f64, j: usize) -> Vec<((EdgeId, Vec2), (EdgeId, Vec2))> {
    let g = field.grid();
    let mut out = Vec::new();
    for i in 0..g.nx - 1 {
        let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
        let vals = corners.map(|(a, b)| field.node_value(a, b));
        let inside = vals.map(|v| v > t);
        if inside.iter().all(|&s| s) || inside.iter().all(|&s| !s) {
            continue;
        }
        // cell edges counterclockwise: bottom, right, top, left
        let edge_ids = [
            2 * g.index(i, j),
            2 * g.index(i + 1, j) + 1,
            2 * g.index(i, j + 1),
            2 * g.index(i, j) + 1,
        ];
        let crossing = |e: usize| -> (EdgeId, Vec2) {
            let (k0, k1) = (e, (e + 1) % 4);
            // refine along the canonical (lower-index to higher-index) direction
            // so both cells sharing the edge compute the identical point
            let (p, q) = if e < 2 { (k0, k1) } else { (k1, k0) };
            let a = g.node(corners[p].0, corners[p].1);
            let b = g.node(corners[q].0, corners[q].1);
            (edge_ids[e], refine(field, a, b, vals[p], vals[q], t))
        };
        let crossed: Vec<usize> = (0..4).filter(|&e| inside[e] != inside[(e + 1) % 4]).collect();
        if crossed.len() == 2 {
            out.push((crossing(crossed[0]), crossing(crossed[1])));
        } else {
            // saddle: cut off each corner whose state differs from the center
            let center_val = match field.model() {
                Some(m) => m.value(g.node(i, j) + Vec2::new(0.5, 0.5) * g.spacing),
                None => 0.25 * vals.iter().sum::<f64>(),
            };
            let center_in = center_val > t;
            for (c, &corner_in) in inside.iter().enumerate() {
                if corner_in != center_in {
                    // corner c sits between edge c−1 and edge c
                    out.push((crossing((c + 3) % 4), crossing(c)));
                }
            }
        }
    }
    out
}

/// The level set `Σ_t = {u = t}` as a convex polygon; `∂Ω` for `t = 0`.
pub fn extract_level_set(field: &ScalarField, t: f64) -> Result<ConvexCurve> {
    let m = field.max_value();
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidInput(format!("level must be finite and ≥ 0, got {t}")));
    }
    if t >= m {
        return Err(Error::EmptyLevel { t, max: m });
    }
    if t == 0.0 {
        return Ok(field.boundary().clone());
    }
    let g = field.grid();
    let rows = par::map_range(g.ny - 1, |j| row_segments(field, t, j));
    let segments: Vec<_> = rows.into_iter().flatten().collect();
    if segments.is_empty() {
        return Err(Error::Extraction(format!("no crossings found for level {t}")));
    }
    let mut incident: HashMap<EdgeId, Vec<usize>> = HashMap::with_capacity(2 * segments.len());
    for (k, (a, b)) in segments.iter().enumerate() {
        incident.entry(a.0).or_default().push(k);
        incident.entry(b.0).or_default().push(k);
    }
    if let Some((e, _)) = incident.iter().find(|(_, s)| s.len() != 2) {
        return Err(Error::Extraction(format!(
            "contour at level {t} is not closed (edge {e} has {} incident segments)",
            incident[e].len()
        )));
    }
    let mut points: Vec<Vec2> = Vec::with_capacity(2 * segments.len());
    for (a, b) in &segments {
        points.push(a.1);
        points.push(b.1);
    }
    ConvexCurve::hull(&points).map_err(|e| Error::Extraction(format!("level {t}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anorm::{Norm, PolarNorm};
    use crate::convex_geom::{wulff_curve, WulffShape};
    use crate::field::{ConcaveModel, Potential};
    use std::sync::Arc;

    fn cone(norm: Norm, h: f64) -> (ScalarField, PolarNorm) {
        let polar = PolarNorm::analytic(norm).unwrap();
        // u = 1 − H°(x) = 1 − (H°²)^{1/2}: traced through the gauge power γ = 2
        // domain, with a cone model on top
        let m = ConcaveModel::new(
            Potential::GaugePower {
                polar: polar.clone(),
                gamma: 2.0,
                center: Vec2::ZERO,
            },
            1.0,
            1024,
        )
        .unwrap();
        let b = m.boundary().clone();
        #[derive(Debug)]
        struct Cone(PolarNorm);
        impl crate::field::FieldModel for Cone {
            fn value(&self, x: Vec2) -> f64 {
                1.0 - self.0.h(x)
            }
            fn max_value(&self) -> f64 {
                1.0
            }
        }
        (ScalarField::from_model(Arc::new(Cone(polar.clone())), b, h).unwrap(), polar)
    }

    #[test]
    fn wulff_level_sets_of_cone() {
        for norm in [Norm::euclidean(), Norm::ellipse(2.0, 1.0).unwrap()] {
            let (f, polar) = cone(norm, 1.0 / 64.0);
            let c = extract_level_set(&f, 0.5).unwrap();
            for &v in c.vertices() {
                assert!((polar.eval(v).unwrap() - 0.5).abs() < 1e-12);
            }
            let w = wulff_curve(&WulffShape::new(polar.clone(), 0.5, Vec2::ZERO).unwrap(), 4096).unwrap();
            assert!((c.area() / w.area() - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn grid_only_level_set_within_h() {
        let (f, polar) = cone(Norm::euclidean(), 1.0 / 64.0);
        let f = f.without_model();
        let c = extract_level_set(&f, 0.5).unwrap();
        for &v in c.vertices() {
            assert!((polar.eval(v).unwrap() - 0.5).abs() < 1.0 / 64.0);
        }
    }

    #[test]
    fn edge_cases() {
        let (f, _) = cone(Norm::euclidean(), 1.0 / 32.0);
        assert_eq!(&extract_level_set(&f, 0.0).unwrap(), f.boundary());
        assert!(matches!(extract_level_set(&f, 1.0), Err(Error::EmptyLevel { .. })));
        assert!(matches!(extract_level_set(&f, -0.1), Err(Error::InvalidInput(_))));
    }
}
