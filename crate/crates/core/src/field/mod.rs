//! Gridded concave functions `u ∈ Φ₀(Ω)`: derivatives, the operator
//! `det_H[u] = det ∇²F(∇u) · det ∇²u`, the anisotropic curvature of level
//! sets, level-set extraction and profiles, and Hessian integrals.
//!
//! A field is a grid of node values over a convex polygon `Ω`. When built
//! from a [`FieldModel`] the model's closed-form derivatives are used
//! everywhere and level sets are root-refined against the model; otherwise
//! derivatives come from bilinearly interpolated central differences.

mod contour;
mod io;
mod models;
mod profile;
mod quadrature;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::anorm::Norm;
use crate::convex_geom::{minkowski_sum, ConvexCurve};
use crate::error::{ensure_finite, Error, Result};
use crate::geom::{Mat2, Vec2};
use crate::par;
use crate::report::{Check, Report};

pub use contour::extract_level_set;
pub use io::{read_field, read_profile_csv, write_field, write_profile_csv, FieldDescriptor};
pub use models::{ConcaveModel, DistanceCube, Potential};
pub use profile::{profile, LevelSetProfile, FD_CHECK_MAX_FRACTION};
pub use quadrature::{
    cell_quadrature_points, hessian_integral, lp_norm, reilly_residual, HessianIntegral, QuadPoint,
    ReillyResidual,
};

/// Relative agreement demanded of the two curvature formulas before
/// [`ScalarField::curvature_at`] reports an internal-consistency error.
pub const CURVATURE_CONSISTENCY: f64 = 1e-4;

/// Closed-form description of a concave function, defined on all of ℝ² so
/// that level sets can be root-refined across `∂Ω`.
pub trait FieldModel: Send + Sync + fmt::Debug {
    fn value(&self, x: Vec2) -> f64;

    fn gradient(&self, _x: Vec2) -> Option<Vec2> {
        None
    }

    fn hessian(&self, _x: Vec2) -> Option<Mat2> {
        None
    }

    fn max_value(&self) -> f64;

    /// Whether `x` lies in the maximum set, where `∇u = 0`.
    fn is_flat(&self, _x: Vec2) -> bool {
        false
    }
}

/// Uniform lattice; node `(i, j)` sits at `origin + h·(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub origin: Vec2,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    /// Smallest grid aligned to integer multiples of `h` that covers
    /// `[lo, hi]` with two spare cells on each side.
    pub fn covering(lo: Vec2, hi: Vec2, h: f64) -> Result<Grid> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Config(format!("grid spacing must be positive, got {h}")));
        }
        let i0 = (lo.x / h).floor() - 2.0;
        let j0 = (lo.y / h).floor() - 2.0;
        let i1 = (hi.x / h).ceil() + 2.0;
        let j1 = (hi.y / h).ceil() + 2.0;
        let nx = (i1 - i0) as usize + 1;
        let ny = (j1 - j0) as usize + 1;
        if nx.saturating_mul(ny) > 64_000_000 {
            return Err(Error::Config(format!("grid of {nx}×{ny} nodes is too large")));
        }
        Ok(Grid {
            origin: Vec2::new(i0 * h, j0 * h),
            spacing: h,
            nx,
            ny,
        })
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + self.spacing * i as f64,
            self.origin.y + self.spacing * j as f64,
        )
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    /// Cell containing `x` as (i, j, local coordinates in [0, 1]²).
    fn locate(&self, x: Vec2) -> Option<(usize, usize, f64, f64)> {
        let fx = (x.x - self.origin.x) / self.spacing;
        let fy = (x.y - self.origin.y) / self.spacing;
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let i = (fx.floor() as usize).min(self.nx.checked_sub(2)?);
        let j = (fy.floor() as usize).min(self.ny.checked_sub(2)?);
        Some((i, j, fx - i as f64, fy - j as f64))
    }
}

/// Pointwise derivative data and the operators built from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalOperators {
    pub gradient: Vec2,
    pub hessian: Mat2,
    /// `H(∇u)`
    pub h: f64,
    /// `det ∇²F(∇u) · det ∇²u`
    pub det_h: f64,
    /// `−Σ H_ξᵢξⱼ(∇u) u_ij`
    pub curvature: f64,
    /// `Σ S^ij(A[u]) F_ξᵢ(∇u) u_j` with `A[u] = ∇²F(∇u) ∇²u`
    pub cofactor_form: f64,
}

impl LocalOperators {
    pub fn new(norm: &Norm, gradient: Vec2, hessian: Mat2, at: Vec2) -> Result<LocalOperators> {
        if gradient == Vec2::ZERO {
            return Err(Error::SingularGradient(at));
        }
        let h = norm.h(gradient);
        let hg = norm.h_grad(gradient);
        let hh = norm.h_hess(gradient);
        let fh = Mat2::outer(hg, hg).add(&hh.scale(h));
        let a = fh.matmul(&hessian);
        let cof = (hg * h).dot(a.cofactor().mul_vec(gradient));
        Ok(LocalOperators {
            gradient,
            hessian,
            h,
            det_h: fh.det() * hessian.det(),
            curvature: -hh.contract(&hessian),
            cofactor_form: cof,
        })
    }

    /// Curvature from the cofactor formula, `−H(∇u)⁻³ Σ S^ij F_ξᵢ u_j`.
    pub fn curvature_cofactor(&self) -> f64 {
        -self.cofactor_form / (self.h * self.h * self.h)
    }

    /// Scale below which disagreement of the two curvature formulas is
    /// roundoff: both are contractions of `∇²H` against `∇²u`.
    fn curvature_scale(&self, norm: &Norm) -> f64 {
        norm.h_hess(self.gradient).max_abs() * self.hessian.max_abs()
    }
}

/// A gridded function on a convex domain, zero outside the domain mask.
#[derive(Clone)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    mask: Vec<bool>,
    flat: Vec<bool>,
    boundary: ConvexCurve,
    model: Option<Arc<dyn FieldModel>>,
    max_value: f64,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("grid", &self.grid)
            .field("boundary_vertices", &self.boundary.len())
            .field("model", &self.model)
            .field("max_value", &self.max_value)
            .finish_non_exhaustive()
    }
}

impl ScalarField {
    /// Samples `model` on the grid of spacing `h` covering `boundary`.
    pub fn from_model(model: Arc<dyn FieldModel>, boundary: ConvexCurve, h: f64) -> Result<ScalarField> {
        let (lo, hi) = boundary.bbox();
        let grid = Grid::covering(lo, hi, h)?;
        let nodes = par::map_range(grid.len(), |k| {
            let x = grid.node(k % grid.nx, k / grid.nx);
            if boundary.contains(x) {
                (true, model.value(x).max(0.0), model.is_flat(x))
            } else {
                (false, 0.0, false)
            }
        });
        let max_value = model.max_value();
        if !(max_value.is_finite() && max_value > 0.0) {
            return Err(Error::InvalidData(format!("model maximum must be positive, got {max_value}")));
        }
        let mut values = Vec::with_capacity(nodes.len());
        let mut mask = Vec::with_capacity(nodes.len());
        let mut flat = Vec::with_capacity(nodes.len());
        for (m, v, f) in nodes {
            if !v.is_finite() {
                return Err(Error::InvalidData("model produced a non-finite value".into()));
            }
            mask.push(m);
            values.push(v);
            flat.push(f);
        }
        Ok(ScalarField {
            grid,
            values,
            mask,
            flat,
            boundary,
            model: Some(model),
            max_value,
        })
    }

    /// Grid-only field; nodes outside `boundary` are set to zero and the
    /// maximum is the largest node value.
    pub fn from_grid(grid: Grid, mut values: Vec<f64>, boundary: ConvexCurve) -> Result<ScalarField> {
        if values.len() != grid.len() {
            return Err(Error::InvalidData(format!(
                "expected {} node values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if grid.nx < 4 || grid.ny < 4 || !(grid.spacing > 0.0) {
            return Err(Error::InvalidData("grid must be at least 4×4 with positive spacing".into()));
        }
        let mut mask = vec![false; grid.len()];
        let mut max_value = f64::NEG_INFINITY;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let k = grid.index(i, j);
                if !values[k].is_finite() {
                    return Err(Error::InvalidData(format!("non-finite value at node ({i}, {j})")));
                }
                if boundary.contains(grid.node(i, j)) {
                    mask[k] = true;
                    max_value = max_value.max(values[k]);
                } else {
                    values[k] = 0.0;
                }
            }
        }
        if !(max_value > 0.0) {
            return Err(Error::InvalidData("field has no positive value inside the domain".into()));
        }
        let flat = values
            .iter()
            .zip(&mask)
            .map(|(&v, &m)| m && v >= max_value)
            .collect();
        Ok(ScalarField {
            grid,
            values,
            mask,
            flat,
            boundary,
            model: None,
            max_value,
        })
    }

    /// Grid-only copy of a field, dropping the model.
    pub fn without_model(&self) -> ScalarField {
        ScalarField {
            model: None,
            ..self.clone()
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Nodes of the maximum set, the complement of `E_u`.
    pub fn flat_top_mask(&self) -> &[bool] {
        &self.flat
    }

    pub fn boundary(&self) -> &ConvexCurve {
        &self.boundary
    }

    pub fn model(&self) -> Option<&Arc<dyn FieldModel>> {
        self.model.as_ref()
    }

    /// `M = max u`.
    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    pub fn contains(&self, x: Vec2) -> bool {
        self.boundary.contains(x)
    }

    /// Value at a node.
    #[inline]
    pub fn node_value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// `u(x)`: the model if present, otherwise bilinear interpolation.
    pub fn value_at(&self, x: Vec2) -> Result<f64> {
        ensure_finite(x)?;
        if !self.contains(x) {
            return Err(Error::Domain(x));
        }
        Ok(self.value_unchecked(x))
    }

    pub(crate) fn value_unchecked(&self, x: Vec2) -> f64 {
        if let Some(m) = &self.model {
            return m.value(x).max(0.0);
        }
        match self.grid.locate(x) {
            Some((i, j, s, t)) => {
                let v = |a, b| self.node_value(i + a, j + b);
                (1.0 - t) * ((1.0 - s) * v(0, 0) + s * v(1, 0)) + t * ((1.0 - s) * v(0, 1) + s * v(1, 1))
            }
            None => 0.0,
        }
    }

    /// Whether `x` belongs to the maximum set.
    pub fn is_flat_at(&self, x: Vec2) -> bool {
        match &self.model {
            Some(m) => m.is_flat(x),
            None => self.value_unchecked(x) >= self.max_value,
        }
    }

    pub fn gradient_at(&self, x: Vec2) -> Result<Vec2> {
        ensure_finite(x)?;
        if !self.contains(x) {
            return Err(Error::Domain(x));
        }
        Ok(self.derivatives(x)?.0)
    }

    pub fn hessian_at(&self, x: Vec2) -> Result<Mat2> {
        ensure_finite(x)?;
        if !self.contains(x) {
            return Err(Error::Domain(x));
        }
        Ok(self.derivatives(x)?.1)
    }

    /// Gradient and Hessian without the domain check.
    pub(crate) fn derivatives(&self, x: Vec2) -> Result<(Vec2, Mat2)> {
        if let Some(m) = &self.model {
            if let (Some(g), Some(h)) = (m.gradient(x), m.hessian(x)) {
                return Ok((g, h));
            }
            let (g_fd, h_fd) = self.fd_derivatives(x)?;
            return Ok((m.gradient(x).unwrap_or(g_fd), m.hessian(x).unwrap_or(h_fd)));
        }
        self.fd_derivatives(x)
    }

    /// Central differences at the four nodes of the cell containing `x`,
    /// interpolated bilinearly. Needs the surrounding 4×4 node block inside
    /// the domain.
    fn fd_derivatives(&self, x: Vec2) -> Result<(Vec2, Mat2)> {
        let (i, j, s, t) = self.grid.locate(x).ok_or(Error::Stencil(x))?;
        if i == 0 || j == 0 || i + 2 >= self.grid.nx || j + 2 >= self.grid.ny {
            return Err(Error::Stencil(x));
        }
        for b in j - 1..=j + 2 {
            for a in i - 1..=i + 2 {
                if !self.mask[self.grid.index(a, b)] {
                    return Err(Error::Stencil(x));
                }
            }
        }
        let h = self.grid.spacing;
        let u = |a: usize, b: usize| self.node_value(a, b);
        let node = |a: usize, b: usize| {
            let gx = (u(a + 1, b) - u(a - 1, b)) / (2.0 * h);
            let gy = (u(a, b + 1) - u(a, b - 1)) / (2.0 * h);
            let hxx = (u(a + 1, b) - 2.0 * u(a, b) + u(a - 1, b)) / (h * h);
            let hyy = (u(a, b + 1) - 2.0 * u(a, b) + u(a, b - 1)) / (h * h);
            let hxy = (u(a + 1, b + 1) - u(a + 1, b - 1) - u(a - 1, b + 1) + u(a - 1, b - 1)) / (4.0 * h * h);
            (Vec2::new(gx, gy), Mat2::symmetric(hxx, hxy, hyy))
        };
        let w = [(1.0 - s) * (1.0 - t), s * (1.0 - t), (1.0 - s) * t, s * t];
        let corners = [node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)];
        let mut g = Vec2::ZERO;
        let mut hs = Mat2::diag(0.0, 0.0);
        for (wk, (gk, hk)) in w.iter().zip(corners) {
            g += gk * *wk;
            hs = hs.add(&hk.scale(*wk));
        }
        Ok((g, hs))
    }

    /// All pointwise operators at `x ∈ E_u`.
    pub fn local_operators(&self, norm: &Norm, x: Vec2) -> Result<LocalOperators> {
        ensure_finite(x)?;
        if !self.contains(x) {
            return Err(Error::Domain(x));
        }
        self.local_unchecked(norm, x)
    }

    pub(crate) fn local_unchecked(&self, norm: &Norm, x: Vec2) -> Result<LocalOperators> {
        if self.model.as_ref().is_some_and(|m| m.is_flat(x)) {
            return Err(Error::SingularGradient(x));
        }
        let (g, hs) = self.derivatives(x)?;
        LocalOperators::new(norm, g, hs, x)
    }

    /// `det_H[u](x) = det ∇²F(∇u) · det ∇²u`.
    pub fn det_h_at(&self, norm: &Norm, x: Vec2) -> Result<f64> {
        Ok(self.local_operators(norm, x)?.det_h)
    }

    /// `Σ S^ij(A[u]) F_ξᵢ(∇u) u_j`.
    pub fn cofactor_form_at(&self, norm: &Norm, x: Vec2) -> Result<f64> {
        Ok(self.local_operators(norm, x)?.cofactor_form)
    }

    /// Anisotropic curvature of the level set through `x`, from
    /// `−Σ H_ξᵢξⱼ(∇u) u_ij`, after checking it against the cofactor formula.
    pub fn curvature_at(&self, norm: &Norm, x: Vec2) -> Result<f64> {
        let l = self.local_operators(norm, x)?;
        check_curvature_consistency(&l, norm, x)?;
        Ok(l.curvature)
    }

    /// Both curvature formulas, unchecked: (Hessian contraction, cofactor).
    pub fn curvature_pair_at(&self, norm: &Norm, x: Vec2) -> Result<(f64, f64)> {
        let l = self.local_operators(norm, x)?;
        Ok((l.curvature, l.curvature_cofactor()))
    }

    /// Largest `|∇u|` over boundary vertices and domain nodes. For concave
    /// `u` the supremum sits on `∂Ω`.
    pub fn max_gradient(&self) -> f64 {
        let mut best = 0.0f64;
        for &v in self.boundary.vertices() {
            if let Ok((g, _)) = self.derivatives(v) {
                best = best.max(g.norm());
            }
        }
        let nodes = par::map_range(self.grid.len(), |k| {
            if !self.mask[k] {
                return 0.0;
            }
            let x = self.grid.node(k % self.grid.nx, k / self.grid.nx);
            self.derivatives(x).map(|(g, _)| g.norm()).unwrap_or(0.0)
        });
        nodes.into_iter().fold(best, f64::max)
    }

    /// Membership checks for `Φ₀(Ω)`: zero boundary values (on boundary
    /// vertices, model fields only), nonnegativity, and midpoint concavity on
    /// `samples` random node pairs.
    pub fn check_invariants(&self, samples: usize, seed: u64) -> Report {
        let mut r = Report::default();
        if let Some(m) = &self.model {
            let worst = self
                .boundary
                .vertices()
                .iter()
                .map(|&v| m.value(v).abs())
                .fold(0.0, f64::max);
            r.push(Check::at_most("dirichlet_boundary_abs", worst, 1e-9));
        }
        let neg = self
            .values
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .map(|(&v, _)| -v)
            .fold(0.0, f64::max);
        r.push(Check::at_most("negativity", neg, 0.0));
        let inside: Vec<(usize, usize)> = (0..self.grid.ny)
            .flat_map(|j| (0..self.grid.nx).map(move |i| (i, j)))
            .filter(|&(i, j)| self.mask[self.grid.index(i, j)])
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        if inside.len() >= 2 {
            let mut done = 0;
            let mut tries = 0;
            while done < samples && tries < 20 * samples {
                tries += 1;
                let a = inside[rng.gen_range(0..inside.len())];
                let b = inside[rng.gen_range(0..inside.len())];
                if !(a.0 + b.0).is_multiple_of(2) || !(a.1 + b.1).is_multiple_of(2) {
                    continue;
                }
                let mid = ((a.0 + b.0) / 2, (a.1 + b.1) / 2);
                let ua = self.node_value(a.0, a.1);
                let ub = self.node_value(b.0, b.1);
                let um = self.node_value(mid.0, mid.1);
                worst = worst.max(0.5 * (ua + ub) - um);
                done += 1;
            }
        }
        r.push(Check::at_most("concavity_midpoint_defect", worst, 1e-8));
        r
    }
}

pub(crate) fn check_curvature_consistency(l: &LocalOperators, norm: &Norm, x: Vec2) -> Result<()> {
    let k1 = l.curvature;
    let k2 = l.curvature_cofactor();
    let diff = (k1 - k2).abs();
    let rel = CURVATURE_CONSISTENCY * k1.abs().max(k2.abs());
    if diff > rel && diff > 1e-6 * l.curvature_scale(norm) {
        return Err(Error::Consistency(format!(
            "curvature formulas disagree at ({}, {}): {k1} vs {k2}",
            x.x, x.y
        )));
    }
    Ok(())
}

/// `u(x) = δ³ − d(x, Ω₀)³` on `Ω = Ω₀ + δD`, with the disk replaced by a
/// 1024-gon.
pub fn distance_field_example(omega0: &ConvexCurve, delta: f64, spacing: f64) -> Result<ScalarField> {
    let (field_model, boundary) = distance_cube_parts(omega0, delta)?;
    ScalarField::from_model(field_model, boundary, spacing)
}

pub(crate) fn distance_cube_parts(
    omega0: &ConvexCurve,
    delta: f64,
) -> Result<(Arc<dyn FieldModel>, ConvexCurve)> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Config(format!("δ must be positive, got {delta}")));
    }
    let disk = ConvexCurve::regular_polygon(1024, delta, Vec2::ZERO, 0.0)?;
    let boundary = minkowski_sum(omega0, &disk)?;
    Ok((Arc::new(DistanceCube::new(omega0.clone(), delta)), boundary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anorm::PolarNorm;

    #[derive(Debug)]
    struct Paraboloid;

    impl FieldModel for Paraboloid {
        fn value(&self, x: Vec2) -> f64 {
            1.0 - x.norm_sq()
        }
        fn gradient(&self, x: Vec2) -> Option<Vec2> {
            Some(x * -2.0)
        }
        fn hessian(&self, _x: Vec2) -> Option<Mat2> {
            Some(Mat2::diag(-2.0, -2.0))
        }
        fn max_value(&self) -> f64 {
            1.0
        }
        fn is_flat(&self, x: Vec2) -> bool {
            x == Vec2::ZERO
        }
    }

    fn disk() -> ConvexCurve {
        ConvexCurve::regular_polygon(512, 1.0, Vec2::ZERO, 0.0).unwrap()
    }

    fn paraboloid(h: f64) -> ScalarField {
        ScalarField::from_model(Arc::new(Paraboloid), disk(), h).unwrap()
    }

    #[test]
    fn analytic_derivatives() {
        let f = paraboloid(1.0 / 32.0);
        let x = Vec2::new(0.1, 0.2);
        let g = f.gradient_at(x).unwrap();
        assert!((g - Vec2::new(-0.2, -0.4)).norm() < 1e-15);
        assert_eq!(f.hessian_at(x).unwrap(), Mat2::diag(-2.0, -2.0));
        assert!(matches!(f.gradient_at(Vec2::new(2.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn grid_derivatives() {
        let f = paraboloid(1.0 / 256.0).without_model();
        let x = Vec2::new(0.1, 0.2);
        let g = f.gradient_at(x).unwrap();
        assert!((g - Vec2::new(-0.2, -0.4)).norm() < 1e-4);
        let hs = f.hessian_at(x).unwrap();
        assert!((hs.xx + 2.0).abs() < 1e-6 && hs.xy.abs() < 1e-6);
        assert!(matches!(f.gradient_at(Vec2::new(0.999, 0.0)), Err(Error::Stencil(_))));
        assert!(matches!(f.gradient_at(Vec2::new(1.5, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn operator_examples() {
        let f = paraboloid(1.0 / 32.0);
        let x = Vec2::new(0.3, -0.1);
        assert!((f.det_h_at(&Norm::euclidean(), x).unwrap() - 4.0).abs() < 1e-12);
        let e = Norm::ellipse(2.0, 1.0).unwrap();
        assert!((f.det_h_at(&e, x).unwrap() - 4.0 / 4.0).abs() < 1e-12);
        let r = x.norm();
        assert!((f.curvature_at(&Norm::euclidean(), x).unwrap() - 1.0 / r).abs() < 1e-12);
        // cofactor form equals −H³ k_H
        let cf = f.cofactor_form_at(&e, x).unwrap();
        let l = f.local_operators(&e, x).unwrap();
        assert!((cf + l.h.powi(3) * l.curvature).abs() < 1e-12 * cf.abs());
        assert!(matches!(f.det_h_at(&e, Vec2::ZERO), Err(Error::SingularGradient(_))));
    }

    #[test]
    fn radial_quadratic_det_is_four() {
        for norm in [Norm::euclidean(), Norm::ellipse(2.0, 1.0).unwrap(), Norm::pnorm(4.0).unwrap()] {
            let polar = PolarNorm::analytic(norm.clone()).unwrap();
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
            let f = ScalarField::from_model(Arc::new(m), b, 1.0 / 64.0).unwrap();
            for x in [Vec2::new(0.11, 0.07), Vec2::new(-0.2, 0.31), Vec2::new(0.05, -0.4)] {
                if !f.contains(x) {
                    continue;
                }
                let d = f.det_h_at(&norm, x).unwrap();
                assert!((d - 4.0).abs() < 1e-9, "{} {d}", norm.label());
                let k = f.curvature_at(&norm, x).unwrap();
                let r = polar.eval(x).unwrap();
                assert!((k - 1.0 / r).abs() < 1e-9 / r, "{} {k} {}", norm.label(), 1.0 / r);
            }
        }
    }

    #[test]
    fn invariants_of_paraboloid() {
        let f = paraboloid(1.0 / 64.0);
        let r = f.check_invariants(2000, 7);
        assert!(r.all_pass(), "{r:?}");
        assert!((f.max_gradient() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn distance_cube_field() {
        let sq = ConvexCurve::regular_polygon(4, 0.5, Vec2::ZERO, 0.25 * std::f64::consts::PI).unwrap();
        let f = distance_field_example(&sq, 0.3, 1.0 / 64.0).unwrap();
        let d3 = 0.3f64.powi(3);
        assert!((f.value_at(Vec2::ZERO).unwrap() - d3).abs() < 1e-15);
        assert_eq!(f.gradient_at(Vec2::new(0.1, 0.1)).unwrap(), Vec2::ZERO);
        let r = f.check_invariants(1000, 1);
        assert!(r.all_pass(), "{r:?}");
        // |∇u| = 3d² on every level set
        for x in [Vec2::new(0.5, 0.1), Vec2::new(0.55, 0.55), Vec2::new(-0.1, -0.6)] {
            let u = f.value_at(x).unwrap();
            let d = (d3 - u).cbrt();
            let g = f.gradient_at(x).unwrap().norm();
            assert!((g - 3.0 * d * d).abs() < 1e-12, "{g} {}", 3.0 * d * d);
        }
        assert!(matches!(
            ConvexCurve::new(vec![Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(0.5, 0.1), Vec2::new(0.5, 1.0)]),
            Err(Error::InvalidCurve(_))
        ));
    }
}
