//! Distribution and perimeter tables `t ↦ μ(t), λ_H(t)` with their
//! derivatives from contour quadrature.

use crate::anorm::Norm;
use crate::convex_geom::perimeter_h;
use crate::error::{Error, Result};
use crate::par;

use super::{extract_level_set, ScalarField};

/// Levels above this fraction of `M` are left out of the finite-difference
/// cross-check of `λ'_H`: near the top the level sets shrink to a few cells.
pub const FD_CHECK_MAX_FRACTION: f64 = 0.75;

/// Sampled level-set geometry of a field at `t_k = M·k/n`, `k = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetProfile {
    pub levels: Vec<f64>,
    /// `|{u > t}|`
    pub mu: Vec<f64>,
    /// `P_H({u > t})`
    pub lambda: Vec<f64>,
    /// `−∫_{u=t} k_H/|∇u|`; NaN where derivatives are unavailable.
    pub lambda_prime: Vec<f64>,
    /// `−∫_{u=t} 1/|∇u|`; NaN where derivatives are unavailable.
    pub mu_prime: Vec<f64>,
    pub max_value: f64,
    /// Largest `|∇u|` seen on the sampled contours, `∂Ω` included.
    pub max_grad: f64,
    /// Cell area of the source grid.
    pub cell_area: f64,
}

impl LevelSetProfile {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Centered difference of `λ_H` at level `k`, for interior levels up to
    /// [`FD_CHECK_MAX_FRACTION`]`·M`.
    pub fn fd_lambda_prime(&self, k: usize) -> Option<f64> {
        if k == 0 || k + 1 >= self.len() || self.levels[k] > FD_CHECK_MAX_FRACTION * self.max_value {
            return None;
        }
        Some((self.lambda[k + 1] - self.lambda[k - 1]) / (self.levels[k + 1] - self.levels[k - 1]))
    }

    /// Worst relative gap between the contour-quadrature `λ'_H` and the
    /// centered difference of `λ_H`.
    pub fn fd_cross_check(&self) -> f64 {
        (0..self.len())
            .filter_map(|k| {
                let fd = self.fd_lambda_prime(k)?;
                let q = self.lambda_prime[k];
                q.is_finite().then(|| (q - fd).abs() / fd.abs())
            })
            .fold(0.0, f64::max)
    }

    /// `min_t (λ_H(t)² − 4κμ(t)) / λ_H(0)²`; nonnegative by the
    /// isoperimetric inequality.
    pub fn isoperimetric_margin(&self, kappa: f64) -> f64 {
        let l0 = self.lambda[0] * self.lambda[0];
        self.lambda
            .iter()
            .zip(&self.mu)
            .map(|(l, m)| (l * l - 4.0 * kappa * m) / l0)
            .fold(f64::INFINITY, f64::min)
    }

    /// `min_t (−λ'_H(t) − 2κ/(β max|∇u|))`; nonnegative.
    pub fn lambda_prime_margin(&self, kappa: f64, beta: f64) -> f64 {
        let bound = 2.0 * kappa / (beta * self.max_grad);
        self.lambda_prime
            .iter()
            .filter(|v| v.is_finite())
            .map(|lp| -lp - bound)
            .fold(f64::INFINITY, f64::min)
    }
}

struct LevelData {
    mu: f64,
    lambda: f64,
    lambda_prime: f64,
    mu_prime: f64,
    max_grad: f64,
}

fn level_data(field: &ScalarField, norm: &Norm, t: f64) -> Result<LevelData> {
    let curve = extract_level_set(field, t)?;
    let mut lp = 0.0;
    let mut mp = 0.0;
    let mut max_grad = 0.0f64;
    let mut available = true;
    for (a, b) in curve.edges() {
        let len = (b - a).norm();
        let m = (a + b) * 0.5;
        match field.local_unchecked(norm, m) {
            Ok(l) => {
                let g = l.gradient.norm();
                max_grad = max_grad.max(g);
                lp -= l.curvature / g * len;
                mp -= len / g;
            }
            Err(Error::Stencil(_)) => available = false,
            Err(e) => return Err(e),
        }
    }
    if !available {
        lp = f64::NAN;
        mp = f64::NAN;
    }
    Ok(LevelData {
        mu: curve.area(),
        lambda: perimeter_h(&curve, norm)?,
        lambda_prime: lp,
        mu_prime: mp,
        max_grad,
    })
}

/// Profile at `n_levels` uniform levels `t_k = M·k/n_levels`.
pub fn profile(field: &ScalarField, norm: &Norm, n_levels: usize) -> Result<LevelSetProfile> {
    if n_levels < 8 {
        return Err(Error::Config(format!("profile needs at least 8 levels, got {n_levels}")));
    }
    let m = field.max_value();
    let levels: Vec<f64> = (0..n_levels).map(|k| m * k as f64 / n_levels as f64).collect();
    let data = par::map_slice(&levels, |&t| level_data(field, norm, t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut max_grad = data.iter().map(|d| d.max_grad).fold(0.0, f64::max);
    for &v in field.boundary().vertices() {
        if let Ok((g, _)) = field.derivatives(v) {
            max_grad = max_grad.max(g.norm());
        }
    }
    let p = LevelSetProfile {
        mu: data.iter().map(|d| d.mu).collect(),
        lambda: data.iter().map(|d| d.lambda).collect(),
        lambda_prime: data.iter().map(|d| d.lambda_prime).collect(),
        mu_prime: data.iter().map(|d| d.mu_prime).collect(),
        levels,
        max_value: m,
        max_grad,
        cell_area: field.grid().cell_area(),
    };
    for k in 1..p.len() {
        if !(p.mu[k] < p.mu[k - 1]) {
            return Err(Error::Profile(format!("μ is not strictly decreasing at t = {}", p.levels[k])));
        }
        if !(p.lambda[k] < p.lambda[k - 1]) {
            return Err(Error::Profile(format!("λ_H is not strictly decreasing at t = {}", p.levels[k])));
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anorm::PolarNorm;
    use crate::field::{ConcaveModel, Potential};
    use crate::geom::Vec2;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn radial(norm: &Norm, h: f64) -> (ScalarField, f64) {
        let polar = PolarNorm::analytic(norm.clone()).unwrap();
        let kappa = polar.kappa();
        let m = ConcaveModel::new(
            Potential::GaugePower {
                polar,
                gamma: 2.0,
                center: Vec2::ZERO,
            },
            1.0,
            1024,
        )
        .unwrap();
        let b = m.boundary().clone();
        (ScalarField::from_model(Arc::new(m), b, h).unwrap(), kappa)
    }

    #[test]
    fn euclidean_paraboloid_profile() {
        let (f, _) = radial(&Norm::euclidean(), 1.0 / 128.0);
        let p = profile(&f, &Norm::euclidean(), 16).unwrap();
        for k in 0..p.len() {
            let t = p.levels[k];
            assert!((p.mu[k] / (PI * (1.0 - t)) - 1.0).abs() < 1e-3, "μ at {t}");
            assert!((p.mu_prime[k] + PI).abs() < 1e-3 * PI, "μ' at {t}: {}", p.mu_prime[k]);
        }
        assert!(p.fd_cross_check() < 0.02);
        assert!(p.isoperimetric_margin(PI) > -1e-6);
        assert!((p.max_grad - 2.0).abs() < 1e-9);
    }

    #[test]
    fn ellipse_radial_lambda() {
        let norm = Norm::ellipse(2.0, 1.0).unwrap();
        let (f, kappa) = radial(&norm, 1.0 / 128.0);
        let p = profile(&f, &norm, 16).unwrap();
        for k in 0..p.len() {
            let t = p.levels[k];
            let exact = 2.0 * kappa * (1.0 - t).sqrt();
            assert!((p.lambda[k] / exact - 1.0).abs() < 1e-3, "λ at {t}");
        }
        assert!(p.lambda_prime_margin(kappa, norm.beta()) > -1e-6);
        assert!(matches!(profile(&f, &norm, 7), Err(Error::Config(_))));
    }
}
