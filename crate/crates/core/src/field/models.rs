//! Closed-form concave models: `u = c − g` with `g` smooth and convex, and
//! the distance-cube field `δ³ − d(x, Ω₀)³`.

use std::f64::consts::TAU;

use crate::anorm::PolarNorm;
use crate::convex_geom::ConvexCurve;
use crate::error::{Error, Result};
use crate::geom::{Mat2, Vec2};

use super::FieldModel;

/// Smooth convex potentials `g`.
#[derive(Debug, Clone)]
pub enum Potential {
    /// `½ (x − x₀)ᵀ Q (x − x₀)`
    Quadratic { q: Mat2, center: Vec2 },
    /// `H°(x − x₀)^γ`, `γ ≥ 2`
    GaugePower { polar: PolarNorm, gamma: f64, center: Vec2 },
    /// `½ xᵀ Q x + c₄ |x|⁴`
    QuadQuartic { q: Mat2, c4: f64 },
    /// `τ log Σ exp((nₖ·x − dₖ)/τ) + ε|x|²`, a rounded polygon.
    SoftMax {
        normals: Vec<Vec2>,
        offsets: Vec<f64>,
        tau: f64,
        eps: f64,
    },
    /// `exp(a·x) + ½ xᵀ Q x`
    ExpTilt { a: Vec2, q: Mat2 },
}

fn check_spd(q: &Mat2, what: &str) -> Result<()> {
    let (lo, _) = q.sym_eigenvalues();
    if !(q.is_finite() && lo > 0.0 && q.xy == q.yx) {
        return Err(Error::Config(format!("{what}: matrix must be symmetric positive definite")));
    }
    Ok(())
}

impl Potential {
    fn validate(&self) -> Result<()> {
        match self {
            Potential::Quadratic { q, .. } => check_spd(q, "quadratic potential"),
            Potential::GaugePower { gamma, .. } => {
                if !(gamma.is_finite() && *gamma >= 2.0) {
                    return Err(Error::Config(format!("gauge power needs γ ≥ 2, got {gamma}")));
                }
                Ok(())
            }
            Potential::QuadQuartic { q, c4 } => {
                check_spd(q, "quadratic-quartic potential")?;
                if !(c4.is_finite() && *c4 >= 0.0) {
                    return Err(Error::Config(format!("quartic weight must be ≥ 0, got {c4}")));
                }
                Ok(())
            }
            Potential::SoftMax {
                normals,
                offsets,
                tau,
                eps,
            } => {
                if normals.len() < 3 || normals.len() != offsets.len() {
                    return Err(Error::Config("soft-max potential needs ≥ 3 planes with offsets".into()));
                }
                if !(*tau > 0.0 && *eps > 0.0) {
                    return Err(Error::Config("soft-max potential needs τ > 0 and ε > 0".into()));
                }
                Ok(())
            }
            Potential::ExpTilt { q, a } => {
                if !a.is_finite() {
                    return Err(Error::Config("exp-tilt direction must be finite".into()));
                }
                check_spd(q, "exp-tilt potential")
            }
        }
    }

    pub fn value(&self, x: Vec2) -> f64 {
        match self {
            Potential::Quadratic { q, center } => {
                let y = x - *center;
                0.5 * q.bilinear(y, y)
            }
            Potential::GaugePower { polar, gamma, center } => polar.h(x - *center).powf(*gamma),
            Potential::QuadQuartic { q, c4 } => 0.5 * q.bilinear(x, x) + c4 * x.norm_sq() * x.norm_sq(),
            Potential::SoftMax {
                normals,
                offsets,
                tau,
                eps,
            } => {
                let z: Vec<f64> = normals
                    .iter()
                    .zip(offsets)
                    .map(|(n, d)| (n.dot(x) - d) / tau)
                    .collect();
                let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                tau * (m + z.iter().map(|zk| (zk - m).exp()).sum::<f64>().ln()) + eps * x.norm_sq()
            }
            Potential::ExpTilt { a, q } => a.dot(x).exp() + 0.5 * q.bilinear(x, x),
        }
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        match self {
            Potential::Quadratic { q, center } => q.mul_vec(x - *center),
            Potential::GaugePower { polar, gamma, center } => {
                let y = x - *center;
                if y == Vec2::ZERO {
                    return Vec2::ZERO;
                }
                polar.h_grad(y) * (gamma * polar.h(y).powf(gamma - 1.0))
            }
            Potential::QuadQuartic { q, c4 } => q.mul_vec(x) + x * (4.0 * c4 * x.norm_sq()),
            Potential::SoftMax { normals, eps, .. } => {
                let p = self.softmax_weights(x);
                let mut g = x * (2.0 * eps);
                for (pk, n) in p.iter().zip(normals) {
                    g += *n * *pk;
                }
                g
            }
            Potential::ExpTilt { a, q } => *a * a.dot(x).exp() + q.mul_vec(x),
        }
    }

    /// `None` where second derivatives are unavailable: the numeric-polar
    /// gauge power, and its center when `γ = 2`.
    pub fn hessian(&self, x: Vec2) -> Option<Mat2> {
        match self {
            Potential::Quadratic { q, .. } => Some(*q),
            Potential::GaugePower { polar, gamma, center } => {
                let y = x - *center;
                if y == Vec2::ZERO {
                    return (*gamma > 2.0).then_some(Mat2::diag(0.0, 0.0));
                }
                let r = polar.h(y);
                let g = polar.h_grad(y);
                let hh = polar.hess(y).ok()?;
                Some(
                    hh.scale(gamma * r.powf(gamma - 1.0))
                        .add(&Mat2::outer(g, g).scale(gamma * (gamma - 1.0) * r.powf(gamma - 2.0))),
                )
            }
            Potential::QuadQuartic { q, c4 } => {
                let r2 = x.norm_sq();
                Some(q.add(&Mat2::IDENTITY.scale(4.0 * c4 * r2)).add(&Mat2::outer(x, x).scale(8.0 * c4)))
            }
            Potential::SoftMax {
                normals, tau, eps, ..
            } => {
                let p = self.softmax_weights(x);
                let mut mean = Vec2::ZERO;
                let mut second = Mat2::diag(0.0, 0.0);
                for (pk, n) in p.iter().zip(normals) {
                    mean += *n * *pk;
                    second = second.add(&Mat2::outer(*n, *n).scale(*pk));
                }
                let cov = second.add(&Mat2::outer(mean, mean).scale(-1.0));
                Some(cov.scale(1.0 / tau).add(&Mat2::IDENTITY.scale(2.0 * eps)))
            }
            Potential::ExpTilt { a, q } => Some(Mat2::outer(*a, *a).scale(a.dot(x).exp()).add(q)),
        }
    }

    fn softmax_weights(&self, x: Vec2) -> Vec<f64> {
        let Potential::SoftMax {
            normals, offsets, tau, ..
        } = self
        else {
            unreachable!("soft-max weights of a non-soft-max potential")
        };
        let z: Vec<f64> = normals
            .iter()
            .zip(offsets)
            .map(|(n, d)| (n.dot(x) - d) / tau)
            .collect();
        let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = z.iter().map(|zk| (zk - m).exp()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|ek| ek / s).collect()
    }

    /// Minimizer: exact where known, damped Newton otherwise.
    fn minimizer(&self) -> Result<Vec2> {
        match self {
            Potential::Quadratic { center, .. } | Potential::GaugePower { center, .. } => Ok(*center),
            Potential::QuadQuartic { .. } => Ok(Vec2::ZERO),
            _ => {
                let mut x = Vec2::ZERO;
                for _ in 0..200 {
                    let g = self.gradient(x);
                    if g.norm() < 1e-15 {
                        break;
                    }
                    let h = self.hessian(x).expect("smooth potential");
                    let det = h.det();
                    let step = Vec2::new(h.yy * g.x - h.xy * g.y, -h.yx * g.x + h.xx * g.y) / det;
                    let f0 = self.value(x);
                    let mut s = 1.0;
                    while self.value(x - step * s) > f0 && s > 1e-12 {
                        s *= 0.5;
                    }
                    let next = x - step * s;
                    if next == x {
                        break;
                    }
                    x = next;
                }
                if self.gradient(x).norm() > 1e-10 {
                    return Err(Error::Consistency("Newton iteration for the maximum did not converge".into()));
                }
                Ok(x)
            }
        }
    }
}

/// `u = c − g` on `Ω = {g < c}`.
#[derive(Debug, Clone)]
pub struct ConcaveModel {
    potential: Potential,
    level: f64,
    argmax: Vec2,
    max: f64,
    boundary: ConvexCurve,
}

impl ConcaveModel {
    /// Builds the model and traces `∂Ω` with `n_boundary` rays from the
    /// maximum point.
    pub fn new(potential: Potential, level: f64, n_boundary: usize) -> Result<ConcaveModel> {
        potential.validate()?;
        if n_boundary < 16 {
            return Err(Error::Config(format!("boundary needs ≥ 16 vertices, got {n_boundary}")));
        }
        let argmax = potential.minimizer()?;
        let max = level - potential.value(argmax);
        if !(max.is_finite() && max > 0.0) {
            return Err(Error::Config(format!(
                "level {level} does not exceed the potential's minimum; the domain is empty"
            )));
        }
        let pts = (0..n_boundary)
            .map(|k| {
                let e = Vec2::from_angle(TAU * k as f64 / n_boundary as f64);
                let at = |r: f64| potential.value(argmax + e * r) - level;
                let mut hi = 1e-3;
                let mut guard = 0;
                while at(hi) < 0.0 {
                    hi *= 2.0;
                    guard += 1;
                    if guard > 200 {
                        return Err(Error::Config("potential is not coercive".into()));
                    }
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if at(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(argmax + e * lo)
            })
            .collect::<Result<Vec<_>>>()?;
        let boundary = ConvexCurve::hull(&pts)?;
        Ok(ConcaveModel {
            potential,
            level,
            argmax,
            max,
            boundary,
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn argmax(&self) -> Vec2 {
        self.argmax
    }

    /// Inscribed polygon of `Ω = {g < c}`.
    pub fn boundary(&self) -> &ConvexCurve {
        &self.boundary
    }
}

impl FieldModel for ConcaveModel {
    fn value(&self, x: Vec2) -> f64 {
        self.level - self.potential.value(x)
    }

    fn gradient(&self, x: Vec2) -> Option<Vec2> {
        Some(-self.potential.gradient(x))
    }

    fn hessian(&self, x: Vec2) -> Option<Mat2> {
        self.potential.hessian(x).map(|h| h.scale(-1.0))
    }

    fn max_value(&self) -> f64 {
        self.max
    }

    fn is_flat(&self, x: Vec2) -> bool {
        x == self.argmax
    }
}

/// `u = δ³ − d(x, Ω₀)³`: constant on `Ω₀`, zero on `∂(Ω₀ + δD)`.
#[derive(Debug, Clone)]
pub struct DistanceCube {
    omega0: ConvexCurve,
    delta: f64,
}

impl DistanceCube {
    pub fn new(omega0: ConvexCurve, delta: f64) -> DistanceCube {
        DistanceCube { omega0, delta }
    }

    pub fn omega0(&self) -> &ConvexCurve {
        &self.omega0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl FieldModel for DistanceCube {
    fn value(&self, x: Vec2) -> f64 {
        let d = self.omega0.nearest_feature(x).map_or(0.0, |f| f.0);
        self.delta * self.delta * self.delta - d * d * d
    }

    fn gradient(&self, x: Vec2) -> Option<Vec2> {
        Some(match self.omega0.nearest_feature(x) {
            None => Vec2::ZERO,
            Some((d, q, _)) => (x - q) * (-3.0 * d),
        })
    }

    fn hessian(&self, x: Vec2) -> Option<Mat2> {
        Some(match self.omega0.nearest_feature(x) {
            None => Mat2::diag(0.0, 0.0),
            Some((d, q, vertex)) => {
                let e = x - q;
                match vertex {
                    // d = |x − v|: ∇²d³ = 3(d I + e eᵀ/d)
                    Some(_) => Mat2::IDENTITY.scale(-3.0 * d).add(&Mat2::outer(e, e).scale(-3.0 / d)),
                    // d affine along the edge normal: ∇²d³ = 6 e eᵀ/d
                    None => Mat2::outer(e, e).scale(-6.0 / d),
                }
            }
        })
    }

    fn max_value(&self) -> f64 {
        self.delta * self.delta * self.delta
    }

    fn is_flat(&self, x: Vec2) -> bool {
        self.omega0.contains_tol(x, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anorm::Norm;

    fn fd_check(p: &Potential, x: Vec2) {
        let s = 1e-5;
        let ex = Vec2::new(s, 0.0);
        let ey = Vec2::new(0.0, s);
        let g = p.gradient(x);
        let gfd = Vec2::new(
            (p.value(x + ex) - p.value(x - ex)) / (2.0 * s),
            (p.value(x + ey) - p.value(x - ey)) / (2.0 * s),
        );
        assert!((g - gfd).norm() < 1e-7 * (1.0 + g.norm()), "{p:?} {g:?} {gfd:?}");
        let h = p.hessian(x).unwrap();
        let hx = (p.gradient(x + ex) - p.gradient(x - ex)) / (2.0 * s);
        let hy = (p.gradient(x + ey) - p.gradient(x - ey)) / (2.0 * s);
        let tol = 1e-6 * (1.0 + h.max_abs());
        assert!((h.xx - hx.x).abs() < tol && (h.yx - hx.y).abs() < tol, "{p:?}");
        assert!((h.xy - hy.x).abs() < tol && (h.yy - hy.y).abs() < tol, "{p:?}");
    }

    #[test]
    fn potential_derivatives_match_differences() {
        let polar = PolarNorm::analytic(Norm::pnorm(4.0).unwrap()).unwrap();
        let ps = [
            Potential::Quadratic {
                q: Mat2::symmetric(2.0, 0.3, 1.0),
                center: Vec2::new(0.1, 0.2),
            },
            Potential::GaugePower {
                polar,
                gamma: 3.0,
                center: Vec2::ZERO,
            },
            Potential::QuadQuartic {
                q: Mat2::diag(1.0, 2.0),
                c4: 0.5,
            },
            Potential::SoftMax {
                normals: vec![
                    Vec2::new(1.0, 0.0),
                    Vec2::new(0.0, 1.0),
                    Vec2::new(-1.0, 0.0),
                    Vec2::new(0.0, -1.0),
                ],
                offsets: vec![1.0; 4],
                tau: 0.1,
                eps: 0.1,
            },
            Potential::ExpTilt {
                a: Vec2::new(0.8, 0.3),
                q: Mat2::diag(1.5, 1.0),
            },
        ];
        for p in &ps {
            for x in [Vec2::new(0.3, 0.2), Vec2::new(-0.4, 0.7), Vec2::new(0.9, -0.1)] {
                fd_check(p, x);
            }
        }
    }

    #[test]
    fn boundary_is_zero_level() {
        let m = ConcaveModel::new(
            Potential::ExpTilt {
                a: Vec2::new(0.8, 0.3),
                q: Mat2::diag(1.5, 1.0),
            },
            1.6,
            256,
        )
        .unwrap();
        assert!(m.potential().gradient(m.argmax()).norm() < 1e-10);
        for &v in m.boundary().vertices() {
            assert!(m.value(v).abs() < 1e-12);
        }
    }

    #[test]
    fn distance_cube_derivatives() {
        let sq = ConvexCurve::unit_square();
        let m = DistanceCube::new(sq, 0.5);
        for x in [Vec2::new(1.2, 0.5), Vec2::new(1.2, 1.3), Vec2::new(-0.1, -0.2)] {
            let s = 1e-5;
            let ex = Vec2::new(s, 0.0);
            let ey = Vec2::new(0.0, s);
            let h = m.hessian(x).unwrap();
            let hx = (m.gradient(x + ex).unwrap() - m.gradient(x - ex).unwrap()) / (2.0 * s);
            let hy = (m.gradient(x + ey).unwrap() - m.gradient(x - ey).unwrap()) / (2.0 * s);
            assert!((h.xx - hx.x).abs() < 1e-6 && (h.yy - hy.y).abs() < 1e-6 && (h.xy - hy.x).abs() < 1e-6);
        }
        assert!(m.is_flat(Vec2::new(0.5, 0.5)));
        assert_eq!(m.value(Vec2::new(1.5, 0.5)), 0.0);
    }
}
