//! Small fixed-size linear algebra for the plane.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at angle `theta` from the positive x axis.
    #[inline]
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Vec2 { x: c, y: s }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3-D cross product.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Counterclockwise rotation by a right angle.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    #[inline]
    pub fn lerp(self, o: Vec2, s: f64) -> Vec2 {
        self + (o - self) * s
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

/// A 2x2 matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2 {
    pub xx: f64,
    pub xy: f64,
    pub yx: f64,
    pub yy: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        xx: 1.0,
        xy: 0.0,
        yx: 0.0,
        yy: 1.0,
    };

    #[inline]
    pub const fn new(xx: f64, xy: f64, yx: f64, yy: f64) -> Self {
        Mat2 { xx, xy, yx, yy }
    }

    #[inline]
    pub const fn diag(a: f64, b: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, b)
    }

    #[inline]
    pub const fn symmetric(xx: f64, xy: f64, yy: f64) -> Self {
        Mat2::new(xx, xy, xy, yy)
    }

    /// `a bᵀ`
    #[inline]
    pub fn outer(a: Vec2, b: Vec2) -> Self {
        Mat2::new(a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y)
    }

    /// Rotation by `theta` counterclockwise.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.yx
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    #[inline]
    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.xx, self.yx, self.xy, self.yy)
    }

    /// Cofactor matrix `[[b22, -b21], [-b12, b11]]`.
    #[inline]
    pub fn cofactor(&self) -> Mat2 {
        Mat2::new(self.yy, -self.yx, -self.xy, self.xx)
    }

    #[inline]
    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.yx * v.x + self.yy * v.y)
    }

    #[inline]
    pub fn matmul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.xx * o.xx + self.xy * o.yx,
            self.xx * o.xy + self.xy * o.yy,
            self.yx * o.xx + self.yy * o.yx,
            self.yx * o.xy + self.yy * o.yy,
        )
    }

    #[inline]
    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(self.xx * s, self.xy * s, self.yx * s, self.yy * s)
    }

    #[inline]
    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2::new(self.xx + o.xx, self.xy + o.xy, self.yx + o.yx, self.yy + o.yy)
    }

    /// Frobenius contraction `Σ aᵢⱼ bᵢⱼ`.
    #[inline]
    pub fn contract(&self, o: &Mat2) -> f64 {
        self.xx * o.xx + self.xy * o.xy + self.yx * o.yx + self.yy * o.yy
    }

    /// `aᵀ M b`
    #[inline]
    pub fn bilinear(&self, a: Vec2, b: Vec2) -> f64 {
        a.dot(self.mul_vec(b))
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn sym_eigenvalues(&self) -> (f64, f64) {
        let off = 0.5 * (self.xy + self.yx);
        let mean = 0.5 * (self.xx + self.yy);
        let half_diff = 0.5 * (self.xx - self.yy);
        let rad = half_diff.hypot(off);
        (mean - rad, mean + rad)
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yx.is_finite() && self.yy.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.xx
            .abs()
            .max(self.xy.abs())
            .max(self.yx.abs())
            .max(self.yy.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cofactor_of_symmetric_matches_adjugate() {
        let m = Mat2::symmetric(2.0, -1.0, 3.0);
        let c = m.cofactor();
        // M · adj(M)ᵀ = det(M) I for the cofactor convention used here.
        let p = m.matmul(&c.transpose());
        assert!((p.xx - m.det()).abs() < 1e-14);
        assert!(p.xy.abs() < 1e-14 && p.yx.abs() < 1e-14);
        assert!((p.yy - m.det()).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let (a, b) = Mat2::diag(3.0, -1.0).sym_eigenvalues();
        assert_eq!((a, b), (-1.0, 3.0));
    }
}
