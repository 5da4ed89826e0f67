//! The built-in suite of concave test fields. Each field is a closed-form
//! `u` whose right-hand side `f = det_H[u]` is computed rather than given.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::anorm::PolarNorm;
use crate::convex_geom::ConvexCurve;
use crate::error::{Error, Result};
use crate::field::{distance_cube_parts, ConcaveModel, FieldModel, Potential, ScalarField};
use crate::geom::{Mat2, Vec2};

/// Vertices used to trace `∂Ω` for the smooth presets.
pub const PRESET_BOUNDARY_VERTICES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldPreset {
    /// `1 − H°(x)²` on `W₁`.
    RadialQuadratic,
    /// `1 − H°(x)³` on `W₁`.
    RadialCubic,
    /// `½ − ½(x² + 4y²)`.
    Ellipse,
    /// Rotated, off-center quadratic with axis ratio 3.
    RotatedEllipse,
    /// `0.6 − ½(x² + 2y²) − ½|x|⁴`.
    QuadQuartic,
    /// Log-sum-exp rounded square.
    SoftSquare,
    /// Log-sum-exp rounded regular pentagon.
    SoftPentagon,
    /// Log-sum-exp rounded 4:1 rectangle, rotated.
    ThinRectangle,
    /// `1.6 − exp(a·x) − ½ xᵀQx`.
    ExpTilt,
    /// `δ³ − d(x, Ω₀)³` with `Ω₀` a square: constant on `Ω₀`.
    DistanceCube,
}

impl FieldPreset {
    pub const ALL: [FieldPreset; 10] = [
        FieldPreset::RadialQuadratic,
        FieldPreset::RadialCubic,
        FieldPreset::Ellipse,
        FieldPreset::RotatedEllipse,
        FieldPreset::QuadQuartic,
        FieldPreset::SoftSquare,
        FieldPreset::SoftPentagon,
        FieldPreset::ThinRectangle,
        FieldPreset::ExpTilt,
        FieldPreset::DistanceCube,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FieldPreset::RadialQuadratic => "radial-quadratic",
            FieldPreset::RadialCubic => "radial-cubic",
            FieldPreset::Ellipse => "ellipse",
            FieldPreset::RotatedEllipse => "rotated-ellipse",
            FieldPreset::QuadQuartic => "quad-quartic",
            FieldPreset::SoftSquare => "soft-square",
            FieldPreset::SoftPentagon => "soft-pentagon",
            FieldPreset::ThinRectangle => "thin-rectangle",
            FieldPreset::ExpTilt => "exp-tilt",
            FieldPreset::DistanceCube => "distance-cube",
        }
    }

    /// Whether `det_H[u] > 0` almost everywhere, as the comparison theorem
    /// requires. The distance-cube field is flat on `Ω₀`.
    pub fn positive_rhs(self) -> bool {
        self != FieldPreset::DistanceCube
    }

    /// Whether the field is symmetric decreasing with respect to `H°` on a
    /// Wulff shape centered at the origin.
    pub fn is_radial(self) -> bool {
        matches!(self, FieldPreset::RadialQuadratic | FieldPreset::RadialCubic)
    }

    /// Closed-form model and its domain `∂Ω`. Only the radial presets
    /// depend on the norm.
    pub fn model(self, polar: &PolarNorm) -> Result<(Arc<dyn FieldModel>, ConvexCurve)> {
        let concave = |p: Potential, level: f64| -> Result<(Arc<dyn FieldModel>, ConvexCurve)> {
            let m = ConcaveModel::new(p, level, PRESET_BOUNDARY_VERTICES)?;
            let b = m.boundary().clone();
            Ok((Arc::new(m), b))
        };
        let gauge = |gamma: f64| Potential::GaugePower {
            polar: polar.clone(),
            gamma,
            center: Vec2::ZERO,
        };
        match self {
            FieldPreset::RadialQuadratic => concave(gauge(2.0), 1.0),
            FieldPreset::RadialCubic => concave(gauge(3.0), 1.0),
            FieldPreset::Ellipse => concave(
                Potential::Quadratic {
                    q: Mat2::diag(1.0, 4.0),
                    center: Vec2::ZERO,
                },
                0.5,
            ),
            FieldPreset::RotatedEllipse => {
                let r = Mat2::rotation(0.6);
                let q = r.matmul(&Mat2::diag(1.0, 9.0)).matmul(&r.transpose());
                concave(
                    Potential::Quadratic {
                        q: Mat2::symmetric(q.xx, 0.5 * (q.xy + q.yx), q.yy),
                        center: Vec2::new(0.2, -0.1),
                    },
                    0.5,
                )
            }
            FieldPreset::QuadQuartic => concave(
                Potential::QuadQuartic {
                    q: Mat2::diag(1.0, 2.0),
                    c4: 0.5,
                },
                0.6,
            ),
            FieldPreset::SoftSquare => {
                let normals: Vec<Vec2> = (0..4).map(|k| Vec2::from_angle(FRAC_PI_2 * k as f64)).collect();
                concave(soft(normals, vec![1.0; 4], 0.1), 0.0)
            }
            FieldPreset::SoftPentagon => {
                let normals: Vec<Vec2> = (0..5)
                    .map(|k| Vec2::from_angle(TAU * k as f64 / 5.0 + FRAC_PI_2))
                    .collect();
                concave(soft(normals, vec![0.8; 5], 0.08), 0.0)
            }
            FieldPreset::ThinRectangle => {
                let normals: Vec<Vec2> = (0..4).map(|k| Vec2::from_angle(0.4 + FRAC_PI_2 * k as f64)).collect();
                concave(soft(normals, vec![1.0, 0.25, 1.0, 0.25], 0.05), 0.0)
            }
            FieldPreset::ExpTilt => concave(
                Potential::ExpTilt {
                    a: Vec2::new(0.8, 0.3),
                    q: Mat2::diag(1.5, 1.0),
                },
                1.6,
            ),
            FieldPreset::DistanceCube => distance_cube_parts(&distance_cube_core()?, 0.5),
        }
    }

    /// The preset sampled on a grid of spacing `h`.
    pub fn field(self, polar: &PolarNorm, h: f64) -> Result<ScalarField> {
        let (m, b) = self.model(polar)?;
        ScalarField::from_model(m, b, h)
    }
}

fn soft(normals: Vec<Vec2>, offsets: Vec<f64>, tau: f64) -> Potential {
    Potential::SoftMax {
        normals,
        offsets,
        tau,
        eps: 0.1,
    }
}

/// `Ω₀ = [−½, ½]²` of the distance-cube preset.
pub fn distance_cube_core() -> Result<ConvexCurve> {
    ConvexCurve::new(vec![
        Vec2::new(-0.5, -0.5),
        Vec2::new(0.5, -0.5),
        Vec2::new(0.5, 0.5),
        Vec2::new(-0.5, 0.5),
    ])
}

impl fmt::Display for FieldPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FieldPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<FieldPreset> {
        FieldPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown field preset {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anorm::Norm;

    #[test]
    fn names_roundtrip() {
        for p in FieldPreset::ALL {
            assert_eq!(p.name().parse::<FieldPreset>().unwrap(), p);
        }
        assert!("disk".parse::<FieldPreset>().is_err());
    }

    #[test]
    fn every_preset_is_a_valid_field() {
        let polar = PolarNorm::analytic(Norm::ellipse(2.0, 1.0).unwrap()).unwrap();
        for p in FieldPreset::ALL {
            let f = p.field(&polar, 1.0 / 32.0).unwrap();
            let r = f.check_invariants(200, 7);
            assert!(r.all_pass(), "{p}: {:?}", r.failures().collect::<Vec<_>>());
            assert!(f.boundary().area() > 0.1, "{p}");
        }
    }

    #[test]
    fn thin_rectangle_is_elongated() {
        let polar = PolarNorm::analytic(Norm::euclidean()).unwrap();
        let (_, b) = FieldPreset::ThinRectangle.model(&polar).unwrap();
        let p = b.perimeter();
        // a 2 × ½ rectangle has 4π·area/perimeter² = 4π/25
        assert!(4.0 * std::f64::consts::PI * b.area() / (p * p) < 0.7);
    }
}
