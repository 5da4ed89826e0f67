//! Anisotropic norms `H`, their polars `H°`, derivatives, and `F = H²/2`.
//!
//! Built-in norms carry closed-form values, gradients and Hessians through
//! [`Gauge`]. A [`NormKind::Custom`] norm is any even, 1-homogeneous convex
//! function supplied as a closure; its derivatives fall back to central
//! differences with steps proportional to `|ξ|`, which keeps the gradient
//! 0-homogeneous and the Hessian (−1)-homogeneous.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::geom::{Mat2, Vec2};
use crate::report::{Check, Report};

/// Unit directions used to estimate the gauge bounds `α`, `β`.
pub const GAUGE_BOUND_DIRECTIONS: usize = 2048;
/// Default coarse scan size of the numeric polar.
pub const DEFAULT_POLAR_SAMPLES: usize = 720;
/// Default golden-section iteration cap of the numeric polar.
pub const DEFAULT_POLAR_REFINEMENT: usize = 100;

const GRAD_STEP: f64 = 1e-5;
const HESS_STEP: f64 = 1e-4;
const GOLDEN_WIDTH: f64 = 1e-12;

/// Closed-form gauges on ℝ².
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gauge {
    Euclidean,
    /// `(x²/a² + y²/b²)^{1/2}`
    Ellipse { a: f64, b: f64 },
    /// `(|x|^p + |y|^p)^{1/p}` for any `p > 1`.
    PNorm { p: f64 },
}

impl Gauge {
    pub fn value(&self, v: Vec2) -> f64 {
        match *self {
            Gauge::Euclidean => v.norm(),
            Gauge::Ellipse { a, b } => (v.x / a).hypot(v.y / b),
            Gauge::PNorm { p } => {
                let m = v.max_abs();
                if m == 0.0 {
                    return 0.0;
                }
                m * ((v.x.abs() / m).powf(p) + (v.y.abs() / m).powf(p)).powf(1.0 / p)
            }
        }
    }

    /// Gradient at `v ≠ 0`.
    pub fn grad(&self, v: Vec2) -> Vec2 {
        match *self {
            Gauge::Euclidean => v / v.norm(),
            Gauge::Ellipse { a, b } => {
                let h = self.value(v);
                Vec2::new(v.x / (a * a), v.y / (b * b)) / h
            }
            Gauge::PNorm { p } => {
                let h = self.value(v);
                Vec2::new(
                    v.x.signum() * (v.x.abs() / h).powf(p - 1.0),
                    v.y.signum() * (v.y.abs() / h).powf(p - 1.0),
                )
            }
        }
    }

    /// Hessian at `v ≠ 0`.
    pub fn hess(&self, v: Vec2) -> Mat2 {
        match *self {
            Gauge::Euclidean => {
                let r = v.norm();
                let u = v / r;
                Mat2::IDENTITY.add(&Mat2::outer(u, u).scale(-1.0)).scale(1.0 / r)
            }
            Gauge::Ellipse { a, b } => {
                let h = self.value(v);
                let g = self.grad(v);
                Mat2::diag(1.0 / (a * a * h), 1.0 / (b * b * h)).add(&Mat2::outer(g, g).scale(-1.0 / h))
            }
            Gauge::PNorm { p } => {
                let h = self.value(v);
                let g = self.grad(v);
                let d = Mat2::diag(
                    (v.x.abs() / h).powf(p - 2.0),
                    (v.y.abs() / h).powf(p - 2.0),
                );
                d.add(&Mat2::outer(g, g).scale(-1.0)).scale((p - 1.0) / h)
            }
        }
    }

    /// The polar gauge in closed form.
    pub fn dual(&self) -> Gauge {
        match *self {
            Gauge::Euclidean => Gauge::Euclidean,
            Gauge::Ellipse { a, b } => Gauge::Ellipse {
                a: 1.0 / a,
                b: 1.0 / b,
            },
            Gauge::PNorm { p } => Gauge::PNorm { p: p / (p - 1.0) },
        }
    }
}

type ScalarFn = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;
type MatrixFn = Arc<dyn Fn(Vec2) -> Mat2 + Send + Sync>;

/// A user-supplied norm with optional analytic derivatives.
#[derive(Clone)]
pub struct CustomNorm {
    label: String,
    value: ScalarFn,
    grad: Option<VectorFn>,
    hess: Option<MatrixFn>,
}

impl CustomNorm {
    pub fn new(label: impl Into<String>, value: impl Fn(Vec2) -> f64 + Send + Sync + 'static) -> Self {
        CustomNorm {
            label: label.into(),
            value: Arc::new(value),
            grad: None,
            hess: None,
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(g));
        self
    }

    pub fn with_hessian(mut self, h: impl Fn(Vec2) -> Mat2 + Send + Sync + 'static) -> Self {
        self.hess = Some(Arc::new(h));
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for CustomNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomNorm")
            .field("label", &self.label)
            .field("analytic_gradient", &self.grad.is_some())
            .field("analytic_hessian", &self.hess.is_some())
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum NormKind {
    Euclidean,
    Ellipse { a: f64, b: f64 },
    /// Restricted to `p ≥ 2` so that `H²` is `C²` away from the origin.
    PNorm { p: f64 },
    Custom(CustomNorm),
}

/// An even, 1-homogeneous convex gauge `H` with its estimated bounds
/// `α|ξ| ≤ H(ξ) ≤ β|ξ|`.
#[derive(Debug, Clone)]
pub struct Norm {
    kind: NormKind,
    alpha: f64,
    beta: f64,
}

impl Norm {
    pub fn euclidean() -> Norm {
        Norm::with_kind(NormKind::Euclidean).expect("euclidean norm is valid")
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Norm> {
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
            return Err(Error::Config(format!(
                "ellipse norm needs positive finite semi-axes, got a={a}, b={b}"
            )));
        }
        Norm::with_kind(NormKind::Ellipse { a, b })
    }

    pub fn pnorm(p: f64) -> Result<Norm> {
        if !(p.is_finite() && p >= 2.0) {
            return Err(Error::Config(format!(
                "p-norm requires finite p ≥ 2 (strong convexity of H²), got p={p}"
            )));
        }
        Norm::with_kind(NormKind::PNorm { p })
    }

    pub fn custom(c: CustomNorm) -> Result<Norm> {
        Norm::with_kind(NormKind::Custom(c))
    }

    fn with_kind(kind: NormKind) -> Result<Norm> {
        let mut norm = Norm {
            kind,
            alpha: 0.0,
            beta: 0.0,
        };
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for k in 0..GAUGE_BOUND_DIRECTIONS {
            let e = Vec2::from_angle(TAU * k as f64 / GAUGE_BOUND_DIRECTIONS as f64);
            let h = norm.h(e);
            let h_neg = norm.h(-e);
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::Config(format!(
                    "norm is not positive and finite in direction ({}, {})",
                    e.x, e.y
                )));
            }
            if (h - h_neg).abs() > 1e-9 * h {
                return Err(Error::Config("norm is not even: H(-ξ) ≠ H(ξ)".into()));
            }
            lo = lo.min(h);
            hi = hi.max(h);
        }
        norm.alpha = lo;
        norm.beta = hi;
        Ok(norm)
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    /// Lower gauge bound `α`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Upper gauge bound `β`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn label(&self) -> String {
        match &self.kind {
            NormKind::Euclidean => "euclidean".into(),
            NormKind::Ellipse { a, b } => format!("ellipse(a={a},b={b})"),
            NormKind::PNorm { p } => format!("pnorm(p={p})"),
            NormKind::Custom(c) => format!("custom({})", c.label),
        }
    }

    /// Closed-form gauge for built-in kinds.
    pub fn gauge(&self) -> Option<Gauge> {
        match self.kind {
            NormKind::Euclidean => Some(Gauge::Euclidean),
            NormKind::Ellipse { a, b } => Some(Gauge::Ellipse { a, b }),
            NormKind::PNorm { p } => Some(Gauge::PNorm { p }),
            NormKind::Custom(_) => None,
        }
    }

    /// Unchecked evaluation for inner loops.
    #[inline]
    pub(crate) fn h(&self, xi: Vec2) -> f64 {
        match &self.kind {
            NormKind::Custom(c) => (c.value)(xi),
            _ => self.gauge().expect("built-in").value(xi),
        }
    }

    /// Unchecked gradient; `xi` must be nonzero.
    pub(crate) fn h_grad(&self, xi: Vec2) -> Vec2 {
        match &self.kind {
            NormKind::Custom(c) => match &c.grad {
                Some(g) => g(xi),
                None => {
                    let s = GRAD_STEP * xi.norm();
                    let ex = Vec2::new(s, 0.0);
                    let ey = Vec2::new(0.0, s);
                    Vec2::new(
                        ((c.value)(xi + ex) - (c.value)(xi - ex)) / (2.0 * s),
                        ((c.value)(xi + ey) - (c.value)(xi - ey)) / (2.0 * s),
                    )
                }
            },
            _ => self.gauge().expect("built-in").grad(xi),
        }
    }

    /// Unchecked Hessian; `xi` must be nonzero.
    pub(crate) fn h_hess(&self, xi: Vec2) -> Mat2 {
        match &self.kind {
            NormKind::Custom(c) => {
                if let Some(h) = &c.hess {
                    return h(xi);
                }
                if c.grad.is_some() {
                    let s = GRAD_STEP * xi.norm();
                    let ex = Vec2::new(s, 0.0);
                    let ey = Vec2::new(0.0, s);
                    let gx = (self.h_grad(xi + ex) - self.h_grad(xi - ex)) / (2.0 * s);
                    let gy = (self.h_grad(xi + ey) - self.h_grad(xi - ey)) / (2.0 * s);
                    let off = 0.5 * (gx.y + gy.x);
                    return Mat2::symmetric(gx.x, off, gy.y);
                }
                let s = HESS_STEP * xi.norm();
                let f = |dx: f64, dy: f64| (c.value)(Vec2::new(xi.x + dx, xi.y + dy));
                let f0 = f(0.0, 0.0);
                let hxx = (f(s, 0.0) - 2.0 * f0 + f(-s, 0.0)) / (s * s);
                let hyy = (f(0.0, s) - 2.0 * f0 + f(0.0, -s)) / (s * s);
                let hxy = (f(s, s) - f(s, -s) - f(-s, s) + f(-s, -s)) / (4.0 * s * s);
                Mat2::symmetric(hxx, hxy, hyy)
            }
            _ => self.gauge().expect("built-in").hess(xi),
        }
    }

    /// `H(ξ)`; `H(0) = 0`.
    pub fn eval(&self, xi: Vec2) -> Result<f64> {
        ensure_finite(xi)?;
        if xi == Vec2::ZERO {
            return Ok(0.0);
        }
        Ok(self.h(xi))
    }

    /// `∇H(ξ)`, 0-homogeneous.
    pub fn grad(&self, xi: Vec2) -> Result<Vec2> {
        ensure_finite(xi)?;
        if xi == Vec2::ZERO {
            return Err(Error::SingularPoint);
        }
        Ok(self.h_grad(xi))
    }

    /// `∇²H(ξ)`, (−1)-homogeneous.
    pub fn hess(&self, xi: Vec2) -> Result<Mat2> {
        ensure_finite(xi)?;
        if xi == Vec2::ZERO {
            return Err(Error::SingularPoint);
        }
        Ok(self.h_hess(xi))
    }

    /// `∇²F(ξ)` with `F = H²/2`, i.e. `Hᵢ Hⱼ + H Hᵢⱼ`.
    pub fn f_hessian(&self, xi: Vec2) -> Result<Mat2> {
        ensure_finite(xi)?;
        if xi == Vec2::ZERO {
            return Err(Error::SingularPoint);
        }
        Ok(self.f_hess_unchecked(xi))
    }

    pub(crate) fn f_hess_unchecked(&self, xi: Vec2) -> Mat2 {
        let g = self.h_grad(xi);
        Mat2::outer(g, g).add(&self.h_hess(xi).scale(self.h(xi)))
    }
}

/// Serializable description of a built-in norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NormSpec {
    Euclidean,
    Ellipse { a: f64, b: f64 },
    Pnorm { p: f64 },
}

impl NormSpec {
    pub fn build(&self) -> Result<Norm> {
        match *self {
            NormSpec::Euclidean => Ok(Norm::euclidean()),
            NormSpec::Ellipse { a, b } => Norm::ellipse(a, b),
            NormSpec::Pnorm { p } => Norm::pnorm(p),
        }
    }

    /// `None` for custom norms.
    pub fn of(norm: &Norm) -> Option<NormSpec> {
        match norm.kind() {
            NormKind::Euclidean => Some(NormSpec::Euclidean),
            NormKind::Ellipse { a, b } => Some(NormSpec::Ellipse { a: *a, b: *b }),
            NormKind::PNorm { p } => Some(NormSpec::Pnorm { p: *p }),
            NormKind::Custom(_) => None,
        }
    }
}

/// Evaluation strategy for a polar norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolarMode {
    /// Closed form; only available for built-in norms.
    Analytic,
    /// Angular scan followed by golden-section refinement of
    /// `sup (ξ·v)/H(ξ)` over unit directions.
    NumericSup {
        samples: usize,
        refinement_iterations: usize,
    },
}

/// The polar gauge `H°(v) = sup_{ξ≠0} (ξ·v)/H(ξ)` of a [`Norm`].
#[derive(Debug, Clone)]
pub struct PolarNorm {
    base: Norm,
    mode: PolarMode,
    gauge: Option<Gauge>,
    kappa: Arc<OnceLock<f64>>,
}

impl PolarNorm {
    pub fn analytic(base: Norm) -> Result<PolarNorm> {
        let gauge = base
            .gauge()
            .ok_or_else(|| Error::Config("analytic polar requires a built-in norm".into()))?
            .dual();
        Ok(PolarNorm {
            base,
            mode: PolarMode::Analytic,
            gauge: Some(gauge),
            kappa: Arc::default(),
        })
    }

    pub fn numeric(base: Norm, samples: usize, refinement_iterations: usize) -> Result<PolarNorm> {
        if samples < 8 {
            return Err(Error::Config(format!(
                "numeric polar needs at least 8 angular samples, got {samples}"
            )));
        }
        Ok(PolarNorm {
            base,
            mode: PolarMode::NumericSup {
                samples,
                refinement_iterations,
            },
            gauge: None,
            kappa: Arc::default(),
        })
    }

    pub fn numeric_default(base: Norm) -> Result<PolarNorm> {
        PolarNorm::numeric(base, DEFAULT_POLAR_SAMPLES, DEFAULT_POLAR_REFINEMENT)
    }

    /// Analytic when the base norm is built in, numeric otherwise.
    pub fn best(base: Norm) -> Result<PolarNorm> {
        if base.gauge().is_some() {
            PolarNorm::analytic(base)
        } else {
            PolarNorm::numeric_default(base)
        }
    }

    pub fn base(&self) -> &Norm {
        &self.base
    }

    pub fn mode(&self) -> PolarMode {
        self.mode
    }

    /// Closed-form polar gauge, when the mode is analytic.
    pub fn gauge(&self) -> Option<Gauge> {
        self.gauge
    }

    /// Maximizing unit direction and the supremum value.
    fn sup(&self, v: Vec2, samples: usize, iters: usize) -> (f64, Vec2) {
        let phi = |th: f64| {
            let e = Vec2::from_angle(th);
            e.dot(v) / self.base.h(e)
        };
        let step = TAU / samples as f64;
        let (mut best_k, mut best) = (0usize, f64::NEG_INFINITY);
        for k in 0..samples {
            let val = phi(step * k as f64);
            if val > best {
                best = val;
                best_k = k;
            }
        }
        let center = step * best_k as f64;
        let (mut lo, mut hi) = (center - step, center + step);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = hi - inv_phi * (hi - lo);
        let mut d = lo + inv_phi * (hi - lo);
        let (mut fc, mut fd) = (phi(c), phi(d));
        for _ in 0..iters {
            if hi - lo < GOLDEN_WIDTH {
                break;
            }
            if fc > fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - inv_phi * (hi - lo);
                fc = phi(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + inv_phi * (hi - lo);
                fd = phi(d);
            }
        }
        let (th, val) = if fc > fd { (c, fc) } else { (d, fd) };
        if val >= best {
            (val, Vec2::from_angle(th))
        } else {
            (best, Vec2::from_angle(center))
        }
    }

    #[inline]
    pub(crate) fn h(&self, v: Vec2) -> f64 {
        if v == Vec2::ZERO {
            return 0.0;
        }
        match self.mode {
            PolarMode::Analytic => self.gauge.expect("analytic gauge").value(v),
            PolarMode::NumericSup {
                samples,
                refinement_iterations,
            } => self.sup(v, samples, refinement_iterations).0,
        }
    }

    pub(crate) fn h_grad(&self, v: Vec2) -> Vec2 {
        match self.mode {
            PolarMode::Analytic => self.gauge.expect("analytic gauge").grad(v),
            PolarMode::NumericSup {
                samples,
                refinement_iterations,
            } => {
                // Envelope theorem: the gradient is the maximizer scaled onto {H = 1}.
                let (_, e) = self.sup(v, samples, refinement_iterations);
                e / self.base.h(e)
            }
        }
    }

    /// `H°(v)`.
    pub fn eval(&self, v: Vec2) -> Result<f64> {
        ensure_finite(v)?;
        Ok(self.h(v))
    }

    /// `∇H°(v)` for `v ≠ 0`.
    pub fn grad(&self, v: Vec2) -> Result<Vec2> {
        ensure_finite(v)?;
        if v == Vec2::ZERO {
            return Err(Error::SingularPoint);
        }
        Ok(self.h_grad(v))
    }

    /// `∇²H°(v)`; only the analytic mode provides second derivatives.
    pub fn hess(&self, v: Vec2) -> Result<Mat2> {
        ensure_finite(v)?;
        if v == Vec2::ZERO {
            return Err(Error::SingularPoint);
        }
        match self.gauge {
            Some(g) => Ok(g.hess(v)),
            None => Err(Error::Config(
                "second derivatives of a numeric polar are not available".into(),
            )),
        }
    }

    /// `κ = |W|`, the area of the unit Wulff shape `{H° < 1}`, from two
    /// polygon resolutions combined by Richardson extrapolation. Cached.
    pub fn kappa(&self) -> f64 {
        *self.kappa.get_or_init(|| {
            let a1 = star_polygon_area(|e| 1.0 / self.h(e), 4096);
            let a2 = star_polygon_area(|e| 1.0 / self.h(e), 8192);
            (4.0 * a2 - a1) / 3.0
        })
    }
}

/// Area of the polygon with vertices `radius(e_k)·e_k` at `n` uniform angles.
pub(crate) fn star_polygon_area(radius: impl Fn(Vec2) -> f64, n: usize) -> f64 {
    let dth = TAU / n as f64;
    let rs: Vec<f64> = (0..n)
        .map(|k| radius(Vec2::from_angle(dth * k as f64)))
        .collect();
    let s = dth.sin();
    0.5 * s * (0..n).map(|k| rs[k] * rs[(k + 1) % n]).sum::<f64>()
}

/// Maximum residuals of the identities linking `H` and `H°`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    pub samples: usize,
    /// `|H(ξ) − ∇H(ξ)·ξ|`
    pub euler_norm: f64,
    /// `|H°(ξ) − ∇H°(ξ)·ξ|`
    pub euler_polar: f64,
    /// `max(|H(∇H°(ξ)) − 1|, |H°(∇H(ξ)) − 1|)`
    pub unit: f64,
    /// componentwise `|H°(ξ)∇H(∇H°(ξ)) − ξ|` and `|H(ξ)∇H°(∇H(ξ)) − ξ|`
    pub inverse: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.euler_norm
            .max(self.euler_polar)
            .max(self.unit)
            .max(self.inverse)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() <= tol
    }

    pub fn to_report(&self, prefix: &str, tol: f64) -> Report {
        let mut r = Report::default();
        r.push(Check::at_most(format!("{prefix}euler_norm"), self.euler_norm, tol));
        r.push(Check::at_most(format!("{prefix}euler_polar"), self.euler_polar, tol));
        r.push(Check::at_most(format!("{prefix}unit_level"), self.unit, tol));
        r.push(Check::at_most(format!("{prefix}inverse_map"), self.inverse, tol));
        r
    }
}

/// Seed for every randomized sampling in this module.
const IDENTITY_SEED: u64 = 0x5eed_0001;

pub fn identity_residuals(norm: &Norm, polar: &PolarNorm, samples: usize) -> Result<IdentityResiduals> {
    if samples == 0 {
        return Err(Error::Config("identity residuals need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(IDENTITY_SEED);
    let xis: Vec<Vec2> = (0..samples)
        .map(|_| Vec2::from_angle(rng.gen_range(0.0..TAU)) * rng.gen_range(0.2..5.0))
        .collect();
    let rows = crate::par::map_slice(&xis, |&xi| -> Result<[f64; 4]> {
        let h = norm.eval(xi)?;
        let hg = norm.grad(xi)?;
        let ho = polar.eval(xi)?;
        let hog = polar.grad(xi)?;
        let euler_norm = (h - hg.dot(xi)).abs();
        let euler_polar = (ho - hog.dot(xi)).abs();
        let unit = (norm.eval(hog)? - 1.0).abs().max((polar.eval(hg)? - 1.0).abs());
        let a = norm.grad(hog)? * ho - xi;
        let b = polar.grad(hg)? * h - xi;
        let inverse = a.max_abs().max(b.max_abs());
        Ok([euler_norm, euler_polar, unit, inverse])
    });
    let mut out = IdentityResiduals {
        samples,
        euler_norm: 0.0,
        euler_polar: 0.0,
        unit: 0.0,
        inverse: 0.0,
    };
    for row in rows {
        let [a, b, c, d] = row?;
        out.euler_norm = out.euler_norm.max(a);
        out.euler_polar = out.euler_polar.max(b);
        out.unit = out.unit.max(c);
        out.inverse = out.inverse.max(d);
    }
    Ok(out)
}
