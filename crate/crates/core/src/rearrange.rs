//! Rearrangements of a field: the decreasing rearrangement `u*` and its
//! convex symmetrand `u^✧(x) = u*(κH°(x)²)`, the perimeter rearrangement
//! `u^♦` (generalized inverse of `λ_H`) and its star symmetrand
//! `u^☆(x) = u^♦(2κH°(x))` on `Ω^☆ = W_R`, `R = P_H(Ω)/(2κ)`.
//!
//! All one-dimensional objects are piecewise linear on their breakpoints,
//! and all rearranged fields are centered at the origin.

use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::anorm::{Norm, PolarNorm};
use crate::convex_geom::{perimeter_h, wulff_curve, WulffShape};
use crate::error::{Error, Result};
use crate::field::{
    extract_level_set, hessian_integral, lp_norm, profile, FieldModel, HessianIntegral, LevelSetProfile,
    ScalarField,
};
use crate::geom::Vec2;
use crate::par;
use crate::report::{fmt_f64, Check, Report};

/// Number of levels used by the rearrangements unless a caller says otherwise.
pub const DEFAULT_LEVELS: usize = 64;

/// Vertices of the Wulff polygon bounding a resampled symmetrand.
pub const SYMMETRAND_BOUNDARY_VERTICES: usize = 1024;

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProfileKind {
    /// `u*` or `f*`, parametrized by area `s ∈ [0, |Ω|]`.
    DecreasingRearrangement,
    /// `u^♦`, parametrized by anisotropic perimeter `s ∈ [0, P_H(Ω)]`.
    PerimeterRearrangement,
    /// `w`, parametrized by Wulff radius `r ∈ [0, R]`.
    RadialSolution,
}

/// Non-increasing piecewise-linear function on `[0, s_max]`, extended by
/// zero beyond `s_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    kind: ProfileKind,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    node_derivatives: Option<Vec<f64>>,
    cumulative: Vec<f64>,
}

#[derive(Serialize)]
struct ProfileRow {
    s: String,
    value: String,
    derivative: String,
}

impl RadialProfile {
    /// `breakpoints` start at 0 and increase strictly; `values` do not increase.
    pub fn new(kind: ProfileKind, breakpoints: Vec<f64>, values: Vec<f64>) -> Result<RadialProfile> {
        if breakpoints.len() < 2 || breakpoints.len() != values.len() {
            return Err(Error::Profile(format!(
                "need at least two matching samples, got {} breakpoints and {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::Profile(format!("profile must start at 0, got {}", breakpoints[0])));
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Profile("non-finite profile sample".into()));
        }
        for k in 1..breakpoints.len() {
            if !(breakpoints[k] > breakpoints[k - 1]) {
                return Err(Error::Profile(format!("breakpoints not increasing at index {k}")));
            }
            if values[k] > values[k - 1] {
                return Err(Error::Profile(format!("profile increases at s = {}", breakpoints[k])));
            }
        }
        let mut cumulative = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for k in 1..values.len() {
            acc += 0.5 * (values[k] + values[k - 1]) * (breakpoints[k] - breakpoints[k - 1]);
            cumulative.push(acc);
        }
        Ok(RadialProfile {
            kind,
            breakpoints,
            values,
            node_derivatives: None,
            cumulative,
        })
    }

    /// Attaches exact derivatives at the breakpoints.
    pub fn with_node_derivatives(mut self, d: Vec<f64>) -> Result<RadialProfile> {
        if d.len() != self.values.len() {
            return Err(Error::Profile(format!(
                "{} node derivatives for {} breakpoints",
                d.len(),
                self.values.len()
            )));
        }
        if d.iter().any(|v| !(v.is_finite() && *v <= 0.0)) {
            return Err(Error::Profile("node derivatives must be finite and ≤ 0".into()));
        }
        self.node_derivatives = Some(d);
        Ok(self)
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node_derivatives(&self) -> Option<&[f64]> {
        self.node_derivatives.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn s_max(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1]
    }

    /// Value at `s = 0`, the supremum of the profile.
    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    /// Interval `k` with `b[k] ≤ s < b[k+1]`, clamped to the last interval.
    fn interval(&self, s: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b <= s);
        k.saturating_sub(1).min(self.len() - 2)
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.values[0];
        }
        let smax = self.s_max();
        if s > smax {
            return 0.0;
        }
        let k = self.interval(s);
        let (b0, b1) = (self.breakpoints[k], self.breakpoints[k + 1]);
        if s == b0 {
            return self.values[k];
        }
        if s == b1 {
            return self.values[k + 1];
        }
        self.values[k] + (self.values[k + 1] - self.values[k]) * (s - b0) / (b1 - b0)
    }

    /// Slope on each interval.
    pub fn slopes(&self) -> Vec<f64> {
        (0..self.len() - 1)
            .map(|k| (self.values[k + 1] - self.values[k]) / (self.breakpoints[k + 1] - self.breakpoints[k]))
            .collect()
    }

    /// Backward slope: the slope of the interval `(b[k−1], b[k]]` holding `s`.
    pub fn derivative(&self, s: f64) -> f64 {
        if s > self.s_max() {
            return 0.0;
        }
        let k = self.breakpoints.partition_point(|&b| b < s).clamp(1, self.len() - 1);
        (self.values[k] - self.values[k - 1]) / (self.breakpoints[k] - self.breakpoints[k - 1])
    }

    /// `∫₀^a` of the profile, exact for the piecewise-linear interpolant.
    pub fn integral_to(&self, a: f64) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        if a >= self.s_max() {
            return self.cumulative[self.len() - 1];
        }
        let k = self.interval(a);
        let b0 = self.breakpoints[k];
        self.cumulative[k] + 0.5 * (self.values[k] + self.eval(a)) * (a - b0)
    }

    /// Profile multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<RadialProfile> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidInput(format!("scale must be positive, got {c}")));
        }
        let p = RadialProfile::new(
            self.kind,
            self.breakpoints.clone(),
            self.values.iter().map(|v| v * c).collect(),
        )?;
        match &self.node_derivatives {
            Some(d) => p.with_node_derivatives(d.iter().map(|v| v * c).collect()),
            None => Ok(p),
        }
    }

    /// CSV `s,value,derivative`; the derivative column holds the node
    /// derivatives if present, else backward slopes.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for k in 0..self.len() {
            let d = match &self.node_derivatives {
                Some(d) => d[k],
                None => self.derivative(self.breakpoints[k]),
            };
            w.serialize(ProfileRow {
                s: fmt_f64(self.breakpoints[k]),
                value: fmt_f64(self.values[k]),
                derivative: fmt_f64(d),
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Generalized inverse of a strictly decreasing table `t_k ↦ s_k`, with the
/// top node `(0, M)`.
fn inverse_table(kind: ProfileKind, levels: &[f64], s: &[f64], max: f64, what: &str) -> Result<RadialProfile> {
    for k in 1..s.len() {
        if !(s[k] < s[k - 1]) {
            return Err(Error::Profile(format!("{what} is not strictly decreasing at t = {}", levels[k])));
        }
    }
    if !(s[s.len() - 1] > 0.0) {
        return Err(Error::Profile(format!("{what} must stay positive below the maximum")));
    }
    let mut b = Vec::with_capacity(s.len() + 1);
    let mut v = Vec::with_capacity(s.len() + 1);
    b.push(0.0);
    v.push(max);
    for k in (0..s.len()).rev() {
        b.push(s[k]);
        v.push(levels[k]);
    }
    RadialProfile::new(kind, b, v)
}

/// `u*(s) = sup{t : μ(t) > s}` from `n` level sets.
pub fn decreasing_rearrangement(field: &ScalarField, n: usize) -> Result<RadialProfile> {
    if n < 8 {
        return Err(Error::Config(format!("rearrangement needs at least 8 levels, got {n}")));
    }
    let m = field.max_value();
    let levels: Vec<f64> = (0..n).map(|k| m * k as f64 / n as f64).collect();
    let mu = par::map_slice(&levels, |&t| extract_level_set(field, t).map(|c| c.area()))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    inverse_table(ProfileKind::DecreasingRearrangement, &levels, &mu, m, "μ")
}

/// `u*` from the `μ` column of a profile.
pub fn decreasing_from_profile(p: &LevelSetProfile) -> Result<RadialProfile> {
    inverse_table(ProfileKind::DecreasingRearrangement, &p.levels, &p.mu, p.max_value, "μ")
}

/// Decreasing rearrangement of weighted samples, averaged over `n_bins`
/// equal-area bins. Nodes sit at bin midpoints, plus both ends.
pub fn decreasing_from_samples(values: &[f64], weights: &[f64], n_bins: usize) -> Result<RadialProfile> {
    if values.len() != weights.len() || values.is_empty() {
        return Err(Error::InvalidData("samples and weights must be nonempty and match".into()));
    }
    if n_bins < 8 {
        return Err(Error::Config(format!("need at least 8 bins, got {n_bins}")));
    }
    if values.iter().any(|v| !v.is_finite()) || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidData("samples must be finite with nonnegative weights".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidData("total weight must be positive".into()));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let width = total / n_bins as f64;
    let mut avg = Vec::with_capacity(n_bins);
    let mut it = order.iter().map(|&i| (values[i], weights[i])).filter(|(_, w)| *w > 0.0);
    let mut cur = it.next();
    let mut left = cur.map_or(0.0, |c| c.1);
    for _ in 0..n_bins {
        let mut need = width;
        let mut acc = 0.0;
        while need > 0.0 {
            let Some((v, _)) = cur else { break };
            let take = left.min(need);
            acc += v * take;
            need -= take;
            left -= take;
            if left <= 0.0 {
                cur = it.next();
                left = cur.map_or(0.0, |c| c.1);
            }
        }
        if need > 0.0 {
            // roundoff shortfall in the last bin
            acc += values[order[order.len() - 1]] * need;
        }
        let a = acc / width;
        avg.push(avg.last().map_or(a, |&p: &f64| p.min(a)));
    }
    let mut b = Vec::with_capacity(n_bins + 2);
    let mut v = Vec::with_capacity(n_bins + 2);
    b.push(0.0);
    v.push(avg[0]);
    for (k, a) in avg.iter().enumerate() {
        b.push((k as f64 + 0.5) * width);
        v.push(*a);
    }
    b.push(total);
    v.push(avg[n_bins - 1]);
    RadialProfile::new(ProfileKind::DecreasingRearrangement, b, v)
}

/// `u^♦(s) = sup{t ≥ 0 : λ_H(t) ≥ s}` by linear interpolation of the table.
pub fn perimeter_rearrangement(p: &LevelSetProfile) -> Result<RadialProfile> {
    inverse_table(ProfileKind::PerimeterRearrangement, &p.levels, &p.lambda, p.max_value, "λ_H")
}

/// A radial profile composed with the polar norm, centered at the origin.
#[derive(Debug, Clone)]
pub struct SymmetrizedField {
    profile: RadialProfile,
    polar: PolarNorm,
    kappa: f64,
    domain_radius: f64,
    center: Vec2,
}

impl SymmetrizedField {
    pub fn new(profile: RadialProfile, polar: PolarNorm) -> SymmetrizedField {
        let kappa = polar.kappa();
        let s = profile.s_max();
        let domain_radius = match profile.kind() {
            ProfileKind::DecreasingRearrangement => (s / kappa).sqrt(),
            ProfileKind::PerimeterRearrangement => s / (2.0 * kappa),
            ProfileKind::RadialSolution => s,
        };
        SymmetrizedField {
            profile,
            polar,
            kappa,
            domain_radius,
            center: Vec2::ZERO,
        }
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn polar(&self) -> &PolarNorm {
        &self.polar
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `R` with `Ω^☆ = W_R`.
    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    pub fn center(&self) -> Vec2 {
        self.center
    }

    pub fn max_value(&self) -> f64 {
        self.profile.max_value()
    }

    fn param(&self, r: f64) -> f64 {
        match self.profile.kind() {
            ProfileKind::DecreasingRearrangement => self.kappa * r * r,
            ProfileKind::PerimeterRearrangement => 2.0 * self.kappa * r,
            ProfileKind::RadialSolution => r,
        }
    }

    pub fn eval(&self, x: Vec2) -> f64 {
        let r = self.polar.h(x - self.center);
        self.profile.eval(self.param(r))
    }

    /// `‖·‖_{L^p(W_R)}` from the one-dimensional profile; the Wulff shell
    /// at radius `r` has area element `2κr dr`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p == f64::INFINITY {
            return Ok(self.max_value());
        }
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::Config(format!("L^p norm needs p ≥ 1, got {p}")));
        }
        let kappa = self.kappa;
        let jac = |s: f64| match self.profile.kind() {
            ProfileKind::DecreasingRearrangement => 1.0,
            ProfileKind::PerimeterRearrangement => s / (2.0 * kappa),
            ProfileKind::RadialSolution => 2.0 * kappa * s,
        };
        let b = self.profile.breakpoints();
        let v = self.profile.values();
        let terms: Vec<f64> = (0..b.len() - 1)
            .map(|k| {
                let (s0, s1) = (b[k], b[k + 1]);
                let half = 0.5 * (s1 - s0);
                GAUSS4
                    .iter()
                    .map(|&(z, w)| {
                        let s = s0 + half * (1.0 + z);
                        let u = v[k] + (v[k + 1] - v[k]) * (1.0 + z) * 0.5;
                        w * half * u.max(0.0).powf(p) * jac(s)
                    })
                    .sum()
            })
            .collect();
        Ok(par::ordered_sum(&terms).powf(1.0 / p))
    }

    /// Re-samples onto a grid of spacing `h` over a polygonal `W_R`.
    pub fn to_scalar_field(&self, h: f64) -> Result<ScalarField> {
        let shape = WulffShape::new(self.polar.clone(), self.domain_radius, self.center)?;
        let polygon = wulff_curve(&shape, SYMMETRAND_BOUNDARY_VERTICES)?;
        // inscribed polygons lose area; match |W_R| = κR² exactly
        let target = self.kappa * self.domain_radius * self.domain_radius;
        let boundary = polygon
            .translate(-self.center)
            .scaled((target / polygon.area()).sqrt())
            .translate(self.center);
        ScalarField::from_model(Arc::new(SymmetrandModel(self.clone())), boundary, h)
    }
}

#[derive(Debug)]
struct SymmetrandModel(SymmetrizedField);

impl FieldModel for SymmetrandModel {
    fn value(&self, x: Vec2) -> f64 {
        self.0.eval(x)
    }

    fn max_value(&self) -> f64 {
        self.0.max_value()
    }
}

/// `u^✧(x) = u*(κH°(x)²)`.
pub fn convex_symmetrand(field: &ScalarField, polar: &PolarNorm, n_levels: usize) -> Result<SymmetrizedField> {
    Ok(SymmetrizedField::new(decreasing_rearrangement(field, n_levels)?, polar.clone()))
}

/// `u^☆(x) = u^♦(2κH°(x))`.
pub fn star_symmetrand(field: &ScalarField, norm: &Norm, polar: &PolarNorm, n_levels: usize) -> Result<SymmetrizedField> {
    let p = profile(field, norm, n_levels)?;
    Ok(SymmetrizedField::new(perimeter_rearrangement(&p)?, polar.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LpComparison {
    pub p: f64,
    pub field: f64,
    pub star: f64,
    /// `(‖u^☆‖_p − ‖u‖_p) / ‖u‖_p`
    pub margin: f64,
}

/// `‖u‖_p` against `‖u^☆‖_p` for each `p`.
pub fn lp_report(field: &ScalarField, star: &SymmetrizedField, ps: &[f64]) -> Result<Vec<LpComparison>> {
    ps.iter()
        .map(|&p| {
            let a = lp_norm(field, p)?;
            let b = star.lp_norm(p)?;
            Ok(LpComparison {
                p,
                field: a,
                star: b,
                margin: (b - a) / a,
            })
        })
        .collect()
}

/// Margins of at least −1% for finite `p`; `p = ∞` must match to 1e-9.
pub fn lp_checks(rows: &[LpComparison], prefix: &str) -> Report {
    let mut r = Report::default();
    for c in rows {
        if c.p == f64::INFINITY {
            r.push(Check::at_most(format!("{prefix}lp_margin_inf_abs"), c.margin.abs(), 1e-9));
        } else {
            r.push(Check::at_least(format!("{prefix}lp_margin_p{}", c.p), c.margin, -0.01));
        }
    }
    r
}

/// Hessian integral of the radial function a profile describes:
/// `κ∫|w'|³dr` for a radius profile, `4κ³∫|u^♦'|³ds` for a perimeter
/// profile and `4κ²∫σ|u*'|³dσ` for an area profile.
pub fn radial_hessian_integral(profile: &RadialProfile, kappa: f64) -> Result<f64> {
    if profile.len() < 2 {
        return Err(Error::Profile("Hessian integral needs at least two samples".into()));
    }
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::Config(format!("κ must be positive, got {kappa}")));
    }
    let b = profile.breakpoints();
    let slopes = profile.slopes();
    let cube = |v: f64| v.abs() * v.abs() * v.abs();
    let terms: Vec<f64> = match (profile.kind(), profile.node_derivatives()) {
        (ProfileKind::RadialSolution, Some(d)) => (0..b.len() - 1)
            .map(|k| 0.5 * (cube(d[k]) + cube(d[k + 1])) * (b[k + 1] - b[k]) * kappa)
            .collect(),
        (ProfileKind::RadialSolution, None) => (0..slopes.len())
            .map(|k| kappa * cube(slopes[k]) * (b[k + 1] - b[k]))
            .collect(),
        (ProfileKind::PerimeterRearrangement, _) => (0..slopes.len())
            .map(|k| 4.0 * kappa * kappa * kappa * cube(slopes[k]) * (b[k + 1] - b[k]))
            .collect(),
        (ProfileKind::DecreasingRearrangement, _) => (0..slopes.len())
            .map(|k| 2.0 * kappa * kappa * cube(slopes[k]) * (b[k + 1] * b[k + 1] - b[k] * b[k]))
            .collect(),
    };
    Ok(par::ordered_sum(&terms))
}

/// `I_H[u, Ω]` against `I_H[u^☆, Ω^☆]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyaSzego {
    pub field_integral: HessianIntegral,
    pub star_integral: f64,
    /// `(I_H[u] − I_H[u^☆]) / I_H[u]` with the median field estimate.
    pub margin: f64,
}

impl PolyaSzego {
    pub fn field_value(&self) -> f64 {
        self.field_integral.best()
    }

    pub fn to_report(&self, prefix: &str) -> Report {
        let mut r = Report::default();
        r.push(Check::at_least(format!("{prefix}polya_szego_margin"), self.margin, -0.02));
        r
    }
}

pub fn polya_szego_report(field: &ScalarField, norm: &Norm, polar: &PolarNorm, n_levels: usize) -> Result<PolyaSzego> {
    let p = profile(field, norm, n_levels)?;
    polya_szego_from_profile(field, norm, polar, &p)
}

pub fn polya_szego_from_profile(
    field: &ScalarField,
    norm: &Norm,
    polar: &PolarNorm,
    p: &LevelSetProfile,
) -> Result<PolyaSzego> {
    let field_integral = hessian_integral(field, norm)?;
    let star_integral = radial_hessian_integral(&perimeter_rearrangement(p)?, polar.kappa())?;
    let i = field_integral.best();
    Ok(PolyaSzego {
        field_integral,
        star_integral,
        margin: (i - star_integral) / i,
    })
}

/// `max_k |u^♦(λ_H(t_k)) − t_k|`.
pub fn round_trip_error(p: &LevelSetProfile, u_sharp: &RadialProfile) -> f64 {
    p.lambda
        .iter()
        .zip(&p.levels)
        .map(|(&l, &t)| (u_sharp.eval(l) - t).abs())
        .fold(0.0, f64::max)
}

/// `sup|u^♦'|` divided by the bound `β max|∇u| / (2κ)`.
pub fn lipschitz_ratio(u_sharp: &RadialProfile, kappa: f64, beta: f64, max_grad: f64) -> f64 {
    let sup = u_sharp.slopes().iter().map(|s| s.abs()).fold(0.0, f64::max);
    sup / (beta * max_grad / (2.0 * kappa))
}

/// Largest increase of slope between neighbouring intervals; at most zero
/// for a concave profile.
pub fn concavity_defect(profile: &RadialProfile) -> f64 {
    profile
        .slopes()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Worst relative gap between `P_H({u^☆ > t})`, measured on a resampled
/// grid of spacing `h`, and `λ_H(t)`.
pub fn perimeter_preservation(star: &SymmetrizedField, p: &LevelSetProfile, norm: &Norm, h: f64) -> Result<f64> {
    let f = star.to_scalar_field(h)?;
    let gaps = par::map_range(p.len(), |k| -> Result<f64> {
        let c = extract_level_set(&f, p.levels[k])?;
        Ok((perimeter_h(&c, norm)? / p.lambda[k] - 1.0).abs())
    });
    let mut worst = 0.0f64;
    for g in gaps {
        worst = worst.max(g?);
    }
    Ok(worst)
}

/// Worst gap, in cell areas, between `μ(t)` of the field, `|{u^✧ > t}|`
/// measured on a resampled grid, and `|{u* > t}|`.
pub fn equimeasurability_defect(convex: &SymmetrizedField, p: &LevelSetProfile, h: f64) -> Result<f64> {
    let f = convex.to_scalar_field(h)?;
    let u_star = convex.profile();
    let gaps = par::map_range(p.len(), |k| -> Result<f64> {
        let t = p.levels[k];
        let a = extract_level_set(&f, t)?.area();
        // |{u* > t}| is the breakpoint whose value is t
        let b = u_star
            .values()
            .iter()
            .position(|&v| v == t)
            .map(|i| u_star.breakpoints()[i])
            .ok_or_else(|| Error::Profile(format!("level {t} is not a node of u*")))?;
        Ok((a - p.mu[k]).abs().max((b - p.mu[k]).abs()))
    });
    let mut worst = 0.0f64;
    for g in gaps {
        worst = worst.max(g?);
    }
    Ok(worst / f.grid().cell_area())
}

/// `max |u^☆ − u|` over the field's grid nodes inside `Ω`.
pub fn fixed_point_defect(field: &ScalarField, star: &SymmetrizedField) -> f64 {
    let g = field.grid();
    let diffs = par::map_range(g.len(), |k| {
        if !field.mask()[k] {
            return 0.0;
        }
        let x = g.node(k % g.nx, k / g.nx);
        (star.eval(x) - field.values()[k]).abs()
    });
    diffs.into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ConcaveModel, Potential};
    use crate::manufactured::FieldPreset;
    use std::f64::consts::PI;

    fn linear(kind: ProfileKind, s_max: f64, top: f64, n: usize) -> RadialProfile {
        let b: Vec<f64> = (0..=n).map(|k| s_max * k as f64 / n as f64).collect();
        let v = b.iter().map(|s| top * (1.0 - s / s_max)).collect();
        RadialProfile::new(kind, b, v).unwrap()
    }

    #[test]
    fn profile_validation_and_eval() {
        assert!(RadialProfile::new(ProfileKind::RadialSolution, vec![0.0], vec![1.0]).is_err());
        assert!(RadialProfile::new(ProfileKind::RadialSolution, vec![0.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(RadialProfile::new(ProfileKind::RadialSolution, vec![0.1, 1.0], vec![1.0, 0.0]).is_err());
        let p = RadialProfile::new(ProfileKind::RadialSolution, vec![0.0, 1.0, 3.0], vec![2.0, 1.0, 0.0]).unwrap();
        assert_eq!(p.eval(-1.0), 2.0);
        assert_eq!(p.eval(1.0), 1.0);
        assert_eq!(p.eval(2.0), 0.5);
        assert_eq!(p.eval(3.5), 0.0);
        assert_eq!(p.derivative(1.0), -1.0);
        assert_eq!(p.derivative(1.5), -0.5);
        assert_eq!(p.integral_to(1.0), 1.5);
        assert_eq!(p.integral_to(2.0), 2.25);
        assert_eq!(p.integral_to(9.0), 2.5);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("s,value,derivative\n"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn constant_samples_rearrange_to_constant() {
        let f = decreasing_from_samples(&[3.0; 10], &[0.2; 10], 16).unwrap();
        assert!(f.values().iter().all(|&v| (v - 3.0).abs() < 1e-12));
        assert!((f.s_max() - 2.0).abs() < 1e-12);
        assert!((f.integral_to(2.0) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn sample_rearrangement_of_a_ramp() {
        // u(x) = x on [0, 1]: u*(s) = 1 − s
        let n = 10_000;
        let v: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let w = vec![1.0 / n as f64; n];
        let f = decreasing_from_samples(&v, &w, 64).unwrap();
        for &s in &[0.1, 0.37, 0.8] {
            assert!((f.eval(s) - (1.0 - s)).abs() < 1e-3);
        }
        assert!((f.integral_to(1.0) - 0.5).abs() < 1e-3);
    }

    fn radial_field(norm: &Norm, gamma: f64, h: f64) -> (ScalarField, PolarNorm) {
        let polar = PolarNorm::analytic(norm.clone()).unwrap();
        let m = ConcaveModel::new(
            Potential::GaugePower {
                polar: polar.clone(),
                gamma,
                center: Vec2::ZERO,
            },
            1.0,
            1024,
        )
        .unwrap();
        let b = m.boundary().clone();
        (ScalarField::from_model(Arc::new(m), b, h).unwrap(), polar)
    }

    #[test]
    fn cubic_decreasing_rearrangement() {
        // u = 1 − H°³ on W₁: μ(t) = κ(1 − t)^{2/3}, u*(s) = 1 − (s/κ)^{3/2}
        let norm = Norm::ellipse(2.0, 1.0).unwrap();
        let (f, polar) = radial_field(&norm, 3.0, 1.0 / 64.0);
        let kappa = polar.kappa();
        let u = decreasing_rearrangement(&f, 16).unwrap();
        for (s, v) in u.breakpoints().iter().zip(u.values()) {
            assert!((v - (1.0 - (s / kappa).powf(1.5))).abs() < 1e-3, "s = {s}");
        }
        assert!(matches!(decreasing_rearrangement(&f, 4), Err(Error::Config(_))));
    }

    #[test]
    fn cubic_perimeter_rearrangement() {
        // λ_H(t) = 2κ(1 − t)^{1/3}, so u^♦(s) = 1 − (s/(2κ))³
        let norm = Norm::euclidean();
        let (f, polar) = radial_field(&norm, 3.0, 1.0 / 64.0);
        let kappa = polar.kappa();
        let p = profile(&f, &norm, 16).unwrap();
        let u = perimeter_rearrangement(&p).unwrap();
        for (s, v) in u.breakpoints().iter().zip(u.values()) {
            assert!((v - (1.0 - (s / (2.0 * kappa)).powi(3))).abs() < 1e-3, "s = {s}");
        }
        assert!(round_trip_error(&p, &u) < 1e-9);
        assert_eq!(u.eval(p.lambda[0]), 0.0);
        assert_eq!(u.max_value(), f.max_value());
    }

    #[test]
    fn non_monotone_lambda_is_rejected() {
        let norm = Norm::euclidean();
        let (f, _) = radial_field(&norm, 2.0, 1.0 / 32.0);
        let mut p = profile(&f, &norm, 8).unwrap();
        p.lambda.swap(2, 3);
        assert!(matches!(perimeter_rearrangement(&p), Err(Error::Profile(_))));
    }

    #[test]
    fn radial_hessian_integral_oracles() {
        // w = 1 − r² on [0, 1]: π∫8r³ = 2π
        let n = 2000;
        let r: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let w = RadialProfile::new(ProfileKind::RadialSolution, r.clone(), r.iter().map(|x| 1.0 - x * x).collect())
            .unwrap()
            .with_node_derivatives(r.iter().map(|x| -2.0 * x).collect())
            .unwrap();
        assert!((radial_hessian_integral(&w, PI).unwrap() / (2.0 * PI) - 1.0).abs() < 1e-6);
        // u^♦ = 1 − s/(2κ): the integral is κ
        let kappa = 2.7;
        let u = linear(ProfileKind::PerimeterRearrangement, 2.0 * kappa, 1.0, 7);
        assert!((radial_hessian_integral(&u, kappa).unwrap() - kappa).abs() < 1e-12);
        let doubled = radial_hessian_integral(&u.scaled(2.0).unwrap(), kappa).unwrap();
        assert!((doubled - 8.0 * kappa).abs() < 1e-9);
        // u* = 1 − s/κ is 1 − H°² again, so the integral is 2κ
        let us = linear(ProfileKind::DecreasingRearrangement, kappa, 1.0, 5);
        assert!((radial_hessian_integral(&us, kappa).unwrap() - 2.0 * kappa).abs() < 1e-12);
    }

    #[test]
    fn parametrizations_agree() {
        // the same radial function w(r) = 1 − r² written three ways
        let kappa = 1.3;
        let n = 4000;
        let r: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let w = RadialProfile::new(ProfileKind::RadialSolution, r.clone(), r.iter().map(|x| 1.0 - x * x).collect())
            .unwrap();
        let s: Vec<f64> = r.iter().map(|x| 2.0 * kappa * x).collect();
        let u = RadialProfile::new(ProfileKind::PerimeterRearrangement, s, w.values().to_vec()).unwrap();
        let a = radial_hessian_integral(&w, kappa).unwrap();
        let b = radial_hessian_integral(&u, kappa).unwrap();
        assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn star_of_radial_field_is_a_fixed_point() {
        for norm in [Norm::euclidean(), Norm::ellipse(2.0, 1.0).unwrap(), Norm::pnorm(4.0).unwrap()] {
            let h = 1.0 / 64.0;
            let (f, polar) = radial_field(&norm, 2.0, h);
            let star = star_symmetrand(&f, &norm, &polar, 32).unwrap();
            assert!((star.domain_radius() - 1.0).abs() < 1e-3, "{}", norm.label());
            let bound = 2.0 * h * f.max_gradient();
            assert!(fixed_point_defect(&f, &star) <= bound, "{}", norm.label());
            let convex = convex_symmetrand(&f, &polar, 32).unwrap();
            assert!(fixed_point_defect(&f, &convex) <= bound);
        }
    }

    #[test]
    fn symmetrand_lp_norms() {
        let norm = Norm::euclidean();
        let (f, polar) = radial_field(&norm, 2.0, 1.0 / 64.0);
        let star = star_symmetrand(&f, &norm, &polar, 32).unwrap();
        let rows = lp_report(&f, &star, &[1.0, 2.0, f64::INFINITY]).unwrap();
        assert!(rows[0].margin.abs() < 1e-2 && rows[1].margin.abs() < 1e-2, "{rows:?}");
        assert_eq!(rows[2].margin, 0.0);
        assert!(lp_checks(&rows, "").all_pass());
    }

    #[test]
    fn thin_domain_gains_mass() {
        let norm = Norm::euclidean();
        let polar = PolarNorm::analytic(norm.clone()).unwrap();
        let f = FieldPreset::ThinRectangle.field(&polar, 1.0 / 64.0).unwrap();
        let star = star_symmetrand(&f, &norm, &polar, 32).unwrap();
        let rows = lp_report(&f, &star, &[1.0]).unwrap();
        assert!(rows[0].margin > 0.1, "{rows:?}");
    }

    #[test]
    fn rearrangement_properties_on_an_ellipse() {
        let norm = Norm::ellipse(2.0, 1.0).unwrap();
        let polar = PolarNorm::analytic(norm.clone()).unwrap();
        let h = 1.0 / 64.0;
        let f = FieldPreset::RotatedEllipse.field(&polar, h).unwrap();
        let p = profile(&f, &norm, 32).unwrap();
        let u = perimeter_rearrangement(&p).unwrap();
        let star = SymmetrizedField::new(u.clone(), polar.clone());
        assert!(perimeter_preservation(&star, &p, &norm, h).unwrap() < 1e-3);
        assert!(lipschitz_ratio(&u, polar.kappa(), norm.beta(), p.max_grad) <= 1.0 + 1e-3);
        assert!(concavity_defect(&u) <= 1e-6);
        let convex = SymmetrizedField::new(decreasing_from_profile(&p).unwrap(), polar);
        assert!(equimeasurability_defect(&convex, &p, h).unwrap() <= 1.0);
    }

    #[test]
    fn polya_szego_equality_for_radial_field() {
        let norm = Norm::ellipse(2.0, 1.0).unwrap();
        let (f, polar) = radial_field(&norm, 2.0, 1.0 / 128.0);
        let ps = polya_szego_report(&f, &norm, &polar, DEFAULT_LEVELS).unwrap();
        assert!(ps.margin.abs() < 0.02, "{ps:?}");
        assert!((ps.star_integral / (2.0 * polar.kappa()) - 1.0).abs() < 0.02);
    }
}
