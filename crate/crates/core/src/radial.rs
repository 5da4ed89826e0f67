//! Radial solutions of the symmetrized problem `det_H[v] = f^✧` in `W_R`,
//! `v = 0` on `∂W_R`, and the comparison `u^♦ ≤ v^♦`.
//!
//! With `G(ρ) = ∫₀^{κρ²} f*`, the solution is `v(x) = w(H°(x))` where
//! `w(r) = κ^{-1/2} ∫_r^R √G(ρ) dρ`.

use std::io::Write;

use serde::Serialize;

use crate::anorm::{Norm, PolarNorm};
use crate::convex_geom::perimeter_h;
use crate::error::{Error, Result};
use crate::field::{cell_quadrature_points, profile, LevelSetProfile, ScalarField};
use crate::par;
use crate::rearrange::{decreasing_from_samples, perimeter_rearrangement, ProfileKind, RadialProfile};
use crate::report::{fmt_f64, Check, Report};

/// Quadrature nodes of the radial solver in the comparison pipeline.
pub const TALENTI_NODES: usize = 1024;

/// Equal-area bins of the data rearrangement `f*`.
pub const TALENTI_BINS: usize = 4096;

/// Largest area fraction of `Ω` on which `f = det_H[u]` may vanish.
pub const MAX_DEGENERATE_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    /// `w` on `[0, R]`, with exact node derivatives `w' = −√(G/κ)`.
    pub w: RadialProfile,
    pub fstar: RadialProfile,
    pub kappa: f64,
    pub radius: f64,
}

/// `∫_{x₀}^{x₁} g` from three equally spaced samples, the target interval
/// being the first (`first = true`) or the second.
fn three_point(h: f64, g0: f64, g1: f64, g2: f64, first: bool) -> f64 {
    if first {
        h * (5.0 * g0 + 8.0 * g1 - g2) / 12.0
    } else {
        h * (-g0 + 8.0 * g1 + 5.0 * g2) / 12.0
    }
}

/// Nested quadrature on `n` uniform nodes of `[0, R]`: `G` exactly from the
/// piecewise-linear `f*`, the outer integral by composite Simpson from `R`
/// inwards.
pub fn solve_radial(fstar: &RadialProfile, kappa: f64, radius: f64, n: usize) -> Result<RadialSolution> {
    if n < 64 {
        return Err(Error::Config(format!("radial solver needs n ≥ 64 nodes, got {n}")));
    }
    if !(kappa.is_finite() && kappa > 0.0 && radius.is_finite() && radius > 0.0) {
        return Err(Error::Config(format!("κ and R must be positive, got κ = {kappa}, R = {radius}")));
    }
    if let Some(v) = fstar.values().iter().find(|v| **v < 0.0) {
        return Err(Error::InvalidData(format!("f* must be nonnegative, found {v}")));
    }
    let h = radius / (n - 1) as f64;
    let r: Vec<f64> = (0..n).map(|i| if i == n - 1 { radius } else { h * i as f64 }).collect();
    let g: Vec<f64> = r.iter().map(|&x| (fstar.integral_to(kappa * x * x) / kappa).sqrt()).collect();
    let mut w = vec![0.0; n];
    // even offsets from R by Simpson pairs, odd offsets by one more interval
    let mut i = n - 1;
    while i >= 2 {
        w[i - 2] = w[i] + h * (g[i - 2] + 4.0 * g[i - 1] + g[i]) / 3.0;
        i -= 2;
    }
    for i in (0..n - 1).rev().filter(|i| (n - 1 - i) % 2 == 1) {
        w[i] = if i + 2 < n {
            w[i + 1] + three_point(h, g[i], g[i + 1], g[i + 2], true)
        } else {
            w[i + 1] + three_point(h, g[i - 1], g[i], g[i + 1], false)
        };
    }
    let d: Vec<f64> = g.iter().map(|v| -v).collect();
    let w = RadialProfile::new(ProfileKind::RadialSolution, r, w)?.with_node_derivatives(d)?;
    Ok(RadialSolution {
        w,
        fstar: fstar.clone(),
        kappa,
        radius,
    })
}

/// `max |[(w')²]'/(2r) − f*(κr²)|` over interior nodes, by central
/// differences of the recorded `w'`.
pub fn det_residual(sol: &RadialSolution) -> f64 {
    let r = sol.w.breakpoints();
    let d = sol.w.node_derivatives().expect("solver records node derivatives");
    (1..r.len() - 1)
        .map(|i| {
            let lhs = (d[i + 1] * d[i + 1] - d[i - 1] * d[i - 1]) / (r[i + 1] - r[i - 1]) / (2.0 * r[i]);
            (lhs - sol.fstar.eval(sol.kappa * r[i] * r[i])).abs()
        })
        .fold(0.0, f64::max)
}

/// `v^♦(s) = (2κ^{3/2})^{-1} ∫_s^{2κR} √(∫₀^{σ²/4κ} f*) dσ`, by composite
/// Simpson at the solver's node density.
pub fn v_sharp(sol: &RadialSolution, s: f64) -> Result<f64> {
    let kappa = sol.kappa;
    let top = 2.0 * kappa * sol.radius;
    if !(s >= 0.0 && s <= top * (1.0 + 1e-12)) {
        return Err(Error::OutOfRange {
            value: s,
            lo: 0.0,
            hi: top,
        });
    }
    let s = s.min(top);
    let len = top - s;
    if len == 0.0 {
        return Ok(0.0);
    }
    let n = sol.w.len() - 1;
    let mut m = ((len / top) * n as f64).ceil().max(2.0) as usize;
    m += m % 2;
    let h = len / m as f64;
    let g = |k: usize| {
        let sigma = if k == m { top } else { s + h * k as f64 };
        sol.fstar.integral_to(sigma * sigma / (4.0 * kappa)).sqrt()
    };
    let mut acc = g(0) + g(m);
    for k in 1..m {
        acc += if k % 2 == 1 { 4.0 * g(k) } else { 2.0 * g(k) };
    }
    Ok(acc * h / 3.0 / (2.0 * kappa * kappa.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub s: f64,
    pub u_sharp: f64,
    pub v_sharp: f64,
    /// `v^♦ − u^♦`
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TalentiComparison {
    pub rows: Vec<ComparisonRow>,
    pub solution: RadialSolution,
    pub u_sharp: RadialProfile,
    pub max_value: f64,
    /// `min_s (v^♦ − u^♦)` and where it occurs.
    pub worst_margin: f64,
    pub worst_at: f64,
}

impl TalentiComparison {
    /// `min (v^♦ − u^♦) / max u`.
    pub fn relative_worst(&self) -> f64 {
        self.worst_margin / self.max_value
    }

    /// `max |v^♦ − u^♦| / max u`.
    pub fn relative_sup_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.margin.abs()).fold(0.0, f64::max) / self.max_value
    }

    pub fn to_report(&self, prefix: &str) -> Report {
        let mut r = Report::default();
        r.push(Check::at_least(format!("{prefix}talenti_margin"), self.relative_worst(), -0.01));
        r
    }

    /// CSV `s,u_sharp,v_sharp,margin`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            s: String,
            u_sharp: String,
            v_sharp: String,
            margin: String,
        }
        let mut w = csv::Writer::from_writer(out);
        for c in &self.rows {
            w.serialize(Row {
                s: fmt_f64(c.s),
                u_sharp: fmt_f64(c.u_sharp),
                v_sharp: fmt_f64(c.v_sharp),
                margin: fmt_f64(c.margin),
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `f*` of the manufactured right-hand side `f = det_H[u]`, sampled at the
/// cell quadrature points of `Ω`.
pub fn manufactured_rhs(field: &ScalarField, norm: &Norm) -> Result<RadialProfile> {
    let pts = cell_quadrature_points(field.grid(), field.boundary());
    let f = par::map_slice(&pts, |q| -> Result<f64> {
        if field.is_flat_at(q.x) {
            return Ok(0.0);
        }
        match field.local_unchecked(norm, q.x) {
            Ok(l) => Ok(l.det_h),
            Err(Error::SingularGradient(_)) => Ok(0.0),
            Err(e) => Err(e),
        }
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = pts.iter().map(|q| q.weight).collect();
    let fmax = f.iter().copied().fold(0.0, f64::max);
    let total: f64 = weights.iter().sum();
    let bad: f64 = f
        .iter()
        .zip(&weights)
        .filter(|(v, _)| **v <= 1e-12 * fmax)
        .map(|(_, w)| w)
        .sum();
    if !(fmax > 0.0) || bad > MAX_DEGENERATE_FRACTION * total {
        return Err(Error::ManufacturedSolution(format!(
            "det_H[u] ≤ 0 on {:.3e} of the domain area",
            bad / total
        )));
    }
    decreasing_from_samples(&f, &weights, TALENTI_BINS)
}

/// Comparison of `u^♦` with `v^♦` at the breakpoints of `u^♦`.
pub fn talenti_compare(field: &ScalarField, norm: &Norm, polar: &PolarNorm, n_levels: usize) -> Result<TalentiComparison> {
    let p = profile(field, norm, n_levels)?;
    talenti_from_profile(field, norm, polar, &p, TALENTI_NODES)
}

pub fn talenti_from_profile(
    field: &ScalarField,
    norm: &Norm,
    polar: &PolarNorm,
    p: &LevelSetProfile,
    nodes: usize,
) -> Result<TalentiComparison> {
    let fstar = manufactured_rhs(field, norm)?;
    let kappa = polar.kappa();
    let radius = perimeter_h(field.boundary(), norm)? / (2.0 * kappa);
    let solution = solve_radial(&fstar, kappa, radius, nodes)?;
    let u_sharp = perimeter_rearrangement(p)?;
    let rows = par::map_slice(u_sharp.breakpoints(), |&s| -> Result<ComparisonRow> {
        let u = u_sharp.eval(s);
        let v = v_sharp(&solution, s)?;
        Ok(ComparisonRow {
            s,
            u_sharp: u,
            v_sharp: v,
            margin: v - u,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let worst = rows
        .iter()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .copied()
        .expect("profile has breakpoints");
    Ok(TalentiComparison {
        worst_margin: worst.margin,
        worst_at: worst.s,
        max_value: field.max_value(),
        rows,
        solution,
        u_sharp,
    })
}
