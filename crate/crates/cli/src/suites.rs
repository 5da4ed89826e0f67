//! The seven verification suites. Each returns its checks plus optional
//! data tables and plots, written by the caller.

use std::sync::OnceLock;

use anyhow::{anyhow, Context as _, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use anisoperim_core::anorm::{identity_residuals, Norm, PolarNorm};
use anisoperim_core::convex_geom::{
    isoperimetric_deficit, perimeter_h, random_convex_polygon, steiner_gauss_bonnet_check, wulff_curve,
    ConvexCurve, WulffShape,
};
use anisoperim_core::field::{
    hessian_integral, profile, read_field, reilly_residual, write_profile_csv, LevelSetProfile, ScalarField,
};
use anisoperim_core::geom::Vec2;
use anisoperim_core::manufactured::FieldPreset;
use anisoperim_core::radial::talenti_from_profile;
use anisoperim_core::rearrange::{
    concavity_defect, decreasing_from_profile, fixed_point_defect, equimeasurability_defect, lipschitz_ratio,
    lp_checks, lp_report, perimeter_preservation, perimeter_rearrangement, polya_szego_from_profile,
    round_trip_error, SymmetrizedField,
};
use anisoperim_core::report::{fmt_f64, Check, Report};

use crate::config::{DomainSpec, ExperimentConfig, FieldSpec, Suite};
use crate::svg::{Plot, Series};

/// Everything the suites share, built once.
pub struct Context {
    pub config: ExperimentConfig,
    pub norm: Norm,
    pub polar: PolarNorm,
    pub field: ScalarField,
    pub preset: Option<FieldPreset>,
    /// Convex body of the geometry suite.
    pub body: ConvexCurve,
    profile: OnceLock<std::result::Result<LevelSetProfile, String>>,
}

impl Context {
    pub fn new(config: ExperimentConfig) -> Result<Context> {
        let norm = config.norm.build()?;
        let polar = PolarNorm::best(norm.clone())?;
        let h = config.resolution.h;
        let (field, preset) = match &config.field {
            FieldSpec::Preset { name } => {
                let p: FieldPreset = name.parse()?;
                (p.field(&polar, h)?, Some(p))
            }
            FieldSpec::Csv { path, sidecar } => {
                let side = std::fs::read_to_string(sidecar).with_context(|| format!("reading {}", sidecar.display()))?;
                let csv = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
                (read_field(csv, &side)?.0, None)
            }
        };
        let body = match &config.domain {
            DomainSpec::Field => field.boundary().clone(),
            DomainSpec::Polygon { path } => {
                let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
                ConvexCurve::read(std::io::BufReader::new(f))?
            }
            DomainSpec::Wulff { radius } => wulff_curve(
                &WulffShape::new(polar.clone(), *radius, Vec2::ZERO)?,
                config.resolution.curve_n,
            )?,
            DomainSpec::Regular { sides } => ConvexCurve::regular_polygon(*sides, 1.0, Vec2::ZERO, 0.0)?,
        };
        Ok(Context {
            config,
            norm,
            polar,
            field,
            preset,
            body,
            profile: OnceLock::new(),
        })
    }

    pub fn profile(&self) -> Result<&LevelSetProfile> {
        self.profile
            .get_or_init(|| profile(&self.field, &self.norm, self.config.resolution.n_levels).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| anyhow!("level-set profile: {e}"))
    }

    fn is_radial(&self) -> bool {
        self.preset.is_some_and(FieldPreset::is_radial)
    }
}

/// A data table or plot produced by a suite, written under `tables/` or
/// `plots/`.
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

pub struct SuiteOutput {
    pub suite: Suite,
    pub report: Report,
    pub tables: Vec<Artifact>,
    pub plots: Vec<Artifact>,
    /// Set when the suite stopped early; the report then ends with a
    /// failing `suite_error` row.
    pub error: Option<String>,
}

pub fn run_suite(ctx: &Context, suite: Suite) -> SuiteOutput {
    let mut out = SuiteOutput {
        suite,
        report: Report::default(),
        tables: Vec::new(),
        plots: Vec::new(),
        error: None,
    };
    let r = match suite {
        Suite::Identities => identities(ctx, &mut out),
        Suite::Geometry => geometry(ctx, &mut out),
        Suite::Curvature => curvature(ctx, &mut out),
        Suite::HessianIntegrals => hessian_integrals(ctx, &mut out),
        Suite::Symmetrize => symmetrize(ctx, &mut out),
        Suite::PolyaSzego => polya_szego(ctx, &mut out),
        Suite::Compare => compare(ctx, &mut out),
    };
    if let Err(e) = r {
        out.report.push(Check::at_most("suite_error", f64::NAN, 0.0));
        out.error = Some(format!("{e:#}"));
    }
    out
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    w.into_inner().map_err(|e| anyhow!("{e}"))
}

fn identities(ctx: &Context, out: &mut SuiteOutput) -> Result<()> {
    let n = ctx.config.resolution.samples;
    if let Ok(analytic) = PolarNorm::analytic(ctx.norm.clone()) {
        let r = identity_residuals(&ctx.norm, &analytic, n)?;
        out.report.extend(r.to_report("analytic_", 1e-10));
    }
    let numeric = PolarNorm::numeric_default(ctx.norm.clone())?;
    let r = identity_residuals(&ctx.norm, &numeric, n)?;
    out.report.extend(r.to_report("numeric_", 1e-5));
    Ok(())
}

fn geometry(ctx: &Context, out: &mut SuiteOutput) -> Result<()> {
    let kappa = ctx.polar.kappa();
    let curve_n = ctx.config.resolution.curve_n;
    for radius in [0.5, 1.0, 2.0] {
        let w = wulff_curve(&WulffShape::new(ctx.polar.clone(), radius, Vec2::ZERO)?, curve_n)?;
        let p = perimeter_h(&w, &ctx.norm)?;
        let rel = (p / (2.0 * kappa * radius) - 1.0).abs();
        out.report.push(Check::at_most(format!("wulff_perimeter_rel_r{radius}"), rel, 1e-4));
        if radius == 1.0 {
            let d = isoperimetric_deficit(&w, &ctx.norm, kappa)?;
            out.report.push(Check::at_most("wulff_isoperimetric_deficit", d / (p * p), 1e-3));
        }
    }
    for delta in [0.05, 0.1, 0.25] {
        let s = steiner_gauss_bonnet_check(&ctx.body, &ctx.norm, &ctx.polar, delta)?;
        out.report.extend(s.to_report(&format!("delta{delta}_"), 1e-4));
    }
    let p = perimeter_h(&ctx.body, &ctx.norm)?;
    let d = isoperimetric_deficit(&ctx.body, &ctx.norm, kappa)?;
    out.report.push(Check::at_least("domain_isoperimetric_deficit", d / (p * p), -1e-9));
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.resolution.seed);
    let mut worst = f64::INFINITY;
    for _ in 0..ctx.config.resolution.samples {
        let k = random_convex_polygon(&mut rng, 24)?;
        let p = perimeter_h(&k, &ctx.norm)?;
        worst = worst.min(isoperimetric_deficit(&k, &ctx.norm, kappa)? / (p * p));
    }
    out.report.push(Check::at_least("random_isoperimetric_deficit_min", worst, -1e-9));
    Ok(())
}

fn curvature(ctx: &Context, out: &mut SuiteOutput) -> Result<()> {
    let f = &ctx.field;
    let m = f.max_value();
    let (lo, hi) = f.boundary().bbox();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.resolution.seed);
    let mut worst_pair = 0.0f64;
    let mut worst_det = f64::INFINITY;
    let mut worst_wulff = 0.0f64;
    let mut taken = 0;
    let mut tries = 0;
    while taken < ctx.config.resolution.samples {
        tries += 1;
        if tries > 1000 * ctx.config.resolution.samples {
            return Err(anyhow!("could not place {} interior sample points", ctx.config.resolution.samples));
        }
        let x = Vec2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if !f.contains(x) || f.is_flat_at(x) {
            continue;
        }
        let u = f.value_at(x)?;
        if !(u > 0.05 * m && u < 0.95 * m) {
            continue;
        }
        let (a, b) = match f.curvature_pair_at(&ctx.norm, x) {
            Ok(v) => v,
            Err(anisoperim_core::error::Error::Stencil(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        taken += 1;
        worst_pair = worst_pair.max((a - b).abs() / a.abs().max(b.abs()));
        worst_det = worst_det.min(f.det_h_at(&ctx.norm, x)?);
        if ctx.is_radial() {
            let r = ctx.polar.eval(x)?;
            worst_wulff = worst_wulff.max((a * r - 1.0).abs());
        }
    }
    out.report.push(Check::at_most("curvature_formula_rel", worst_pair, 1e-6));
    out.report.push(Check::at_least("det_h_min", worst_det, -1e-6));
    if ctx.is_radial() {
        out.report.push(Check::at_most("wulff_level_curvature_rel", worst_wulff, 1e-4));
    }
    out.report.extend(f.check_invariants(10_000, ctx.config.resolution.seed));
    Ok(())
}

fn hessian_integrals(ctx: &Context, out: &mut SuiteOutput) -> Result<()> {
    let f = &ctx.field;
    let hi = hessian_integral(f, &ctx.norm)?;
    out.report.push(Check::at_most("hessian_forms_pairwise_rel", hi.max_pairwise_relative(), 0.02));
    let area = f.boundary().area();
    out.report.push(Check::at_most("skipped_area_fraction", hi.skipped_area / area, 0.01));
    if ctx.preset == Some(FieldPreset::RadialQuadratic) {
        let exact = 2.0 * ctx.polar.kappa();
        out.report.push(Check::at_most("radial_oracle_rel", (hi.best() / exact - 1.0).abs(), 0.01));
    }
    let mut rows = vec![vec![0.0, hi.direct, hi.curvature_form, hi.parts_form, hi.skipped_area]];
    let m = f.max_value();
    for frac in [0.1, 0.5] {
        let r = reilly_residual(f, &ctx.norm, frac * m)?;
        out.report.push(Check::at_most(format!("reilly_rel_t{frac}"), r.residual, 0.01));
        rows.push(vec![r.t, r.lhs, r.rhs, f64::NAN, f64::NAN]);
    }
    out.tables.push(Artifact {
        name: "hessian_integrals.csv".into(),
        contents: csv_table(&["t", "direct_or_lhs", "curvature_or_rhs", "parts", "skipped_area"], rows)?,
    });
    Ok(())
}

fn symmetrize(ctx: &Context, out: &mut SuiteOutput) -> Result<()> {
    let f = &ctx.field;
    let p = ctx.profile()?;
    let kappa = ctx.polar.kappa();
    let h = ctx.config.resolution.h;
    let u_sharp = perimeter_rearrangement(p)?;
    let star = SymmetrizedField::new(u_sharp.clone(), ctx.polar.clone());
    let convex = SymmetrizedField::new(decreasing_from_profile(p)?, ctx.polar.clone());
    let r = &mut out.report;
    r.push(Check::at_most("lambda_fd_cross_check_rel", p.fd_cross_check(), 0.02));
    r.push(Check::at_least("isoperimetric_margin", p.isoperimetric_margin(kappa), -1e-6));
    r.push(Check::at_least("lambda_prime_margin", p.lambda_prime_margin(kappa, ctx.norm.beta()), -1e-6));
    r.push(Check::at_most("round_trip_error", round_trip_error(p, &u_sharp), 1e-9));
    r.push(Check::at_most(
        "perimeter_preservation_rel",
        perimeter_preservation(&star, p, &ctx.norm, h)?,
        1e-3,
    ));
    r.push(Check::at_most(
        "lipschitz_ratio",
        lipschitz_ratio(&u_sharp, kappa, ctx.norm.beta(), p.max_grad),
        1.0 + 1e-3,
    ));
    r.push(Check::at_most("concavity_defect", concavity_defect(&u_sharp), 1e-6));
    r.push(Check::at_most("equimeasurability_cells", equimeasurability_defect(&convex, p, h)?, 1.0));
    let lp = lp_report(f, &star, &[1.0, 2.0, f64::INFINITY])?;
    r.extend(lp_checks(&lp, ""));
    if ctx.is_radial() {
        let bound = 2.0 * h * f.max_gradient();
        r.push(Check::at_most("fixed_point_ratio", fixed_point_defect(f, &star) / bound, 1.0));
    }
    let mut buf = Vec::new();
    write_profile_csv(p, &mut buf)?;
    out.tables.push(Artifact {
        name: "profile.csv".into(),
        contents: buf,
    });
    let mut buf = Vec::new();
    u_sharp.write_csv(&mut buf)?;
    out.tables.push(Artifact {
        name: "u_sharp.csv".into(),
        contents: buf,
    });
    if ctx.config.output.svg {
        let lambda = Plot {
            title: "anisotropic perimeter of superlevel sets".into(),
            x_label: "t".into(),
            y_label: "λ_H(t)".into(),
            series: vec![Series::line("λ_H", p.levels.iter().copied().zip(p.lambda.iter().copied()).collect())],
            equal_axes: false,
        };
        out.plots.push(Artifact {
            name: "lambda.svg".into(),
            contents: lambda.render().into_bytes(),
        });
        let wulff = wulff_curve(
            &WulffShape::new(ctx.polar.clone(), star.domain_radius(), Vec2::ZERO)?,
            512,
        )?;
        let closed = |c: &ConvexCurve| {
            let mut v: Vec<(f64, f64)> = c.vertices().iter().map(|p| (p.x, p.y)).collect();
            v.push(v[0]);
            v
        };
        let domains = Plot {
            title: "Ω and Ω☆".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series::line("Ω", closed(f.boundary())), Series::line("Ω☆", closed(&wulff))],
            equal_axes: true,
        };
        out.plots.push(Artifact {
            name: "domains.svg".into(),
            contents: domains.render().into_bytes(),
        });
    }
    Ok(())
}

fn polya_szego(ctx: &Context, out: &mut SuiteOutput) -> Result<()> {
    let ps = polya_szego_from_profile(&ctx.field, &ctx.norm, &ctx.polar, ctx.profile()?)?;
    out.report.extend(ps.to_report(""));
    let euclidean_cube = ctx.preset == Some(FieldPreset::DistanceCube) && ctx.config.norm == anisoperim_core::anorm::NormSpec::Euclidean;
    if ctx.is_radial() || euclidean_cube {
        out.report.push(Check::at_most("polya_szego_equality_abs", ps.margin.abs(), 0.02));
    }
    let hi = &ps.field_integral;
    out.tables.push(Artifact {
        name: "polya_szego.csv".into(),
        contents: csv_table(
            &["direct", "curvature_form", "parts_form", "star", "margin"],
            [vec![hi.direct, hi.curvature_form, hi.parts_form, ps.star_integral, ps.margin]],
        )?,
    });
    Ok(())
}

fn compare(ctx: &Context, out: &mut SuiteOutput) -> Result<()> {
    let c = talenti_from_profile(
        &ctx.field,
        &ctx.norm,
        &ctx.polar,
        ctx.profile()?,
        ctx.config.resolution.quadrature_n,
    )?;
    out.report.extend(c.to_report(""));
    if ctx.is_radial() {
        out.report.push(Check::at_most("talenti_sup_gap", c.relative_sup_gap(), 0.01));
    }
    let mut buf = Vec::new();
    c.write_csv(&mut buf)?;
    out.tables.push(Artifact {
        name: "compare.csv".into(),
        contents: buf,
    });
    if ctx.config.output.svg {
        let plot = Plot {
            title: "perimeter rearrangement against the radial solution".into(),
            x_label: "s".into(),
            y_label: "value".into(),
            series: vec![
                Series::line("u♦", c.rows.iter().map(|r| (r.s, r.u_sharp)).collect()),
                Series::line("v♦", c.rows.iter().map(|r| (r.s, r.v_sharp)).collect()),
            ],
            equal_axes: false,
        };
        out.plots.push(Artifact {
            name: "compare.svg".into(),
            contents: plot.render().into_bytes(),
        });
    }
    Ok(())
}
