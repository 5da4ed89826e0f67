use statrs::function::beta::beta;

use anisoperim_core::anorm::{Norm, PolarNorm};
use anisoperim_core::field::lp_norm;
use anisoperim_core::manufactured::FieldPreset;
use anisoperim_core::rearrange::{convex_symmetrand, star_symmetrand};

/// `‖1 − H°³‖_p^p` over `W₁` is `(2κ/3)·B(2/3, p + 1)`.
fn cubic_lp(kappa: f64, p: f64) -> f64 {
    (2.0 * kappa / 3.0 * beta(2.0 / 3.0, p + 1.0)).powf(1.0 / p)
}

#[test]
fn lp_norms_of_the_radial_cubic() {
    for norm in [Norm::euclidean(), Norm::ellipse(2.0, 1.0).unwrap(), Norm::pnorm(4.0).unwrap()] {
        let polar = PolarNorm::best(norm.clone()).unwrap();
        let kappa = polar.kappa();
        let f = FieldPreset::RadialCubic.field(&polar, 1.0 / 128.0).unwrap();
        let convex = convex_symmetrand(&f, &polar, 128).unwrap();
        let star = star_symmetrand(&f, &norm, &polar, 128).unwrap();
        for p in [1.0, 1.5, 2.0, 3.7] {
            let exact = cubic_lp(kappa, p);
            let rel = |v: f64| (v / exact - 1.0).abs();
            let grid = lp_norm(&f, p).unwrap();
            assert!(rel(grid) < 2e-3, "{} p={p}: grid {grid} vs {exact}", norm.label());
            let c = convex.lp_norm(p).unwrap();
            assert!(rel(c) < 2e-3, "{} p={p}: u✧ {c} vs {exact}", norm.label());
            let s = star.lp_norm(p).unwrap();
            assert!(rel(s) < 2e-3, "{} p={p}: u☆ {s} vs {exact}", norm.label());
        }
    }
}
