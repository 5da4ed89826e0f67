use proptest::prelude::*;

use anisoperim_core::anorm::{Norm, PolarNorm};
use anisoperim_core::convex_geom::{minkowski_sum, perimeter_h, ConvexCurve};
use anisoperim_core::geom::Vec2;
use anisoperim_core::rearrange::{decreasing_from_samples, ProfileKind, RadialProfile};

fn point() -> impl Strategy<Value = Vec2> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

fn hull() -> impl Strategy<Value = ConvexCurve> {
    prop::collection::vec(point(), 3..40).prop_filter_map("degenerate hull", |pts| ConvexCurve::hull(&pts).ok())
}

fn norm() -> impl Strategy<Value = Norm> {
    prop_oneof![
        Just(Norm::euclidean()),
        (0.3..3.0f64, 0.3..3.0f64).prop_map(|(a, b)| Norm::ellipse(a, b).unwrap()),
        (2.0..8.0f64).prop_map(|p| Norm::pnorm(p).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn containment_matches_half_planes(k in hull(), p in point()) {
        let v = k.vertices();
        let n = v.len();
        let margin = (0..n)
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % n]);
                (b - a).cross(p - a) / (b - a).norm()
            })
            .fold(f64::INFINITY, f64::min);
        if margin.abs() > 1e-9 {
            prop_assert_eq!(k.contains(p), margin > 0.0);
        }
    }

    #[test]
    fn hull_is_idempotent(k in hull()) {
        let again = ConvexCurve::hull(k.vertices()).unwrap();
        prop_assert_eq!(again.len(), k.len());
        prop_assert!((again.area() - k.area()).abs() <= 1e-12 * k.area().max(1.0));
    }

    #[test]
    fn anisotropic_perimeter_is_minkowski_additive(a in hull(), b in hull(), h in norm()) {
        let s = minkowski_sum(&a, &b).unwrap();
        let (pa, pb, ps) = (perimeter_h(&a, &h).unwrap(), perimeter_h(&b, &h).unwrap(), perimeter_h(&s, &h).unwrap());
        prop_assert!((ps - pa - pb).abs() <= 1e-9 * ps, "{} vs {}", ps, pa + pb);
        prop_assert!(s.area() >= a.area() + b.area() - 1e-9);
    }

    #[test]
    fn norm_and_polar_are_dual(h in norm(), t in 0.0..std::f64::consts::TAU, r in 0.1..5.0f64) {
        let polar = PolarNorm::best(h.clone()).unwrap();
        let xi = Vec2::from_angle(t) * r;
        let hv = h.eval(xi).unwrap();
        prop_assert!((h.eval(-xi).unwrap() - hv).abs() <= 1e-12 * hv);
        prop_assert!((h.eval(xi * 2.5).unwrap() - 2.5 * hv).abs() <= 1e-12 * hv);
        // H°(∇H(ξ)) = 1 and ξ·∇H(ξ) = H(ξ)
        let g = h.grad(xi).unwrap();
        prop_assert!((polar.eval(g).unwrap() - 1.0).abs() <= 1e-9);
        prop_assert!((xi.dot(g) - hv).abs() <= 1e-9 * hv);
        prop_assert!(hv >= h.alpha() * r * (1.0 - 1e-9) && hv <= h.beta() * r * (1.0 + 1e-9));
    }

    #[test]
    fn profile_interpolates_monotonically(
        steps in prop::collection::vec((0.01..1.0f64, 0.0..1.0f64), 1..30),
        probes in prop::collection::vec(0.0..1.0f64, 1..20),
    ) {
        let mut b = vec![0.0];
        let mut v = vec![10.0];
        for (ds, dv) in &steps {
            b.push(b[b.len() - 1] + ds);
            v.push(v[v.len() - 1] - dv);
        }
        let p = RadialProfile::new(ProfileKind::DecreasingRearrangement, b.clone(), v.clone()).unwrap();
        for (s, val) in b.iter().zip(&v) {
            prop_assert_eq!(p.eval(*s), *val);
        }
        let mut xs: Vec<f64> = probes.iter().map(|q| q * p.s_max()).collect();
        xs.sort_by(f64::total_cmp);
        for w in xs.windows(2) {
            prop_assert!(p.eval(w[0]) >= p.eval(w[1]));
        }
        prop_assert!(p.slopes().iter().all(|s| *s <= 0.0));
        prop_assert_eq!(p.eval(p.s_max() * 1.01 + 1e-9), 0.0);
        let total = p.integral_to(p.s_max());
        prop_assert!(total <= 10.0 * p.s_max() + 1e-12 && total >= v[v.len() - 1] * p.s_max() - 1e-12);
    }

    #[test]
    fn sample_rearrangement_keeps_range_and_measure(
        samples in prop::collection::vec((-5.0..5.0f64, 0.1..2.0f64), 16..300),
    ) {
        let (vals, wts): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
        let u = decreasing_from_samples(&vals, &wts, 8).unwrap();
        let total: f64 = wts.iter().sum();
        let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        prop_assert!((u.s_max() - total).abs() <= 1e-9 * total);
        // the top node is the first bin average, not the largest sample
        prop_assert!(u.max_value() <= hi);
        prop_assert!(u.values().iter().all(|v| *v >= lo && *v <= hi));
    }
}
