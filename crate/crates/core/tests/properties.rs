use bmlab_core::concavity::{
    check_bm, default_lambda_grid, s_mean, supconv_min, BmOptions, GridFunction1D,
};
use bmlab_core::measures::{borell_gamma_to_s, borell_s_to_gamma, Density1D, DensityND};
use bmlab_core::parallel::{parallel_curve, steiner_area};
use bmlab_core::quadrature::{mass_closed_form, MeasureEvaluator, QuadraturePolicy};
use bmlab_core::sets::{mink_combine_1d, mink_combine_polygon, ConvexPolygon, IntervalUnion, SetRep};
use proptest::prelude::*;

fn union() -> impl Strategy<Value = IntervalUnion> {
    prop::collection::vec((-3.0..3.0f64, 0.01..1.0f64), 1..4)
        .prop_map(|v| IntervalUnion::new(v.into_iter().map(|(c, w)| (c - w, c + w))).unwrap())
}

fn polygon() -> impl Strategy<Value = ConvexPolygon> {
    (prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3..9), -1.0..1.0f64, -1.0..1.0f64, 0.2..2.0f64)
        .prop_filter_map("degenerate hull", |(pts, cx, cy, r)| {
            let pts: Vec<[f64; 2]> = pts.iter().map(|(x, y)| [cx + r * x, cy + r * y]).collect();
            ConvexPolygon::hull(&pts).ok().filter(|p| p.area() > 1e-2 * r * r)
        })
}

fn extended_s() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(f64::NEG_INFINITY),
        Just(f64::INFINITY),
        Just(0.0),
        -5.0..5.0f64,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn s_mean_is_monotone_in_s(a in 0.0..10.0f64, b in 0.0..10.0f64, l in 0.0..=1.0f64, s1 in extended_s(), s2 in extended_s()) {
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        prop_assert!(s_mean(a, b, lo, l) <= s_mean(a, b, hi, l) + 1e-12 * (1.0 + a.max(b)));
    }

    #[test]
    fn s_mean_lies_between_min_and_max(a in 0.01..10.0f64, b in 0.01..10.0f64, l in 0.0..=1.0f64, s in extended_s()) {
        let m = s_mean(a, b, s, l);
        prop_assert!(m >= a.min(b) * (1.0 - 1e-12) && m <= a.max(b) * (1.0 + 1e-12));
        prop_assert_eq!(s_mean(a, b, s, 0.0), a);
        prop_assert_eq!(s_mean(a, b, s, 1.0), b);
    }

    #[test]
    fn borell_round_trip(g in -0.49..5.0f64, n in 1usize..4) {
        let g = g.max(-1.0 / n as f64 + 1e-6);
        let s = borell_gamma_to_s(g, n).unwrap();
        prop_assert!(s <= 1.0 / n as f64);
        let back = borell_s_to_gamma(s, n).unwrap();
        prop_assert!((back - g).abs() <= 1e-9 * (1.0 + g.abs()));
    }

    #[test]
    fn interval_combination_endpoints_and_length(a in union(), b in union(), l in 0.0..=1.0f64) {
        prop_assert_eq!(mink_combine_1d(&a, &b, 0.0).unwrap(), a.clone());
        prop_assert_eq!(mink_combine_1d(&a, &b, 1.0).unwrap(), b.clone());
        let c = mink_combine_1d(&a, &b, l).unwrap();
        // one-dimensional Brunn-Minkowski
        prop_assert!(c.length() >= (1.0 - l) * a.length() + l * b.length() - 1e-12);
        for &(x, _) in a.intervals() {
            for &(_, y) in b.intervals() {
                prop_assert!(c.contains((1.0 - l) * x + l * y));
            }
        }
    }

    #[test]
    fn polygon_combination(a in polygon(), b in polygon(), l in 0.0..=1.0f64) {
        let c = mink_combine_polygon(&a, &b, l).unwrap();
        prop_assert!(ConvexPolygon::new(c.vertices().to_vec()).is_ok());
        let d = c.area().sqrt() - (1.0 - l) * a.area().sqrt() - l * b.area().sqrt();
        prop_assert!(d >= -1e-9, "area deficit {}", d);
        for p in a.vertices() {
            for q in b.vertices() {
                let z = [(1.0 - l) * p[0] + l * q[0], (1.0 - l) * p[1] + l * q[1]];
                prop_assert!(c.contains(z));
            }
        }
        // mixed area identity via support functions on a few directions
        for k in 0..8 {
            let th = k as f64 * std::f64::consts::PI / 4.0;
            let u = [th.cos(), th.sin()];
            let want = (1.0 - l) * a.support(u) + l * b.support(u);
            prop_assert!((c.support(u) - want).abs() <= 1e-9 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn lebesgue_polygons_are_half_concave(a in polygon(), b in polygon()) {
        let ev = MeasureEvaluator::with_default_policy(DensityND::lebesgue(2).unwrap());
        let r = check_bm(&ev, &a.into(), &b.into(), 0.5, &default_lambda_grid(), &BmOptions::grid_only()).unwrap();
        prop_assert!(r.passed(), "{:?}", r);
    }

    #[test]
    fn endpoint_identity(a in union(), b in union(), s in extended_s(), sigma in 0.3..2.0f64) {
        let ev = MeasureEvaluator::with_default_policy(Density1D::gaussian(sigma).unwrap());
        let r = check_bm(&ev, &a.into(), &b.into(), s, &[0.0, 1.0], &BmOptions::grid_only()).unwrap();
        prop_assert!(!r.is_violation());
        for smp in &r.trace {
            prop_assert!(smp.deficit >= -smp.tolerance);
        }
    }

    #[test]
    fn closed_form_matches_quadrature(lo in -4.0..4.0f64, w in 0.0..4.0f64, sigma in 0.2..3.0f64, rate in 0.2..3.0f64) {
        let hi = lo + w;
        for d in [Density1D::gaussian(sigma).unwrap(), Density1D::normalized_exponential(rate).unwrap()] {
            let cf = mass_closed_form(&d, lo, hi).unwrap();
            let tab = {
                // the same density through the generic quadrature path
                let grid: Vec<f64> = (0..=4000).map(|i| -10.0 + 20.0 * i as f64 / 4000.0).collect();
                let values: Vec<f64> = grid.iter().map(|x| d.eval(*x).unwrap()).collect();
                Density1D::tabulated(grid, values).unwrap()
            };
            let ev = MeasureEvaluator::with_default_policy(tab);
            let q = ev.measure_1d(&IntervalUnion::interval(lo, hi).unwrap()).unwrap();
            // piecewise-linear interpolation error of the table dominates
            prop_assert!((q - cf).abs() <= 1e-4 * (1.0 + cf), "{} vs {}", q, cf);
        }
    }

    #[test]
    fn supconv_dominates_pairwise_minima(
        fv in prop::collection::vec(0.0..1.0f64, 40),
        gv in prop::collection::vec(0.0..1.0f64, 40),
        l in 0.0..=1.0f64,
    ) {
        let f = GridFunction1D::new(-1.0, 0.05, fv).unwrap();
        let g = GridFunction1D::new(-1.0, 0.05, gv).unwrap();
        let h = supconv_min(&f, &g, l).unwrap();
        for i in 0..f.len() {
            for j in 0..g.len() {
                let k = ((1.0 - l) * i as f64 + l * j as f64).round() as usize;
                prop_assert!(h.values[k] >= f.values[i].min(g.values[j]));
            }
        }
    }

    #[test]
    fn parallel_curves(a in polygon(), t1 in 0.0..1.0f64, t2 in 1.0..2.0f64) {
        let ev = MeasureEvaluator::with_default_policy(DensityND::lebesgue(2).unwrap());
        let disk = ConvexPolygon::disk(64);
        let ts: Vec<f64> = (0..=8).map(|i| 0.25 * i as f64).collect();
        let sa: SetRep = a.clone().into();
        let c = parallel_curve(&ev, &sa, &disk.clone().into(), &ts).unwrap();
        prop_assert!(c.is_nondecreasing());
        for (t, v) in ts.iter().zip(&c.values) {
            let st = steiner_area(&a, *t).unwrap();
            prop_assert!((v / st - 1.0).abs() <= 0.01, "t {} {} vs {}", t, v, st);
        }
        // A + ((t1+t2)/2)B = (A + t1 B)/2 + (A + t2 B)/2 for convex B
        let g = ev_gauss();
        let mid = g.measure_polygon(&a.linear_combination(1.0, &disk, 0.5 * (t1 + t2)).unwrap()).unwrap();
        let p1 = a.linear_combination(1.0, &disk, t1).unwrap();
        let p2 = a.linear_combination(1.0, &disk, t2).unwrap();
        let avg = g.measure_polygon(&p1.linear_combination(0.5, &p2, 0.5).unwrap()).unwrap();
        prop_assert!((mid - avg).abs() <= 1e-8, "{} vs {}", mid, avg);
    }

    #[test]
    fn violations_survive_tightening(a in 0.05..0.95f64, l in 0.1..0.9f64) {
        // x 1_{x >= 0} is 1/2-concave and breaks the arithmetic mean on symmetric intervals
        let ev = MeasureEvaluator::with_default_policy(Density1D::power_plus(1.0).unwrap());
        let sa: SetRep = IntervalUnion::symmetric(a).unwrap().into();
        let sb: SetRep = IntervalUnion::symmetric(1.0).unwrap().into();
        let r = check_bm(&ev, &sa, &sb, 1.0, &[l], &BmOptions::grid_only()).unwrap();
        if r.is_violation() {
            let tight = ev.with_policy(QuadraturePolicy::default().tightened(10.0)).unwrap();
            let t = check_bm(&tight, &sa, &sb, 1.0, &[l], &BmOptions::grid_only()).unwrap();
            prop_assert!(t.worst_deficit < 0.0);
        }
    }
}

fn ev_gauss() -> MeasureEvaluator {
    MeasureEvaluator::with_default_policy(DensityND::gaussian_standard(2).unwrap())
}
