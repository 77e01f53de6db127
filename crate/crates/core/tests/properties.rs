//! Property-based invariants of the group laws, the intertwiner, the bijections and the charts.

use proptest::prelude::*;
use repro_lifts::cli::parse_range;
use repro_lifts::config::RunConfig;
use repro_lifts::function::{
    inner_product_exact, norm_exact, AtomSum, FiberFactor, PointEvaluator, RadialFactor, RadialWeight, TensorAtom, C64,
};
use repro_lifts::group::{act_atoms, compose, inverse, CaseKind, CaseTag, GroupElement};
use repro_lifts::intertwine::{apply_u, apply_u_inv, CoordChart};
use repro_lifts::shannon::{band_index, canonical_d_r, canonical_d_r_inv, canonical_d_t, canonical_d_t_inv};
use repro_lifts::verify::Defect;

fn case_strategy() -> impl Strategy<Value = CaseTag> {
    prop_oneof![
        Just(CaseTag::l()),
        Just(CaseTag::q()),
        (-1.0f64..-0.05).prop_map(|a| CaseTag::one(a).unwrap()),
        Just(CaseTag::two()),
        (0.0f64..3.0).prop_map(|a| CaseTag::three(a).unwrap()),
        (0.0f64..3.0).prop_map(|a| CaseTag::four(a).unwrap()),
    ]
}

fn element(case: &CaseTag, u: f64, t: f64) -> GroupElement {
    match case.kind {
        // the one-dimensional groups use a positive dilation parameter
        CaseKind::L | CaseKind::Q => GroupElement::new(u, t.exp()),
        _ => GroupElement::new(u, t),
    }
}

fn close(a: &GroupElement, b: &GroupElement, tol: f64) -> bool {
    (a.u - b.u).abs() <= tol * (1.0 + a.u.abs()) && (a.t - b.t).abs() <= tol * (1.0 + a.t.abs())
}

fn phase_free() -> impl Strategy<Value = AtomSum> {
    prop::collection::vec((0.05f64..1.5, 0.05f64..1.5, prop::sample::select(vec![0.0, 0.5, 1.0, 2.0]), -1.0f64..1.0, -1.0f64..1.0, -1i64..=1, -2i64..=2), 1..4)
        .prop_map(|v| {
            AtomSum::new(
                v.into_iter()
                    .map(|(a, w, p, re, im, k, l)| {
                        TensorAtom::new(C64::new(re, im), RadialFactor::indicator(a, a + w).with_power(p), FiberFactor::cell(k, l))
                    })
                    .collect(),
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn group_law_is_associative_with_inverses(
        case in case_strategy(),
        a in (-2.0f64..2.0, -1.0f64..1.0),
        b in (-2.0f64..2.0, -1.0f64..1.0),
        c in (-2.0f64..2.0, -1.0f64..1.0),
    ) {
        let (g1, g2, g3) = (element(&case, a.0, a.1), element(&case, b.0, b.1), element(&case, c.0, c.1));
        let left = compose(&case, &compose(&case, &g3, &g2).unwrap(), &g1).unwrap();
        let right = compose(&case, &g3, &compose(&case, &g2, &g1).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
        let e = compose(&case, &inverse(&case, &g1).unwrap(), &g1).unwrap();
        prop_assert!(close(&e, &case.identity(), 1e-12));
    }

    #[test]
    fn one_dimensional_actions_are_homomorphisms(
        rep in prop::sample::select(vec![CaseKind::L, CaseKind::Q]),
        f in phase_free(),
        a in (-2.0f64..2.0, -1.0f64..1.0),
        b in (-2.0f64..2.0, -1.0f64..1.0),
        x in 0.01f64..3.0,
        y in -1.5f64..1.5,
    ) {
        let case = if rep == CaseKind::L { CaseTag::l() } else { CaseTag::q() };
        let (g1, g2) = (element(&case, a.0, a.1), element(&case, b.0, b.1));
        let two_steps = act_atoms(&case, &g2, &act_atoms(&case, &g1, &f).unwrap()).unwrap();
        let one_step = act_atoms(&case, &compose(&case, &g2, &g1).unwrap(), &f).unwrap();
        let (p, q) = (PointEvaluator::from_atoms(&two_steps).unwrap(), PointEvaluator::from_atoms(&one_step).unwrap());
        prop_assert!((p.eval(x, y) - q.eval(x, y)).norm() <= 1e-10 * (1.0 + q.eval(x, y).norm()));
    }

    #[test]
    fn actions_preserve_norms(f in phase_free(), u in -2.0f64..2.0, t in -1.0f64..1.0) {
        let case = CaseTag::l();
        let g = element(&case, u, t);
        let n0 = norm_exact(&f, RadialWeight::LEBESGUE).unwrap();
        let n1 = norm_exact(&act_atoms(&case, &g, &f).unwrap(), RadialWeight::LEBESGUE).unwrap();
        prop_assert!((n0 - n1).abs() <= 1e-12 * (1.0 + n0));
    }

    #[test]
    fn u_is_unitary_and_invertible(f in phase_free(), g in phase_free(), x in 0.05f64..1.5, y in -1.5f64..1.5) {
        let (uf, ug) = (apply_u(&f).unwrap(), apply_u(&g).unwrap());
        let before = inner_product_exact(&f, &g, RadialWeight::LEBESGUE).unwrap();
        let after = inner_product_exact(&uf, &ug, RadialWeight::LEBESGUE).unwrap();
        prop_assert!((before - after).norm() <= 1e-12 * (1.0 + before.norm()));
        let back = PointEvaluator::from_atoms(&apply_u_inv(&uf).unwrap()).unwrap();
        let orig = PointEvaluator::from_atoms(&f).unwrap();
        prop_assert!((back.eval(x, y) - orig.eval(x, y)).norm() <= 1e-12 * (1.0 + orig.eval(x, y).norm()));
    }

    #[test]
    fn canonical_bijections_round_trip(k in -5000i64..5000, l in -5000i64..5000) {
        let n = canonical_d_r(k, l);
        prop_assert!(n >= 1);
        prop_assert_eq!(canonical_d_r_inv(n).unwrap(), (k, l));
        prop_assert_eq!(canonical_d_t_inv(canonical_d_t(l)).unwrap(), l);
    }

    #[test]
    fn band_index_brackets_its_point(xi in 1e-12f64..1.0) {
        let n = band_index(xi).unwrap();
        prop_assert!(2f64.powi(-(n as i32)) < xi && xi <= 2f64.powi(1 - n as i32));
    }

    #[test]
    fn charts_round_trip(case in case_strategy().prop_filter("planar", |c| c.kind.is_planar()), x1 in 0.01f64..5.0, x2 in -3.0f64..3.0) {
        let chart = CoordChart::new(case).unwrap();
        let x2 = if case.kind == CaseKind::III { x2.rem_euclid(1.0) } else { x2 };
        let back = chart.backward(chart.forward((x1, x2)).unwrap()).unwrap();
        prop_assert!((back.0 - x1).abs() <= 1e-14 * x1.max(1.0));
        let d = if case.kind == CaseKind::III { let e = back.1 - x2; e - e.round() } else { back.1 - x2 };
        prop_assert!(d.abs() <= 1e-12 * x2.abs().max(1.0));
    }

    #[test]
    fn ranges_parse_back(a in -1000i64..1000, w in 0i64..1000) {
        prop_assert_eq!(parse_range(&format!("{a}..{}", a + w)).unwrap(), (a, a + w));
    }

    #[test]
    fn defect_max_propagates_nan(vals in prop::collection::vec(0.0f64..1.0, 0..20), nan_at in any::<prop::sample::Index>()) {
        let d = Defect::from_values(vals.iter().copied());
        prop_assert_eq!(d.max, vals.iter().copied().fold(0.0, f64::max));
        let mut with_nan = vals.clone();
        with_nan.insert(nan_at.index(vals.len() + 1), f64::NAN);
        prop_assert!(Defect::from_values(with_nan).max.is_nan());
    }

    #[test]
    fn config_hash_survives_round_trip(seed in any::<u64>(), tol in 1e-15f64..1e-3) {
        let mut c = RunConfig::default();
        c.seed = seed;
        c.tolerances.gram = tol;
        let back = RunConfig::parse(&serde_json::to_string(&c).unwrap()).unwrap();
        prop_assert_eq!(back.hash(), c.hash());
    }
}
