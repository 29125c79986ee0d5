use std::collections::BTreeSet;

use giry::algebra::{algebra_report, build_algebra, coseparating_maps};
use giry::check::CheckConfig;
use giry::convex::builtin::{meng_space, rational_box};
use giry::convex::{chain, product_space, ChainRule, Point};
use giry::fields::{dyadic_field, ev_field, generate_field};
use giry::measures::{
    expectation_functional, measure_space_id, mu, pushforward, FinMeasure, MetaMeasure,
};
use giry::metric::{wasserstein, ExtMetric, Metric};
use giry::rational::{int, rat, ExtValue};
use giry::registry::Registry;

#[test]
fn meng_measure_from_text_through_the_algebra() {
    let m = meng_space(int(1), int(1));
    let text = "measure on meng: L@2/5:1/2, H@3/5:1/4, H@1/5:1/4";
    assert_eq!(measure_space_id(text).unwrap(), "meng");
    let p = FinMeasure::parse(text, &m).unwrap();
    let h = build_algebra(&ExtMetric::default_for(&m), &CheckConfig::default()).unwrap();
    // the lower half is glued to 0 on the upper branch: (0·1/2 + 3/5·1/4 + 1/5·1/4) = 1/5
    assert_eq!(m.fmt_point(&h.apply(&p).unwrap()), "H@1/5");
    for map in coseparating_maps(&m) {
        let expected = expectation_functional(&p, &map).unwrap();
        assert_eq!(
            map.eval_ext(&h.apply(&p).unwrap()).unwrap(),
            expected,
            "{}",
            map.name
        );
    }
}

#[test]
fn every_registered_space_is_accepted_or_expected_to_fail() {
    let cfg = CheckConfig::default().with_budget(30);
    for entry in Registry::builtins().entries() {
        match build_algebra(&entry.metric, &cfg) {
            Ok(h) => {
                assert!(!entry.expect_reject, "{}", entry.space.id);
                assert!(
                    algebra_report(&h, &entry.metric, &cfg).passed(),
                    "{}",
                    entry.space.id
                );
            }
            Err(r) => assert!(entry.expect_reject, "{r}"),
        }
    }
}

#[test]
fn transport_on_a_product_space() {
    let s = product_space(&rational_box(), &chain("K2", 2, ChainRule::Min));
    let metric = ExtMetric::new(
        &s,
        Metric::Sum(Box::new(Metric::L1), Box::new(Metric::Discrete)),
    )
    .unwrap();
    let p = FinMeasure::dirac(&s, s.parse_point("<(0,0);0>").unwrap()).unwrap();
    let q = FinMeasure::new(
        &s,
        [
            (s.parse_point("<(1,0);0>").unwrap(), rat(1, 2)),
            (s.parse_point("<(0,2);1>").unwrap(), rat(1, 2)),
        ],
    )
    .unwrap();
    // 1/2·1 + 1/2·(2 + 1)
    assert_eq!(
        wasserstein(&p, &q, &metric).unwrap().cost,
        ExtValue::Finite(int(2))
    );
}

#[test]
fn pushforward_commutes_with_flattening() {
    let m = meng_space(int(1), int(1));
    let maps = coseparating_maps(&m);
    let a = FinMeasure::parse("measure on meng: L@1/2:1/2, H@1:1/2", &m).unwrap();
    let b = FinMeasure::parse("measure on meng: H@1/4:1", &m).unwrap();
    let q = MetaMeasure::new([(a, rat(1, 3)), (b, rat(2, 3))]).unwrap();
    for map in &maps {
        let flat_then_push = pushforward(map, &mu(&q)).unwrap();
        let push_then_flat = mu(&q.map_inner(|p| pushforward(map, p)).unwrap());
        assert_eq!(flat_then_push, push_then_flat, "{}", map.name);
    }
}

#[test]
fn fields_grow_along_the_diagonal() {
    let i = giry::convex::builtin::unit_interval();
    let zero = Point::scalar(int(0));
    let measures: Vec<FinMeasure> = (0..=8)
        .map(|k| {
            FinMeasure::new(
                &i,
                [
                    (zero.clone(), rat(k, 8)),
                    (Point::scalar(int(1)), rat(8 - k, 8)),
                ],
            )
            .unwrap()
        })
        .collect();
    let us = vec![
        BTreeSet::from([zero.clone()]),
        BTreeSet::from([Point::scalar(int(1))]),
    ];
    let mut previous = ev_field(&measures, &us, 0).unwrap();
    for n in 1..=4 {
        let next = ev_field(&measures, &us, n).unwrap();
        assert!(next.refines(&previous));
        previous = next;
    }
    // the values k/8 are separated once the cuts reach eighths
    assert_eq!(previous.atoms().len(), 9);
    assert!(dyadic_field(3).unwrap().refines(&dyadic_field(2).unwrap()));
    assert!(
        generate_field(vec!["a".into()], vec![BTreeSet::from([0])])
            .unwrap()
            .members()
            .unwrap()
            .len()
            == 2
    );
}
