mod common;

use std::time::Instant;

use nls_cascade::lambda_set::*;
use nls_cascade::resonance::{Mode, Quartet};
use nls_cascade::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn m(j: i64, k: i64) -> Mode {
    Mode::new(j, k)
}

fn opts() -> VerifyOptions {
    VerifyOptions::default()
}

#[test]
fn unit_square_passes_both_scanners() {
    for (p, q) in [(1, 1), (3, 2), (7, 5)] {
        let set = scale_set(&BaseSet::unit_square(), p, q).unwrap();
        let fast = verify_properties(&set, &opts()).unwrap();
        let slow = verify_properties_exhaustive(&set, &opts()).unwrap();
        assert!(fast.all_pass(), "({p},{q}) {:?}", fast.failing());
        assert!(slow.all_pass(), "({p},{q}) {:?}", slow.failing());
        assert_eq!(slow.scanned, 4u128.pow(4) + 4u128.pow(3));
    }
}

#[test]
fn seeded_fixtures_pass() {
    let t = Instant::now();
    for name in ["n3_seed1.json", "n4_seed1.json", "n5_seed1.json"] {
        let set = common::fixture(name, 1, 1);
        let report = verify_properties(&set, &opts()).unwrap();
        assert!(report.all_pass(), "{name}: {:?}", report.failing());
    }
    let n3 = common::fixture("n3_seed1.json", 3, 2);
    assert!(verify_properties_exhaustive(&n3, &opts()).unwrap().all_pass());
    assert!(t.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn extra_mode_fails_with_witnesses() {
    let set = common::fixture("unit_square_extra.json", 1, 1);
    for report in [
        verify_properties(&set, &opts()).unwrap(),
        verify_properties_exhaustive(&set, &opts()).unwrap(),
    ] {
        assert!(!report.all_pass());
        for p in [Property::Closure, Property::ParentsSibling, Property::LinearRelations] {
            let c = report.check(p);
            assert!(!c.pass && !c.counterexamples.is_empty(), "{p:?}");
        }
        assert!(report
            .check(Property::ParentsSibling)
            .counterexamples
            .contains(&Witness::Mode(m(2, 1))));
    }
}

#[test]
fn unmatched_parent_fails_spouse_property() {
    let base = BaseSet::new(
        vec![vec![m(0, 0), m(1, 1), m(9, -7)], vec![m(1, 0), m(0, 1)]],
        vec![vec![Quartet::new(m(0, 0), m(0, 1), m(1, 1), m(1, 0))]],
    )
    .unwrap();
    let set = scale_set(&base, 1, 1).unwrap();
    let report = verify_properties(&set, &opts()).unwrap();
    let c = report.check(Property::SpouseChildren);
    assert!(!c.pass);
    assert_eq!(c.counterexamples, vec![Witness::Mode(m(9, -7))]);
}

#[test]
fn wrong_torus_ratio_is_detected() {
    // the (3,2)-scaled families are not resonant for the square torus
    let scaled = common::fixture("n3_seed1.json", 3, 2);
    let base = BaseSet::new(scaled.generations().to_vec(), scaled.families()).unwrap();
    let set = scale_set(&base, 1, 1).unwrap();
    let report = verify_properties(&set, &opts()).unwrap();
    assert!(!report.check(Property::Relations).pass);
    assert!(!report.check(Property::SpouseChildren).pass);
}

#[test]
fn scanners_agree_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let mut modes: Vec<Mode> = Vec::new();
        while modes.len() < 6 {
            let x = m(rng.gen_range(-3..=3), rng.gen_range(-3..=3));
            if !modes.contains(&x) {
                modes.push(x);
            }
        }
        let base = BaseSet::unrelated(vec![modes[..3].to_vec(), modes[3..].to_vec()]).unwrap();
        let (p, q) = [(1, 1), (3, 2)][rng.gen_range(0..2)];
        let set = scale_set(&base, p, q).unwrap();
        let o = VerifyOptions {
            budget: u128::MAX,
            max_witnesses: usize::MAX,
        };
        let fast = verify_properties(&set, &o).unwrap();
        let slow = verify_properties_exhaustive(&set, &o).unwrap();
        assert_eq!(fast.failing(), slow.failing(), "{modes:?}");
        for p in Property::ALL {
            assert_eq!(fast.check(p).counterexamples, slow.check(p).counterexamples, "{p:?} {modes:?}");
        }
    }
}

#[test]
fn budget_is_enforced() {
    let set = common::fixture("n4_seed1.json", 1, 1);
    let tight = VerifyOptions {
        budget: 10,
        max_witnesses: 1,
    };
    assert!(matches!(verify_properties(&set, &tight), Err(Error::BudgetExceeded { .. })));
    assert!(matches!(
        verify_properties_exhaustive(&set, &tight),
        Err(Error::BudgetExceeded { .. })
    ));
}

#[test]
fn builder_is_deterministic_and_valid() {
    let a = build_base_set(3, &Strategy::for_generations(3), 11).unwrap();
    let b = build_base_set(3, &Strategy::for_generations(3), 11).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.generations().iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 4, 4]);
    let set = scale_set(&a, 1, 1).unwrap();
    assert!(verify_properties(&set, &opts()).unwrap().all_pass());
    assert!(matches!(
        build_base_set(1, &Strategy::for_generations(1), 0),
        Err(Error::InvalidInput(_))
    ));
}

#[test]
fn fixture_round_trips() {
    for name in ["unit_square.json", "n3_seed1.json", "n5_seed1.json"] {
        let text = std::fs::read_to_string(common::fixture_path(name)).unwrap();
        let set = LambdaSet::from_json(&text).unwrap();
        assert_eq!(LambdaSet::from_json(&set.to_json()).unwrap(), set);
    }
}

#[test]
fn weights_and_radius() {
    let s = scale_set(&BaseSet::unit_square(), 3, 2).unwrap();
    assert_eq!(generation_weights(&s, 1.0), vec![13.0, 13.0]);
    assert_eq!(generation_weights(&s, 0.0), vec![1.0, 2.0]);
    let r = radius_bracket(&s);
    assert!(r.origin_present);
    assert!((r.r_lo - 1.0).abs() < 1e-15 && (r.r_hi - 13f64.sqrt() / 2.0).abs() < 1e-15);
    assert!(matches!(scale_set(&BaseSet::unit_square(), 0, 1), Err(Error::InvalidInput(_))));
}
