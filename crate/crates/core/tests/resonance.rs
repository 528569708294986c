mod common;

use std::collections::{BTreeSet, HashSet};

use nls_cascade::diophantine::OmegaSpec;
use nls_cascade::lambda_set::{scale_set, BaseSet};
use nls_cascade::resonance::*;
use nls_cascade::scalar::{rat, QuadSurd};
use nls_cascade::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn m(j: i64, k: i64) -> Mode {
    Mode::new(j, k)
}

fn closed_quartet() -> impl Strategy<Value = Quartet> {
    prop::array::uniform6(-40i64..=40).prop_map(|[a, b, c, d, e, f]| {
        let (n1, n2, n3) = (m(a, b), m(c, d), m(e, f));
        Quartet::new(n1, n2, n3, n1 - n2 + n3)
    })
}

#[test]
fn omega_reference_values() {
    let q = Quartet::new(m(0, 0), m(1, 1), m(2, 0), m(1, -1));
    assert_eq!(omega_r(&q, &rat(2, 1)), rat(-2, 1));
    let r2 = QuadSurd::sqrt(2) * QuadSurd::sqrt(2);
    assert_eq!(RSquared::Exact(r2).omega(&q), OmegaValue::Exact(QuadSurd::rational(rat(-2, 1))));
    // (0,0),(1,0),(1,1),(0,1) is a rectangle for every r
    let rect = Quartet::new(m(0, 0), m(1, 0), m(1, 1), m(0, 1));
    assert_eq!(omega_r(&rect, &rat(7, 3)), rat(0, 1));
}

#[test]
fn sqrt2_omega_is_exact_surd() {
    let omega = OmegaSpec::sqrt(2).unwrap();
    let q = Quartet::new(m(0, 0), m(1, 1), m(2, 0), m(1, -1));
    match RSquared::from_omega(&omega) {
        RSquared::Exact(_) => {}
        other => panic!("expected exact r², got {other:?}"),
    }
    assert_eq!(RSquared::from_omega(&omega).omega(&q).is_zero(), Some(false));
}

#[test]
fn single_mode_and_empty_have_no_a1() {
    assert!(enumerate_a1_in(&[m(5, -2)]).is_empty());
    assert!(matches!(l1_of(&[], &RSquared::rational(rat(2, 1))), Err(Error::EmptyA1)));
}

/// All ordered quartets with three slots in `modes` and the fourth outside.
fn brute_force_a1(modes: &[Mode]) -> BTreeSet<Quartet> {
    let set: HashSet<Mode> = modes.iter().copied().collect();
    let mut out = BTreeSet::new();
    for &x in modes {
        for &y in modes {
            for &z in modes {
                let candidates = [
                    Quartet::new(x - y + z, x, y, z),
                    Quartet::new(x, x + z - y, z, y),
                    Quartet::new(x, y, y + z - x, z),
                    Quartet::new(x, y, z, x - y + z),
                ];
                for (slot, q) in candidates.iter().enumerate() {
                    assert!(q.is_momentum_closed());
                    if !set.contains(&q.0[slot]) {
                        out.insert(q.canonical());
                    }
                }
            }
        }
    }
    out
}

#[test]
fn a1_matches_brute_force() {
    for (name, p, q) in [("unit_square.json", 1, 1), ("unit_square.json", 3, 2), ("n3_seed1.json", 1, 1)] {
        let set = common::fixture(name, p, q);
        let fast: BTreeSet<Quartet> = enumerate_a1(&set).into_iter().collect();
        assert_eq!(fast, brute_force_a1(&set.modes()), "{name} ({p},{q})");
        let ms = set.mode_set();
        assert!(fast.iter().all(|q| classify_in(q, &ms).unwrap() == 1));
    }
}

#[test]
fn classify_counts_outsiders() {
    let set = scale_set(&BaseSet::unit_square(), 1, 1).unwrap();
    let ms = set.mode_set();
    let inside = Quartet::new(m(0, 0), m(0, 1), m(1, 1), m(1, 0));
    assert_eq!(classify_quartet(&inside, &set).unwrap(), 0);
    let two = Quartet::new(m(0, 0), m(2, 0), m(3, 0), m(1, 0));
    assert_eq!(classify_in(&two, &ms).unwrap(), 2);
    let four = Quartet::new(m(5, 5), m(6, 5), m(6, 6), m(5, 6));
    assert_eq!(classify_in(&four, &ms).unwrap(), 4);
    let open = Quartet::new(m(0, 0), m(1, 0), m(1, 1), m(0, 0));
    assert!(matches!(classify_in(&open, &ms), Err(Error::NotMomentumClosed(_))));
}

#[test]
fn u0_on_unit_square() {
    // the only A(0) family is the square itself, with Ω_r = 0 for every r
    let set = scale_set(&BaseSet::unit_square(), 1, 1).unwrap();
    let u0 = compute_u0(&set, &RSquared::from_omega(&OmegaSpec::sqrt(2).unwrap())).unwrap();
    assert_eq!(u0.value.is_zero(), Some(true));
}

#[test]
fn l1_unit_square_sqrt2() {
    let set = scale_set(&BaseSet::unit_square(), 1, 1).unwrap();
    let l1 = compute_l1(&set, &RSquared::from_omega(&OmegaSpec::sqrt(2).unwrap())).unwrap();
    assert_eq!(l1.value.is_zero(), Some(false));
    let v = r2_omega_f64(&l1.witness);
    assert!((l1.value.to_f64() - v.abs()).abs() < 1e-12);
}

fn r2_omega_f64(q: &Quartet) -> f64 {
    omega_r(q, &2.0f64)
}

#[test]
fn a1_csv_rows() {
    let set = scale_set(&BaseSet::unit_square(), 1, 1).unwrap();
    let a1 = enumerate_a1(&set);
    let mut buf = Vec::new();
    write_quartet_csv(&mut buf, &a1, &RSquared::rational(rat(2, 1)), &set.mode_set()).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), a1.len() + 1);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",1")));
}

proptest! {
    #[test]
    fn symmetric_under_pair_swaps(q in closed_quartet(), num in 1i64..50, den in 1i64..50) {
        let r2 = rat(num, den);
        let [a, b, c, d] = q.0;
        let v = omega_r(&q, &r2);
        prop_assert_eq!(omega_r(&Quartet::new(c, b, a, d), &r2), v.clone());
        prop_assert_eq!(omega_r(&Quartet::new(a, d, c, b), &r2), v.clone());
        prop_assert_eq!(omega_r(&Quartet::new(b, a, d, c), &r2), -v);
    }

    #[test]
    fn omega_is_twice_the_inner_product(q in closed_quartet(), num in 1i64..50, den in 1i64..50) {
        // Ω_r(n1,n2,n3,n4) = −2⟨n1 − n2, n3 − n2⟩_r on a closed quartet
        let [a, b, c, _] = q.0;
        let u = a - b;
        let w = c - b;
        let r2 = rat(num, den);
        let ip = BigRational::from_integer(BigInt::from(u.j * w.j)) + r2.clone() * BigRational::from_integer(BigInt::from(u.k * w.k));
        prop_assert_eq!(omega_r(&q, &r2), -(ip * rat(2, 1)));
    }

    #[test]
    fn rectangles_are_resonant(a in -30i64..30, b in -30i64..30, w in 1i64..20, h in 1i64..20, num in 1i64..50) {
        let rect = Quartet::new(m(a, b), m(a + w, b), m(a + w, b + h), m(a, b + h));
        prop_assert_eq!(omega_r(&rect, &rat(num, 7)), rat(0, 1));
    }

    #[test]
    fn scaling_covariance(q in closed_quartet(), p in 1i64..30, s in 1i64..30, num in 1i64..40, den in 1i64..40) {
        // Ω_r(S_{p,q} Q) = p² Ω_{r q/p}(Q)
        let r = rat(num, den);
        let lhs = omega_r(&q.scaled(p, s), &(r.clone() * r.clone()));
        let r_eff = r * rat(s, p);
        let rhs = omega_r(&q, &(r_eff.clone() * r_eff)) * rat(p * p, 1);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn interval_encloses_exact(q in closed_quartet()) {
        let decimal = OmegaSpec::decimal("1.41421356237309504880168872").unwrap();
        let (lo, hi) = RSquared::from_omega(&decimal).omega(&q).bounds();
        let exact = omega_r(&q, &rat(2, 1));
        let slack = rat(1, 1_000_000_000);
        prop_assert!(lo <= exact.clone() + slack.clone() && exact - slack <= hi);
    }
}
