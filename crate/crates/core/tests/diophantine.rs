use nls_cascade::diophantine::*;
use nls_cascade::scalar::{ln_bigint, rat, QuadSurd};
use nls_cascade::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Independent oracle: for ω = √d the classical recurrence
/// m' = a·q − m, q' = (d − m'^2)/q, a' = floor((a0 + m')/q').
fn sqrt_cf_oracle(d: i64, depth: usize) -> Vec<i64> {
    let a0 = (d as f64).sqrt() as i64;
    let (mut m, mut q, mut a) = (0i64, 1i64, a0);
    let mut out = vec![a0];
    while out.len() < depth {
        m = a * q - m;
        q = (d - m * m) / q;
        a = (a0 + m) / q;
        out.push(a);
    }
    out
}

#[test]
fn sqrt_two_and_golden_quotients() {
    let e = expand_continued_fraction(&OmegaSpec::sqrt(2).unwrap(), 5).unwrap();
    assert_eq!(e.quotients, ints(&sqrt_cf_oracle(2, 5)));
    assert_eq!(e.quotients, ints(&[1, 2, 2, 2, 2]));
    let g = expand_continued_fraction(&OmegaSpec::golden(), 5).unwrap();
    assert_eq!(g.quotients, ints(&[1, 1, 1, 1, 1]));
}

#[test]
fn surd_expansion_matches_oracle_for_many_radicands() {
    for d in [2, 3, 5, 6, 7, 13, 19, 31, 94, 151] {
        let e = expand_continued_fraction(&OmegaSpec::sqrt(d as u64).unwrap(), 30).unwrap();
        assert_eq!(e.quotients, ints(&sqrt_cf_oracle(d, 30)), "d = {d}");
    }
}

#[test]
fn general_surd_matches_float_expansion() {
    // (3 − √2)/1 = 1.5857..., negative b and a shift
    let w: OmegaSpec = "surd:3,-1,2,1".parse().unwrap();
    let e = expand_continued_fraction(&w, 8).unwrap();
    let mut x = 3.0 - 2f64.sqrt();
    for a in &e.quotients {
        let f = x.floor();
        assert_eq!(BigInt::from(f as i64), *a);
        x = 1.0 / (x - f);
    }
}

#[test]
fn rational_terminates() {
    let e = expand_continued_fraction(&OmegaSpec::rational(7, 5).unwrap(), 10).unwrap();
    assert_eq!(e.quotients, ints(&[1, 2, 2]));
    assert!(e.terminated);
    let c = convergents(&OmegaSpec::rational(7, 5).unwrap(), 10).unwrap();
    let last = c.last().unwrap();
    assert_eq!((last.p.clone(), last.q.clone()), (BigInt::from(7), BigInt::from(5)));
    assert!(last.abs_error_exact.as_ref().unwrap().is_zero());
}

#[test]
fn convergent_sequences() {
    let c = convergents(&OmegaSpec::sqrt(2).unwrap(), 4).unwrap();
    let pq: Vec<(i64, i64)> = c
        .iter()
        .map(|c| (c.p.clone().try_into().unwrap(), c.q.clone().try_into().unwrap()))
        .collect();
    assert_eq!(pq, vec![(1, 1), (3, 2), (7, 5), (17, 12)]);
    let g = convergents(&OmegaSpec::golden(), 5).unwrap();
    let pq: Vec<(i64, i64)> = g
        .iter()
        .map(|c| (c.p.clone().try_into().unwrap(), c.q.clone().try_into().unwrap()))
        .collect();
    assert_eq!(pq, vec![(1, 1), (2, 1), (3, 2), (5, 3), (8, 5)]);
}

#[test]
fn decimal_expansion_runs_out_of_digits() {
    let w = OmegaSpec::decimal("1.41421356").unwrap();
    assert!(expand_continued_fraction(&w, 4).is_ok());
    assert!(matches!(expand_continued_fraction(&w, 40), Err(Error::PrecisionExhausted(_))));
}

#[test]
fn decimal_and_surd_agree_while_certified() {
    let dec = OmegaSpec::decimal("1.4142135623730950488016887242096980785696718753769").unwrap();
    let e = expand_continued_fraction(&dec, 20).unwrap();
    let s = expand_continued_fraction(&OmegaSpec::sqrt(2).unwrap(), 20).unwrap();
    assert_eq!(e.quotients, s.quotients);
}

#[test]
fn brackets_hold_for_decimal_input() {
    let dec = OmegaSpec::decimal("1.4142135623730950488016887242096980785696718753769").unwrap();
    let c = convergents(&dec, 12).unwrap();
    for w in c.windows(2) {
        assert!(verify_bracket(&dec, &w[0], &w[1].q).unwrap());
    }
}

#[test]
fn psi_values() {
    let v = psi_value(&ApproxProfile::log(1), &big(3)).unwrap().value();
    assert!((v - 1.0 / (3.0 * 3f64.ln())).abs() < 1e-14);
    assert!((v - 0.30341).abs() < 1e-5);
    let v = psi_value(&ApproxProfile::power(1, rat(2, 1)), &big(10)).unwrap().value();
    assert!((v - 1e-3).abs() < 1e-17);
    let v = psi_value(&ApproxProfile::power(2, rat(1, 1)), &big(4)).unwrap().value();
    assert!((v - 0.125).abs() < 1e-16);
    assert!(matches!(psi_value(&ApproxProfile::log(1), &big(1)), Err(Error::Domain(_))));
    assert!(matches!(psi_value(&ApproxProfile::log(1), &big(0)), Err(Error::Domain(_))));
}

#[test]
fn psi_convergent_examples() {
    let w = OmegaSpec::sqrt(2).unwrap();
    let t = is_psi_convergent(&w, &big(7), &big(5), &ApproxProfile::log(1)).unwrap();
    assert!(t.holds);
    let expected = 1.0 / (25.0 * 5f64.ln()) - (1.4 - 2f64.sqrt()).abs();
    assert!((t.margin - expected).abs() < 1e-12);
    let t = is_psi_convergent(&w, &big(3), &big(2), &ApproxProfile::power(1, rat(2, 1))).unwrap();
    assert!(!t.holds);
    let r = OmegaSpec::rational(7, 5).unwrap();
    let t = is_psi_convergent(&r, &big(7), &big(5), &ApproxProfile::log(1)).unwrap();
    assert!(t.holds);
    assert!((t.margin - 1.0 / (25.0 * 5f64.ln())).abs() < 1e-15);
}

#[test]
fn selection_examples() {
    let w = OmegaSpec::sqrt(2).unwrap();
    let prof = ApproxProfile::log(1);
    let c = select_convergent(&w, &prof, |q, _| *q >= big(5), 10).unwrap();
    assert_eq!((c.p, c.q), (big(7), big(5)));
    let bound = 1.0 / 5f64.ln();
    let c = select_convergent(&w, &prof, |q, psi| (ln_bigint(q) + psi.ln).exp() <= bound, 10).unwrap();
    assert_eq!((c.p, c.q), (big(7), big(5)));
    assert_eq!(
        select_convergent(&w, &prof, |_, _| false, 10),
        Err(Error::NotFoundWithinDepth { depth: 10 })
    );
}

#[test]
fn liouville_examples() {
    let w = OmegaSpec::sqrt(2).unwrap();
    let ev = liouville_guard(&w, 10).unwrap();
    assert!(ev.holds && ev.witness.is_none() && ev.depth == 10);
    for w in [OmegaSpec::golden(), OmegaSpec::sqrt(3).unwrap()] {
        assert!(liouville_guard(&w, 20).unwrap().holds);
    }
    let early = liouville_guard_from(&w, 10, 2).unwrap();
    assert_eq!(early.witness.map(|c| c.q), Some(big(2)));
    // 1 + 10^-1 + 10^-4 + 10^-40: 11/10 sits 10^-4 away, below 10^-(1+ln 10).
    let digits = format!("1.1001{}1", "0".repeat(35));
    let dec = OmegaSpec::decimal(&digits).unwrap();
    let ev = liouville_guard(&dec, 4).unwrap();
    assert!(!ev.holds);
    let wit = ev.witness.unwrap();
    assert_eq!((wit.p, wit.q), (big(11), big(10)));
    assert!(matches!(
        liouville_guard(&OmegaSpec::rational(7, 5).unwrap(), 4),
        Err(Error::RationalOmega(_))
    ));
}

#[test]
fn q_psi_is_decreasing() {
    let profiles = [
        ApproxProfile::log(1),
        ApproxProfile::log(3),
        ApproxProfile::power(1, rat(1, 2)),
        ApproxProfile::power(2, rat(3, 1)),
    ];
    for prof in &profiles {
        let mut prev = f64::INFINITY;
        for q in 3..2000 {
            let v = ln_bigint(&big(q)) + psi_value(prof, &big(q)).unwrap().ln;
            assert!(v < prev, "{prof:?} at q = {q}");
            prev = v;
        }
    }
}

#[test]
fn selection_is_deterministic() {
    let w = OmegaSpec::golden();
    let prof = ApproxProfile::log(1);
    let a = select_convergent(&w, &prof, |q, _| *q >= big(3), 30).unwrap();
    let b = select_convergent(&w, &prof, |q, _| *q >= big(3), 30).unwrap();
    assert_eq!(a, b);
    assert_eq!((a.p, a.q), (big(5), big(3)));
}

fn three_constants() -> Vec<OmegaSpec> {
    vec![OmegaSpec::sqrt(2).unwrap(), OmegaSpec::golden(), OmegaSpec::sqrt(3).unwrap()]
}

#[test]
fn convergent_recurrence_holds_exactly() {
    for w in three_constants() {
        let e = expand_continued_fraction(&w, 25).unwrap();
        let c = convergents(&w, 25).unwrap();
        for n in 2..c.len() {
            let a = &e.quotients[n];
            assert_eq!(c[n].p, a * &c[n - 1].p + &c[n - 2].p, "{w} p at {n}");
            assert_eq!(c[n].q, a * &c[n - 1].q + &c[n - 2].q, "{w} q at {n}");
        }
    }
}

#[test]
fn brackets_and_dirichlet_hold_to_depth_twenty() {
    for w in three_constants() {
        let c = convergents(&w, 21).unwrap();
        for k in 0..20 {
            assert!(verify_bracket(&w, &c[k], &c[k + 1].q).unwrap(), "{w} depth {k}");
            let err = c[k].abs_error_exact.clone().unwrap();
            let q2 = QuadSurd::rational(BigRational::new(BigInt::one(), &c[k].q * &c[k].q));
            assert!(err <= q2, "{w} Dirichlet at {k}");
        }
    }
}

#[test]
fn bracket_rejects_a_wrong_successor() {
    let w = OmegaSpec::sqrt(2).unwrap();
    let c = convergents(&w, 4).unwrap();
    // pairing 7/5 with a far larger q_next pushes the upper bound below the error
    assert!(!verify_bracket(&w, &c[2], &big(1000)).unwrap());
}

proptest! {
    #[test]
    fn quotients_of_random_surds_are_positive_after_the_first(d in 2u64..500, depth in 2usize..30) {
        prop_assume!(!nls_cascade::scalar::is_square(d));
        let e = expand_continued_fraction(&OmegaSpec::sqrt(d).unwrap(), depth).unwrap();
        prop_assert_eq!(e.quotients.len(), depth);
        prop_assert!(e.quotients[1..].iter().all(|a| a.is_positive()));
        prop_assert!(!e.terminated);
    }

    #[test]
    fn rational_expansions_reconstruct_the_value(p in 1i64..10_000, q in 1i64..1000) {
        prop_assume!(p >= q);
        let w = OmegaSpec::rational(p, q).unwrap();
        let c = convergents(&w, 64).unwrap();
        let last = c.last().unwrap();
        prop_assert_eq!(last.ratio(), BigRational::new(big(p), big(q)));
        prop_assert!(last.abs_error_exact.as_ref().unwrap().is_zero());
    }
}
