mod common;

use nls_cascade::diophantine::OmegaSpec;
use nls_cascade::lambda_set::{scale_set, BaseSet};
use nls_cascade::nls_sim::{Frame, SparseFourierState};
use nls_cascade::normal_form::*;
use nls_cascade::ode::OdeConfig;
use nls_cascade::resonance::{enumerate_a1, Mode};
use nls_cascade::scalar::{rat, Scalar};
use nls_cascade::{Error, GeneratingFunctionExact, GeneratingFunctionF64, LambdaSet};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sets() -> Vec<(&'static str, LambdaSet)> {
    vec![
        ("unit square", scale_set(&BaseSet::unit_square(), 1, 1).unwrap()),
        ("unit square (3,2)", scale_set(&BaseSet::unit_square(), 3, 2).unwrap()),
        ("n3 (3,2)", common::fixture("n3_seed1.json", 3, 2)),
    ]
}

fn flow_cfg() -> OdeConfig {
    OdeConfig {
        atol: 1e-15,
        rtol: 1e-13,
        ..Default::default()
    }
}

/// Random amplitudes on `modes` with total ℓ¹ norm `l1`.
fn random_beta(modes: usize, l1: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<Complex64> = (0..modes)
        .map(|_| Complex64::from_polar(rng.gen_range(0.1..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    let norm: f64 = raw.iter().map(|x| x.norm()).sum();
    raw.into_iter().map(|x| x * (l1 / norm)).collect()
}

#[test]
fn exact_residual_vanishes_for_rational_omega() {
    for omega in [OmegaSpec::rational(7, 5).unwrap(), OmegaSpec::rational(17, 12).unwrap()] {
        for (name, set) in sets() {
            let f = build_f::<BigRational>(&set, &omega, Normalization::Field).unwrap();
            let res = homological_residual(&f, &set, &omega).unwrap();
            assert!(res.exact);
            assert_eq!((res.nonzero, res.max_abs), (0, 0.0), "{name} ω = {omega}");
        }
    }
}

#[test]
fn exact_residual_vanishes_for_sqrt2() {
    let omega = OmegaSpec::sqrt(2).unwrap();
    for (name, set) in sets() {
        let f: GeneratingFunctionExact = build_f(&set, &omega, Normalization::Display).unwrap();
        assert_eq!(homological_residual(&f, &set, &omega).unwrap().nonzero, 0, "{name}");
        assert!(coefficient_defects(&f).iter().all(|(_, d)| d.re.is_zero() && d.im.is_zero()));
    }
}

#[test]
fn float_residual_is_small() {
    let omega = OmegaSpec::sqrt(2).unwrap();
    for (name, set) in sets() {
        for norm in [Normalization::Field, Normalization::Display] {
            let f: GeneratingFunctionF64 = build_f(&set, &omega, norm).unwrap();
            let res = homological_residual(&f, &set, &omega).unwrap();
            assert!(!res.exact);
            assert!(res.max_abs <= 1e-13, "{name}: {}", res.max_abs);
        }
    }
}

#[test]
fn normalizations_differ_by_a_factor_two() {
    let set = common::fixture("n3_seed1.json", 1, 1);
    let omega = OmegaSpec::rational(7, 5).unwrap();
    let field = build_f::<BigRational>(&set, &omega, Normalization::Field).unwrap();
    let display = build_f::<BigRational>(&set, &omega, Normalization::Display).unwrap();
    assert_eq!(field.len(), enumerate_a1(&set).len());
    for (a, b) in field.terms.iter().zip(&display.terms) {
        assert_eq!(a.quartet, b.quartet);
        assert_eq!(a.coefficient.im.clone(), b.coefficient.im.clone() * rat(2, 1));
        assert!(a.coefficient.re.is_zero());
    }
}

#[test]
fn residual_is_linear_in_the_perturbation() {
    // F solves the equation for 𝓗⁽⁴,¹⁾; 2F leaves exactly −𝓗⁽⁴,¹⁾ behind
    let set = scale_set(&BaseSet::unit_square(), 1, 1).unwrap();
    let omega = OmegaSpec::rational(7, 5).unwrap();
    let mut f = build_f::<BigRational>(&set, &omega, Normalization::Field).unwrap();
    for t in &mut f.terms {
        t.coefficient = t.coefficient.clone() * rat(2, 1);
    }
    let res = homological_residual(&f, &set, &omega).unwrap();
    assert!(res.nonzero > 0);
    let h41 = quartic_hamiltonian::<BigRational>(&enumerate_a1(&set), Normalization::Field);
    assert_eq!(res.nonzero, h41.len());
    assert!((res.max_abs - h41.max_abs()).abs() < 1e-15);
}

#[test]
fn engineered_resonance_is_rejected() {
    let set = common::fixture("n3_seed1.json", 3, 2);
    let a1 = enumerate_a1(&set);
    let q = a1
        .iter()
        .find(|q| {
            let (sj, sk) = q.alternating_sums();
            sj != 0 && sk != 0 && sj.signum() != sk.signum()
        })
        .expect("a quartet with a positive root");
    let (sj, sk) = q.alternating_sums();
    let r2 = BigRational::new((-sj).into(), sk.into());
    match build_f_from::<BigRational>(&a1, &r2, Normalization::Field) {
        Err(Error::ResonantA1(w)) => assert_eq!(omega_at(&w, &r2), BigRational::zero()),
        other => panic!("expected a resonance, got {other:?}"),
    }
}

fn omega_at(q: &nls_cascade::Quartet, r2: &BigRational) -> BigRational {
    nls_cascade::resonance::omega_r(q, r2)
}

#[test]
fn surd_and_float_coefficients_agree() {
    let set = common::fixture("n3_seed1.json", 3, 2);
    let omega = OmegaSpec::sqrt(2).unwrap();
    let exact: GeneratingFunctionExact = build_f(&set, &omega, Normalization::Field).unwrap();
    let float: GeneratingFunctionF64 = build_f(&set, &omega, Normalization::Field).unwrap();
    for (a, b) in exact.terms.iter().zip(&float.terms) {
        let ce = a.coefficient.im.to_f64();
        assert!((ce - b.coefficient.im).abs() <= 1e-15 * ce.abs().max(1.0));
    }
}

fn map_for(set: &LambdaSet, eta: f64) -> BirkhoffMapF64 {
    let f: GeneratingFunctionF64 = build_f(set, &OmegaSpec::sqrt(2).unwrap(), Normalization::Field).unwrap();
    BirkhoffMap::new(&f, Direction::Forward, flow_cfg(), eta)
}

use nls_cascade::BirkhoffMapF64;

#[test]
fn forward_then_inverse_is_identity() {
    let set = common::fixture("n3_seed1.json", 3, 2);
    let map = map_for(&set, 0.5);
    let beta = random_beta(map.support().len(), 0.4, 3);
    let there = map.flow(&beta, 0.0).unwrap();
    let back = map.inverse().flow(&there, 0.0).unwrap();
    let err: f64 = beta.iter().zip(&back).map(|(a, b)| (a - b).norm()).sum();
    assert!(err < 1e-13, "{err}");
    let moved: f64 = beta.iter().zip(&there).map(|(a, b)| (a - b).norm()).sum();
    assert!(moved > 1e-9, "{moved}");
}

#[test]
fn flow_conserves_mass_momentum_and_f() {
    let set = common::fixture("n3_seed1.json", 3, 2);
    let map = map_for(&set, 0.5);
    let support = map.support().to_vec();
    let beta = random_beta(support.len(), 0.4, 5);
    let out = map.flow(&beta, 0.0).unwrap();
    let mass = |v: &[Complex64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>();
    let momentum = |v: &[Complex64]| {
        v.iter().zip(&support).fold((0.0, 0.0), |(a, b), (x, m)| {
            (a + x.norm_sqr() * m.j as f64, b + x.norm_sqr() * m.k as f64)
        })
    };
    assert!((mass(&beta) - mass(&out)).abs() < 1e-13);
    let (p0, p1) = (momentum(&beta), momentum(&out));
    assert!((p0.0 - p1.0).abs() < 1e-12 && (p0.1 - p1.1).abs() < 1e-12);
    assert!((map.f_value(&beta) - map.f_value(&out)).abs() < 1e-13);
}

#[test]
fn gamma_leaves_other_modes_alone() {
    let set = scale_set(&BaseSet::unit_square(), 1, 1).unwrap();
    let map = map_for(&set, 0.2);
    let far = Mode::new(40, -33);
    assert!(!map.support().contains(&far));
    let omega = OmegaSpec::sqrt(2).unwrap();
    let mut pairs: Vec<(Mode, Complex64)> = map
        .support()
        .iter()
        .zip(random_beta(map.support().len(), 0.1, 9))
        .map(|(m, x)| (*m, x))
        .collect();
    pairs.push((far, Complex64::new(0.03, -0.04)));
    let state = SparseFourierState::from_pairs(omega, Frame::Gauged, pairs);
    let out = gamma_apply(&map, &state).unwrap();
    assert_eq!(out.get(&far), Complex64::new(0.03, -0.04));
    assert_eq!(out.frame, Frame::Gauged);
    let physical = SparseFourierState {
        frame: Frame::Physical,
        ..state.clone()
    };
    assert!(matches!(gamma_apply(&map, &physical), Err(Error::InvalidInput(_))));
}

#[test]
fn inputs_outside_the_ball_are_rejected() {
    let set = scale_set(&BaseSet::unit_square(), 1, 1).unwrap();
    let map = map_for(&set, 0.1);
    let beta = random_beta(map.support().len(), 0.2, 1);
    assert!(matches!(map.flow(&beta, 0.0), Err(Error::BallEscape { .. })));
    let small = random_beta(map.support().len(), 0.05, 1);
    assert!(matches!(map.flow(&small, 0.06), Err(Error::BallEscape { .. })));
}

#[test]
fn displacement_is_cubic() {
    let set = common::fixture("n3_seed1.json", 3, 2);
    let map = map_for(&set, 1.0);
    let dir = random_beta(map.support().len(), 1.0, 11);
    let eta = 0.2;
    let pts: Vec<(f64, f64)> = [16.0, 8.0, 4.0, 2.0]
        .iter()
        .map(|d| {
            let e = eta / d;
            let beta: Vec<Complex64> = dir.iter().map(|x| x * e).collect();
            let out = map.flow(&beta, 0.0).unwrap();
            (e.ln(), beta.iter().zip(&out).map(|(a, b)| (a - b).norm()).sum::<f64>().ln())
        })
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (sxx, sxy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x * x, b + x * y));
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    assert!((slope - 3.0).abs() < 0.2, "slope {slope}");
}

#[test]
fn l1_hypothesis_on_convergents() {
    let omega = OmegaSpec::sqrt(2).unwrap();
    let base = common::fixture("n3_seed1.json", 1, 1).base().clone();
    let holds = |p, q| check_l1_hypothesis(&scale_set(&base, p, q).unwrap(), &omega).unwrap().holds;
    assert!(holds(41, 29));
    assert!(!holds(3, 2));
    let h = require_l1_hypothesis(&scale_set(&base, 41, 29).unwrap(), &omega).unwrap();
    assert!(h.value <= 0.25);
    assert!(matches!(
        require_l1_hypothesis(&scale_set(&base, 3, 2).unwrap(), &omega),
        Err(Error::HypothesisViolated(_))
    ));
    assert!((default_eta(4.0) - 0.2).abs() < 1e-15);
}
