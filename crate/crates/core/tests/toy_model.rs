mod common;

use nls_cascade::ode::OdeConfig;
use nls_cascade::toy_model::*;
use nls_cascade::{Error, ToyStateF64};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_state(n: usize, seed: u64) -> ToyStateF64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b: Vec<Complex64> = (0..n)
        .map(|_| Complex64::from_polar(rng.gen_range(0.1..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    let norm = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    ToyState::new(b.into_iter().map(|x| x / norm).collect())
}

fn sup_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn cfg() -> OdeConfig {
    OdeConfig::with_tol(1e-12)
}

#[test]
fn single_mode_rotates() {
    let a = c(0.6, -0.3);
    let traj = integrate_toy(&ToyState::new(vec![a]), 7.0, &cfg()).unwrap();
    let exact = a * Complex64::from_polar(1.0, -a.norm_sqr() * 7.0);
    assert!((traj.final_state()[0] - exact).norm() < 1e-10);
}

#[test]
fn zero_state_is_fixed() {
    let traj = integrate_toy(&ToyState::new(vec![c(0.0, 0.0); 4]), 3.0, &cfg()).unwrap();
    assert!(traj.final_state().iter().all(|x| x.norm() == 0.0));
}

#[test]
fn field_is_the_hamiltonian_gradient() {
    // ḃ = −i ∂h/∂b̄ with ∂/∂b̄ = ½(∂/∂x + i ∂/∂y)
    let b = random_state(5, 1).b;
    let mut field = vec![c(0.0, 0.0); 5];
    toy_vector_field(&b, &mut field);
    let h = |v: &[Complex64]| toy_invariants(v).1;
    let eps = 1e-6;
    for k in 0..5 {
        let mut dx = [0.0; 2];
        for (slot, dir) in [c(1.0, 0.0), c(0.0, 1.0)].iter().enumerate() {
            let mut p = b.clone();
            let mut q = b.clone();
            p[k] += dir * eps;
            q[k] -= dir * eps;
            dx[slot] = (h(&p) - h(&q)) / (2.0 * eps);
        }
        let grad_conj = c(dx[0], dx[1]) * 0.5;
        let expected = -c(0.0, 1.0) * grad_conj;
        assert!((field[k] - expected).norm() < 1e-8, "k = {k}");
    }
}

#[test]
fn invariants_are_conserved() {
    for n in [3, 5, 7] {
        let traj = integrate_toy(&random_state(n, n as u64), 100.0, &OdeConfig::with_tol(1e-10)).unwrap();
        assert!(traj.drift.mass <= 1e-8 && traj.drift.energy <= 1e-8, "N = {n}: {:?}", traj.drift);
    }
}

fn rk4(b0: &[Complex64], t: f64, steps: usize) -> Vec<Complex64> {
    let n = b0.len();
    let h = t / steps as f64;
    let mut y = b0.to_vec();
    let f = |y: &[Complex64]| {
        let mut d = vec![c(0.0, 0.0); n];
        toy_vector_field(y, &mut d);
        d
    };
    let axpy = |y: &[Complex64], k: &[Complex64], a: f64| y.iter().zip(k).map(|(y, k)| y + k * a).collect::<Vec<_>>();
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&axpy(&y, &k1, h / 2.0));
        let k3 = f(&axpy(&y, &k2, h / 2.0));
        let k4 = f(&axpy(&y, &k3, h));
        for i in 0..n {
            y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    y
}

#[test]
fn matches_fixed_step_rk4() {
    let b0 = random_state(4, 9);
    let adaptive = integrate_toy(&b0, 5.0, &cfg()).unwrap();
    let reference = rk4(&b0.b, 5.0, 20_000);
    assert!(sup_diff(adaptive.final_state(), &reference) < 1e-8);
    let mid = adaptive.sample(2.5);
    assert!(sup_diff(&mid, &rk4(&b0.b, 2.5, 10_000)) < 1e-7);
}

#[test]
fn lambda_scaling() {
    let b0 = random_state(4, 2);
    let base = integrate_toy(&b0, 10.0, &cfg()).unwrap();
    for lambda in [0.5, 2.0, 10.0] {
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 10.0 * lambda * lambda / 20.0).collect();
        let predicted = scale_solution(&base, lambda, &grid);
        let scaled0 = scale_state(&b0, lambda);
        let direct = integrate_toy(&scaled0, *grid.last().unwrap(), &cfg()).unwrap();
        let err = grid
            .iter()
            .zip(&predicted)
            .map(|(t, p)| sup_diff(&direct.sample(*t), p))
            .fold(0.0, f64::max);
        assert!(err <= 1e-8, "λ = {lambda}: {err}");
    }
}

#[test]
fn time_reversal() {
    let b0 = random_state(5, 4);
    let fwd = integrate_toy(&b0, 6.0, &cfg()).unwrap();
    let back_in: Vec<Complex64> = fwd.final_state().iter().map(|x| x.conj()).collect();
    let back = integrate_toy(&ToyState::new(back_in), 6.0, &cfg()).unwrap();
    let recovered: Vec<Complex64> = back.final_state().iter().map(|x| x.conj()).collect();
    assert!(sup_diff(&recovered, &b0.b) < 1e-9);
}

#[test]
fn spouse_system_reduces_to_toy() {
    let set = common::fixture("n3_seed1.json", 3, 2);
    let sys = SpouseSystem::new(&set).unwrap();
    assert_eq!(sys.n_generations(), 3);
    let b0 = random_state(3, 6);
    let r0 = sys.lift(&b0.b);
    let (traj, drift) = integrate_spouse(&sys, &r0, 50.0, &cfg()).unwrap();
    assert!(drift.mass < 1e-8 && drift.energy < 1e-8);
    let toy = integrate_toy(&b0, 50.0, &cfg()).unwrap();
    let mut field = vec![c(0.0, 0.0); r0.len()];
    sys.field(&r0, &mut field);
    let mut toy_field = vec![c(0.0, 0.0); 3];
    toy_vector_field(&b0.b, &mut toy_field);
    assert!(sup_diff(&field, &sys.lift(&toy_field)) <= 1e-15);
    let mut worst_spread: f64 = 0.0;
    for t in [5.0, 20.0, 50.0] {
        let (mean, spread) = sys.project(&traj.sample(t));
        worst_spread = worst_spread.max(spread);
        if t <= 20.0 {
            let e = sup_diff(&mean, &toy.sample(t));
            assert!(e <= 1e-8, "t = {t}: {e}");
        }
    }
    assert!(worst_spread <= 1e-9, "{worst_spread}");
    let (m, h) = sys.invariants(&r0);
    let (tm, th) = toy_invariants(&b0.b);
    let per_gen = 4.0;
    assert!((m - per_gen * tm).abs() < 1e-12 && (h - per_gen * th).abs() < 1e-12);
}

#[test]
fn spouse_field_is_the_hamiltonian_gradient() {
    let set = common::fixture("n3_seed1.json", 1, 1);
    let sys = SpouseSystem::new(&set).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let r: Vec<Complex64> = (0..sys.modes().len())
        .map(|_| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
        .collect();
    let mut field = vec![c(0.0, 0.0); r.len()];
    spouse_vector_field(&sys, &r, &mut field);
    let eps = 1e-6;
    for k in 0..r.len() {
        let mut d = [0.0; 2];
        for (slot, dir) in [c(1.0, 0.0), c(0.0, 1.0)].iter().enumerate() {
            let mut p = r.clone();
            let mut q = r.clone();
            p[k] += dir * eps;
            q[k] -= dir * eps;
            d[slot] = (sys.invariants(&p).1 - sys.invariants(&q).1) / (2.0 * eps);
        }
        let expected = -c(0.0, 1.0) * c(d[0], d[1]) * 0.5;
        assert!((field[k] - expected).norm() < 1e-8, "mode {k}");
    }
}

#[test]
fn transfer_orbit_moves_mass() {
    let orbit = find_transfer_orbit(
        3,
        1e-2,
        &TransferConfig {
            start: 0,
            target: Some(1),
            ..Default::default()
        },
    )
    .unwrap();
    assert!(orbit.target_concentration >= 0.7);
    assert!(orbit.start_concentration >= 1.0 - 1e-2 - 1e-12);
    assert!(orbit.t0 > 0.5 && orbit.t0 < 5.0);
    let traj = integrate_toy(&orbit.initial_state(), orbit.t0, &cfg()).unwrap();
    assert!(traj.final_state()[1].norm_sqr() >= 0.7 - 1e-6);
}

#[test]
fn transfer_degenerate_and_invalid() {
    let same = find_transfer_orbit(
        4,
        1e-2,
        &TransferConfig {
            start: 2,
            target: Some(2),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(same.t0, 0.0);
    assert!(matches!(
        find_transfer_orbit(4, 1.5, &TransferConfig::default()),
        Err(Error::InvalidInput(_))
    ));
    let backwards = TransferConfig {
        start: 2,
        target: Some(1),
        ..Default::default()
    };
    assert!(matches!(find_transfer_orbit(4, 1e-2, &backwards), Err(Error::InvalidInput(_))));
}

#[test]
fn csv_has_one_row_per_sample() {
    let traj = integrate_toy(&random_state(3, 1), 1.0, &cfg()).unwrap();
    let mut buf = Vec::new();
    write_toy_csv(&mut buf, &traj, 1).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), traj.trajectory.t.len() + 1);
    assert!(text.starts_with("t,"));
}
