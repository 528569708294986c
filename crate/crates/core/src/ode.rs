//! Adaptive Dormand–Prince 5(4) integration of complex-valued systems,
//! with cubic Hermite dense output between accepted steps.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OdeConfig {
    pub atol: f64,
    pub rtol: f64,
    /// Initial step; chosen automatically when absent.
    pub h0: Option<f64>,
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        OdeConfig {
            atol: 1e-10,
            rtol: 1e-10,
            h0: None,
            max_step: None,
            max_steps: 5_000_000,
        }
    }
}

impl OdeConfig {
    pub fn with_tol(tol: f64) -> Self {
        OdeConfig {
            atol: tol,
            rtol: tol,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// An accepted step, with enough data for Hermite interpolation inside it.
pub struct StepView<'a, T: Real> {
    pub t0: T,
    pub t1: T,
    pub y0: &'a [Complex<T>],
    pub y1: &'a [Complex<T>],
    pub f0: &'a [Complex<T>],
    pub f1: &'a [Complex<T>],
}

impl<T: Real> StepView<'_, T> {
    pub fn interpolate(&self, t: T) -> Vec<Complex<T>> {
        hermite(self.t0, self.t1, self.y0, self.y1, self.f0, self.f1, t)
    }
}

fn hermite<T: Real>(t0: T, t1: T, y0: &[Complex<T>], y1: &[Complex<T>], f0: &[Complex<T>], f1: &[Complex<T>], t: T) -> Vec<Complex<T>> {
    let h = t1 - t0;
    if h == T::zero() {
        return y1.to_vec();
    }
    let s = (t - t0) / h;
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let h00 = (one + two * s) * (one - s) * (one - s);
    let h10 = s * (one - s) * (one - s);
    let h01 = s * s * (three - two * s);
    let h11 = s * s * (s - one);
    (0..y0.len())
        .map(|i| y0[i] * h00 + f0[i] * (h10 * h) + y1[i] * h01 + f1[i] * (h11 * h))
        .collect()
}

/// A dense trajectory: every accepted step with its derivative.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub t: Vec<T>,
    pub y: Vec<Vec<Complex<T>>>,
    pub f: Vec<Vec<Complex<T>>>,
    pub stats: OdeStats,
}

impl<T: Real> Trajectory<T> {
    pub fn final_state(&self) -> &[Complex<T>] {
        self.y.last().expect("trajectory holds the initial state")
    }

    /// Hermite interpolant at `t`, clamped to the integrated range.
    pub fn sample(&self, t: T) -> Vec<Complex<T>> {
        let n = self.t.len();
        if n == 1 {
            return self.y[0].clone();
        }
        let forward = self.t[n - 1] >= self.t[0];
        let key = |x: T| if forward { x } else { -x };
        let tk = key(t);
        let i = self.t.partition_point(|&s| key(s) <= tk).clamp(1, n - 1);
        hermite(self.t[i - 1], self.t[i], &self.y[i - 1], &self.y[i], &self.f[i - 1], &self.f[i], t)
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction), calling
/// `observer` after every accepted step. The observer may stop the run
/// early by returning `false`. Returns the final time and state.
pub fn integrate_with<T, F, O>(
    mut f: F,
    t0: T,
    y0: &[Complex<T>],
    t1: T,
    cfg: &OdeConfig,
    mut observer: O,
) -> Result<(T, Vec<Complex<T>>, OdeStats)>
where
    T: Real,
    F: FnMut(T, &[Complex<T>], &mut [Complex<T>]),
    O: FnMut(&StepView<'_, T>) -> bool,
{
    let n = y0.len();
    let dir = if t1 >= t0 { T::one() } else { -T::one() };
    let span = (t1 - t0).abs();
    let atol = T::lit(cfg.atol);
    let rtol = T::lit(cfg.rtol);
    let hmax = cfg.max_step.map_or(span, T::lit).min(span);
    let mut stats = OdeStats::default();
    let mut t = t0;
    let mut y = y0.to_vec();
    let zero = Complex::new(T::zero(), T::zero());
    let mut k: Vec<Vec<Complex<T>>> = vec![vec![zero; n]; 7];
    f(t, &y, &mut k[0]);
    stats.evaluations += 1;
    if span == T::zero() {
        return Ok((t, y, stats));
    }
    let mut h = match cfg.h0 {
        Some(h) => T::lit(h),
        None => initial_step(&mut f, t, &y, &k[0], dir, atol, rtol, &mut stats),
    }
    .min(hmax);
    let mut ytmp = vec![zero; n];
    let mut ynew = vec![zero; n];
    let tiny = T::epsilon() * T::lit(16.0);
    while (t1 - t) * dir > T::zero() {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::ToleranceUnmet(format!(
                "step limit {} reached at t = {:?}",
                cfg.max_steps, t
            )));
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h <= tiny * t.abs().max(T::one()) {
            return Err(Error::StepUnderflow {
                t: t.to_f64().unwrap_or(f64::NAN),
            });
        }
        let hs = h * dir;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (r, a) in A[s].iter().enumerate().take(s) {
                    if *a != 0.0 {
                        acc = acc + k[r][i] * (hs * T::lit(*a));
                    }
                }
                ytmp[i] = acc;
            }
            f(t + hs * T::lit(C[s]), &ytmp, &mut k[s]);
            stats.evaluations += 1;
            if s == 6 {
                ynew.copy_from_slice(&ytmp);
            }
        }
        let mut err = T::zero();
        for i in 0..n {
            let mut e = zero;
            for (r, c) in E.iter().enumerate() {
                if *c != 0.0 {
                    e = e + k[r][i] * T::lit(*c);
                }
            }
            let sc = atol + rtol * y[i].norm().max(ynew[i].norm());
            let ratio = (e * hs).norm() / sc;
            err = err + ratio * ratio;
        }
        let err = (err / T::lit(n.max(1) as f64)).sqrt();
        if !err.is_finite() {
            stats.rejected += 1;
            h = h * T::lit(0.2);
            continue;
        }
        if err <= T::one() {
            let t_new = if last { t1 } else { t + hs };
            let keep_going = observer(&StepView {
                t0: t,
                t1: t_new,
                y0: &y,
                y1: &ynew,
                f0: &k[0],
                f1: &k[6],
            });
            stats.accepted += 1;
            t = t_new;
            std::mem::swap(&mut y, &mut ynew);
            k.swap(0, 6);
            if !keep_going {
                break;
            }
            let fac = if err == T::zero() {
                T::lit(5.0)
            } else {
                (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0)).max(T::lit(0.2))
            };
            h = (h * fac).min(hmax);
        } else {
            stats.rejected += 1;
            let fac = (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2));
            h = h * fac;
        }
    }
    Ok((t, y, stats))
}

#[allow(clippy::too_many_arguments)]
fn initial_step<T: Real, F: FnMut(T, &[Complex<T>], &mut [Complex<T>])>(
    f: &mut F,
    t: T,
    y: &[Complex<T>],
    f0: &[Complex<T>],
    dir: T,
    atol: T,
    rtol: T,
    stats: &mut OdeStats,
) -> T {
    let n = y.len().max(1);
    let rms = |v: &dyn Fn(usize) -> T| {
        let s: T = (0..y.len()).map(|i| v(i) * v(i)).sum();
        (s / T::lit(n as f64)).sqrt()
    };
    let sc = |i: usize| atol + rtol * y[i].norm();
    let d0 = rms(&|i| y[i].norm() / sc(i));
    let d1 = rms(&|i| f0[i].norm() / sc(i));
    let h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
        T::lit(1e-6)
    } else {
        T::lit(0.01) * d0 / d1
    };
    let y1: Vec<Complex<T>> = (0..y.len()).map(|i| y[i] + f0[i] * (h0 * dir)).collect();
    let mut f1 = vec![Complex::new(T::zero(), T::zero()); y.len()];
    f(t + h0 * dir, &y1, &mut f1);
    stats.evaluations += 1;
    let d2 = rms(&|i| (f1[i] - f0[i]).norm() / sc(i)) / h0;
    let h1 = if d1.max(d2) <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / d1.max(d2)).powf(T::lit(0.2))
    };
    (T::lit(100.0) * h0).min(h1)
}

/// Integrates and keeps every accepted step.
pub fn integrate<T, F>(f: F, t0: T, y0: &[Complex<T>], t1: T, cfg: &OdeConfig) -> Result<Trajectory<T>>
where
    T: Real,
    F: FnMut(T, &[Complex<T>], &mut [Complex<T>]),
{
    let mut traj = Trajectory {
        t: vec![t0],
        y: vec![y0.to_vec()],
        f: Vec::new(),
        stats: OdeStats::default(),
    };
    let mut first_f: Option<Vec<Complex<T>>> = None;
    let (_, _, stats) = integrate_with(f, t0, y0, t1, cfg, |s| {
        if first_f.is_none() {
            first_f = Some(s.f0.to_vec());
        }
        traj.t.push(s.t1);
        traj.y.push(s.y1.to_vec());
        traj.f.push(s.f1.to_vec());
        true
    })?;
    let f0 = first_f.unwrap_or_else(|| vec![Complex::new(T::zero(), T::zero()); y0.len()]);
    traj.f.insert(0, f0);
    traj.stats = stats;
    Ok(traj)
}

/// Integrates through the given increasing (or decreasing) output times,
/// landing on each exactly, and returns the states there.
pub fn integrate_to_times<T, F>(
    mut f: F,
    t0: T,
    y0: &[Complex<T>],
    times: &[T],
    cfg: &OdeConfig,
) -> Result<(Vec<Vec<Complex<T>>>, OdeStats)>
where
    T: Real,
    F: FnMut(T, &[Complex<T>], &mut [Complex<T>]),
{
    let mut out = Vec::with_capacity(times.len());
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut total = OdeStats::default();
    for &target in times {
        let (tt, yy, st) = integrate_with(&mut f, t, &y, target, cfg, |_| true)?;
        t = tt;
        y = yy;
        total.accepted += st.accepted;
        total.rejected += st.rejected;
        total.evaluations += st.evaluations;
        out.push(y.clone());
    }
    Ok((out, total))
}
