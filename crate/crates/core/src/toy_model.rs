//! The N-generation toy model
//! ḃᵢ = −i bᵢ²b̄ᵢ + 2i b̄ᵢ (b²ᵢ₋₁ + b²ᵢ₊₁),
//! the family system on V_Λ that it reduces, the λ-scaling, and a
//! stagewise shooting search for mass-transfer orbits.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambda_set::LambdaSet;
use crate::ode::{integrate, integrate_to_times, OdeConfig, OdeStats, Trajectory};
use crate::resonance::Mode;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct ToyState<T: Real> {
    pub b: Vec<Complex<T>>,
    pub time: T,
}

impl<T: Real> ToyState<T> {
    pub fn new(b: Vec<Complex<T>>) -> Self {
        ToyState { b, time: T::zero() }
    }

    /// All mass on generation `i` (zero-based).
    pub fn pure(n: usize, i: usize) -> Self {
        let mut b = vec![Complex::new(T::zero(), T::zero()); n];
        b[i] = Complex::new(T::one(), T::zero());
        Self::new(b)
    }
}

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// The toy field; `out` is overwritten.
pub fn toy_vector_field<T: Real>(b: &[Complex<T>], out: &mut [Complex<T>]) {
    let i = Complex::new(T::zero(), T::one());
    let two = T::lit(2.0);
    let n = b.len();
    for k in 0..n {
        let left = if k > 0 { b[k - 1] * b[k - 1] } else { zero() };
        let right = if k + 1 < n { b[k + 1] * b[k + 1] } else { zero() };
        out[k] = -i * b[k] * b[k] * b[k].conj() + i * b[k].conj() * (left + right) * two;
    }
}

/// Mass Σ|bᵢ|² and energy h = ½Σ|bᵢ|⁴ − Σ(b̄ᵢ²bᵢ₊₁² + bᵢ²b̄ᵢ₊₁²).
pub fn toy_invariants<T: Real>(b: &[Complex<T>]) -> (T, T) {
    let mass: T = b.iter().map(|x| x.norm_sqr()).sum();
    let mut h: T = b.iter().map(|x| x.norm_sqr() * x.norm_sqr()).sum::<T>() * T::lit(0.5);
    for w in b.windows(2) {
        let c = w[0].conj() * w[0].conj() * w[1] * w[1];
        h = h - c.re * T::lit(2.0);
    }
    (mass, h)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Drift {
    pub mass: f64,
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct ToyTrajectory<T: Real> {
    pub trajectory: Trajectory<T>,
    /// Largest deviation of mass and energy from their initial values
    /// over the accepted steps.
    pub drift: Drift,
}

impl<T: Real> ToyTrajectory<T> {
    pub fn sample(&self, t: T) -> Vec<Complex<T>> {
        self.trajectory.sample(t)
    }

    pub fn final_state(&self) -> &[Complex<T>] {
        self.trajectory.final_state()
    }

    pub fn end_time(&self) -> T {
        *self.trajectory.t.last().expect("nonempty")
    }

    pub fn stats(&self) -> OdeStats {
        self.trajectory.stats
    }
}

fn drift_of<T: Real>(traj: &Trajectory<T>, inv: impl Fn(&[Complex<T>]) -> (T, T)) -> Drift {
    let (m0, h0) = inv(&traj.y[0]);
    traj.y.iter().fold(Drift::default(), |d, y| {
        let (m, h) = inv(y);
        Drift {
            mass: d.mass.max((m - m0).abs().to_f64().unwrap_or(f64::NAN)),
            energy: d.energy.max((h - h0).abs().to_f64().unwrap_or(f64::NAN)),
        }
    })
}

pub fn integrate_toy<T: Real>(b0: &ToyState<T>, t_end: T, cfg: &OdeConfig) -> Result<ToyTrajectory<T>> {
    if t_end < b0.time {
        return Err(Error::InvalidInput("t_end precedes the initial time".into()));
    }
    let traj = integrate(
        |_, y: &[Complex<T>], d: &mut [Complex<T>]| toy_vector_field(y, d),
        b0.time,
        &b0.b,
        t_end,
        cfg,
    )?;
    let drift = drift_of(&traj, toy_invariants);
    Ok(ToyTrajectory { trajectory: traj, drift })
}

/// b^λ(t) = λ⁻¹ b(λ⁻² t) sampled on `grid`.
pub fn scale_solution<T: Real>(traj: &ToyTrajectory<T>, lambda: T, grid: &[T]) -> Vec<Vec<Complex<T>>> {
    grid.iter()
        .map(|&t| traj.sample(t / (lambda * lambda)).into_iter().map(|x| x / lambda).collect())
        .collect()
}

/// Toy data b^λ(0) = λ⁻¹ b(0).
pub fn scale_state<T: Real>(b: &ToyState<T>, lambda: T) -> ToyState<T> {
    ToyState {
        b: b.b.iter().map(|x| *x / lambda).collect(),
        time: b.time * lambda * lambda,
    }
}

/// Trajectory CSV: t, re/im per generation, mass, energy; every
/// `stride`-th accepted step plus the last one.
pub fn write_toy_csv<T: Real, W: Write>(out: W, traj: &ToyTrajectory<T>, stride: usize) -> Result<()> {
    let n = traj.trajectory.y[0].len();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    for i in 1..=n {
        header.push(format!("re_b{i}"));
        header.push(format!("im_b{i}"));
    }
    header.push("mass".into());
    header.push("energy".into());
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    w.write_record(&header).map_err(io)?;
    let last = traj.trajectory.t.len() - 1;
    for (k, (t, y)) in traj.trajectory.t.iter().zip(&traj.trajectory.y).enumerate() {
        if k % stride.max(1) != 0 && k != last {
            continue;
        }
        let (m, h) = toy_invariants(y);
        let mut row = vec![format!("{t:.17e}")];
        for x in y {
            row.push(format!("{:.17e}", x.re));
            row.push(format!("{:.17e}", x.im));
        }
        row.push(format!("{m:.17e}"));
        row.push(format!("{h:.17e}"));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(())
}

/// The family system on V_Λ with index-resolved relations.
#[derive(Clone, Debug)]
pub struct SpouseSystem {
    modes: Vec<Mode>,
    index: HashMap<Mode, usize>,
    generation: Vec<usize>,
    /// (spouse, child₁, child₂) for modes below the last generation.
    down: Vec<Option<(usize, usize, usize)>>,
    /// (sibling, parent₁, parent₂) for modes above the first generation.
    up: Vec<Option<(usize, usize, usize)>>,
}

impl SpouseSystem {
    pub fn new(set: &LambdaSet) -> Result<Self> {
        let modes = set.modes();
        let index: HashMap<Mode, usize> = modes.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let rel = set.relations();
        let n = set.n_generations();
        let missing = |what: &str, m: &Mode| Error::RelationsMissing(format!("{what} of {m:?}"));
        let mut down = Vec::with_capacity(modes.len());
        let mut up = Vec::with_capacity(modes.len());
        let mut generation = Vec::with_capacity(modes.len());
        for m in &modes {
            let g = set.generation_of(m).expect("member");
            generation.push(g);
            if g + 1 < n {
                let s = rel.spouse.get(m).ok_or_else(|| missing("spouse", m))?;
                let [c1, c2] = rel.children.get(m).ok_or_else(|| missing("children", m))?;
                down.push(Some((index[s], index[c1], index[c2])));
            } else {
                down.push(None);
            }
            if g > 0 {
                let s = rel.sibling.get(m).ok_or_else(|| missing("sibling", m))?;
                let [p1, p2] = rel.parents.get(m).ok_or_else(|| missing("parents", m))?;
                up.push(Some((index[s], index[p1], index[p2])));
            } else {
                up.push(None);
            }
        }
        Ok(SpouseSystem {
            modes,
            index,
            generation,
            down,
            up,
        })
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn index_of(&self, m: &Mode) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn generation(&self) -> &[usize] {
        &self.generation
    }

    pub fn n_generations(&self) -> usize {
        self.generation.iter().max().map_or(0, |g| g + 1)
    }

    /// ṙ from −iṙₙ = −rₙ|rₙ|² + 2 r_{c₁} r_{c₂} r̄_{spouse} + 2 r_{p₁} r_{p₂} r̄_{sibling}.
    pub fn field<T: Real>(&self, r: &[Complex<T>], out: &mut [Complex<T>]) {
        let i = Complex::new(T::zero(), T::one());
        let two = T::lit(2.0);
        for n in 0..r.len() {
            let mut rhs = -r[n] * r[n].norm_sqr();
            if let Some((s, c1, c2)) = self.down[n] {
                rhs = rhs + r[c1] * r[c2] * r[s].conj() * two;
            }
            if let Some((s, p1, p2)) = self.up[n] {
                rhs = rhs + r[p1] * r[p2] * r[s].conj() * two;
            }
            out[n] = i * rhs;
        }
    }

    /// Copies toy values onto every mode of the matching generation.
    pub fn lift<T: Real>(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        self.generation.iter().map(|g| b[*g]).collect()
    }

    /// Generation means and the largest within-generation deviation.
    pub fn project<T: Real>(&self, r: &[Complex<T>]) -> (Vec<Complex<T>>, T) {
        let g = self.n_generations();
        let mut sum = vec![zero::<T>(); g];
        let mut count = vec![0usize; g];
        for (x, gi) in r.iter().zip(&self.generation) {
            sum[*gi] = sum[*gi] + *x;
            count[*gi] += 1;
        }
        let mean: Vec<Complex<T>> = sum.iter().zip(&count).map(|(s, c)| *s / T::lit(*c as f64)).collect();
        let spread = r
            .iter()
            .zip(&self.generation)
            .map(|(x, gi)| (*x - mean[*gi]).norm())
            .fold(T::zero(), T::max);
        (mean, spread)
    }

    /// Mass Σ|rₙ|² and the Hamiltonian ½Σ|rₙ|⁴ − Σ_families 2·Re(r̄_a r̄_c r_b r_d)·2.
    pub fn invariants<T: Real>(&self, r: &[Complex<T>]) -> (T, T) {
        let mass: T = r.iter().map(|x| x.norm_sqr()).sum();
        let mut h: T = r.iter().map(|x| x.norm_sqr() * x.norm_sqr()).sum::<T>() * T::lit(0.5);
        for (a, d) in self.down.iter().enumerate() {
            if let Some((s, c1, c2)) = d {
                if a < *s {
                    let v = r[a].conj() * r[*s].conj() * r[*c1] * r[*c2];
                    h = h - v.re * T::lit(4.0);
                }
            }
        }
        (mass, h)
    }
}

pub fn spouse_vector_field<T: Real>(system: &SpouseSystem, r: &[Complex<T>], out: &mut [Complex<T>]) {
    system.field(r, out)
}

pub fn integrate_spouse<T: Real>(system: &SpouseSystem, r0: &[Complex<T>], t_end: T, cfg: &OdeConfig) -> Result<(Trajectory<T>, Drift)> {
    if t_end < T::zero() {
        return Err(Error::InvalidInput("t_end must be nonnegative".into()));
    }
    let traj = integrate(
        |_, y: &[Complex<T>], d: &mut [Complex<T>]| system.field(y, d),
        T::zero(),
        r0,
        t_end,
        cfg,
    )?;
    let drift = drift_of(&traj, |y| system.invariants(y));
    Ok((traj, drift))
}

/// Parameters of the stagewise shooting search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransferConfig {
    /// Zero-based start generation; defaults to the second generation.
    pub start: usize,
    /// Zero-based target generation; defaults to N − 2.
    pub target: Option<usize>,
    /// Required |b_target|² at the transfer time.
    pub threshold: f64,
    /// Phase samples per stage.
    pub phases: usize,
    /// Seed amplitudes tried per stage, as log₁₀ offsets below √δ.
    pub amplitude_decades: Vec<f64>,
    /// Time horizon per handoff.
    pub stage_time: f64,
    pub tol: f64,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig {
            start: 1,
            target: None,
            threshold: 0.7,
            phases: 48,
            amplitude_decades: vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0],
            stage_time: 12.0,
            tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferOrbit {
    pub n: usize,
    pub delta: f64,
    pub start: usize,
    pub target: usize,
    pub b0: Vec<[f64; 2]>,
    /// First time |b_target|² reaches the threshold.
    pub t0: f64,
    pub start_concentration: f64,
    pub target_concentration: f64,
    /// Per-generation peak of |bᵢ|² over [0, T₀].
    pub peaks: Vec<f64>,
    pub evaluations: usize,
}

impl TransferOrbit {
    pub fn initial_state(&self) -> ToyState<f64> {
        ToyState::new(self.b0.iter().map(|[re, im]| Complex::new(*re, *im)).collect())
    }
}

/// Seeds on generations above `start`, as (amplitude, phase).
fn seeded_state(n: usize, start: usize, seeds: &[(f64, f64)]) -> Vec<Complex<f64>> {
    let mut b = vec![Complex::new(0.0, 0.0); n];
    let rest: f64 = seeds.iter().map(|(a, _)| a * a).sum();
    b[start] = Complex::new((1.0 - rest).max(0.0).sqrt(), 0.0);
    for (k, (a, ph)) in seeds.iter().enumerate() {
        b[start + 1 + k] = Complex::from_polar(*a, *ph);
    }
    b
}

struct Probe {
    /// First time |b_g|² ≥ level, if reached.
    hit: Option<f64>,
    /// Peak |b_g|² over the horizon.
    peak: f64,
}

fn probe(b0: &[Complex<f64>], g: usize, level: f64, horizon: f64, tol: f64) -> Result<Probe> {
    let samples = 400;
    let times: Vec<f64> = (1..=samples).map(|k| horizon * k as f64 / samples as f64).collect();
    let (states, _) = integrate_to_times(
        |_, y: &[Complex<f64>], d: &mut [Complex<f64>]| toy_vector_field(y, d),
        0.0,
        b0,
        &times,
        &OdeConfig::with_tol(tol),
    )?;
    let mut peak: f64 = 0.0;
    let mut hit = None;
    for (t, y) in times.iter().zip(&states) {
        let c = y[g].norm_sqr();
        if hit.is_none() && c >= level {
            hit = Some(*t);
        }
        peak = peak.max(c);
    }
    Ok(Probe { hit, peak })
}

/// Searches for initial data concentrated on `start` whose orbit carries
/// at least `threshold` of the mass to `target`.
///
/// Lower generations are left empty, which is invariant. Each stage adds a
/// seed on the next generation and picks its amplitude and phase so that
/// the orbit reaches that generation earliest with the largest peak; the
/// previous seeds are kept fixed.
pub fn find_transfer_orbit(n: usize, delta: f64, cfg: &TransferConfig) -> Result<TransferOrbit> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!("delta = {delta} outside (0, 1)")));
    }
    let target = cfg.target.unwrap_or(n.saturating_sub(2));
    if target >= n || cfg.start >= n || target < cfg.start {
        return Err(Error::InvalidInput(format!(
            "generations start {} / target {target} invalid for N = {n}",
            cfg.start
        )));
    }
    let mut evaluations = 0usize;
    if target == cfg.start {
        let b0 = seeded_state(n, cfg.start, &[]);
        return Ok(TransferOrbit {
            n,
            delta,
            start: cfg.start,
            target,
            b0: b0.iter().map(|x| [x.re, x.im]).collect(),
            t0: 0.0,
            start_concentration: 1.0,
            target_concentration: 1.0,
            peaks: b0.iter().map(|x| x.norm_sqr()).collect(),
            evaluations,
        });
    }
    let mut seeds: Vec<(f64, f64)> = Vec::new();
    let base_amp = delta.sqrt();
    let handoffs = target - cfg.start;
    for stage in 1..=handoffs {
        let g = cfg.start + stage;
        let level = if stage == handoffs { cfg.threshold } else { 0.5 };
        let horizon = cfg.stage_time * stage as f64;
        let budget_left = |s: &[(f64, f64)]| delta - s.iter().map(|(a, _)| a * a).sum::<f64>();
        let smallest = base_amp * 10f64.powf(-cfg.amplitude_decades.iter().copied().fold(0.0, f64::max));
        let reserve = (handoffs - stage) as f64 * smallest * smallest;
        let candidates: Vec<(f64, f64)> = cfg
            .amplitude_decades
            .iter()
            .flat_map(|dec| {
                let a = base_amp * 10f64.powf(-dec);
                (0..cfg.phases).map(move |k| (a, std::f64::consts::TAU * k as f64 / cfg.phases as f64))
            })
            .filter(|(a, _)| budget_left(&seeds) - a * a - reserve >= -1e-15)
            .collect();
        let scored: Vec<Result<((f64, f64), Probe)>> = candidates
            .par_iter()
            .map(|c| {
                let mut s = seeds.clone();
                s.push(*c);
                let b0 = seeded_state(n, cfg.start, &s);
                probe(&b0, g, level, horizon, cfg.tol).map(|p| (*c, p))
            })
            .collect();
        evaluations += scored.len();
        let mut best: Option<((f64, f64), Probe)> = None;
        for r in scored {
            let (c, p) = r?;
            let better = match &best {
                None => true,
                Some((_, bp)) => match (p.hit, bp.hit) {
                    (Some(t), Some(bt)) => t < bt,
                    (Some(_), None) => true,
                    (None, Some(_)) => false,
                    (None, None) => p.peak > bp.peak,
                },
            };
            if better {
                best = Some((c, p));
            }
        }
        let Some((c, p)) = best else {
            return Err(Error::SearchFailed(format!("no admissible seed for generation {}", g + 1)));
        };
        if p.hit.is_none() && stage == handoffs {
            return Err(Error::SearchFailed(format!(
                "peak concentration {:.3} at generation {} below {}",
                p.peak,
                g + 1,
                cfg.threshold
            )));
        }
        seeds.push(c);
    }
    let b0 = seeded_state(n, cfg.start, &seeds);
    let horizon = cfg.stage_time * handoffs as f64;
    let pr = probe(&b0, target, cfg.threshold, horizon, cfg.tol)?;
    let t_hit = pr
        .hit
        .ok_or_else(|| Error::SearchFailed("final orbit misses the threshold".into()))?;
    // refine the hitting time on the dense trajectory
    let traj = integrate_toy(&ToyState::new(b0.clone()), t_hit, &OdeConfig::with_tol(cfg.tol))?;
    let t0 = first_crossing(&traj, target, cfg.threshold).unwrap_or(t_hit);
    let at_t0 = traj.sample(t0);
    let mut peaks = vec![0.0f64; n];
    for y in &traj.trajectory.y {
        for (pk, x) in peaks.iter_mut().zip(y) {
            *pk = pk.max(x.norm_sqr());
        }
    }
    Ok(TransferOrbit {
        n,
        delta,
        start: cfg.start,
        target,
        b0: b0.iter().map(|x| [x.re, x.im]).collect(),
        t0,
        start_concentration: b0[cfg.start].norm_sqr(),
        target_concentration: at_t0[target].norm_sqr(),
        peaks,
        evaluations: evaluations + 1,
    })
}

fn first_crossing(traj: &ToyTrajectory<f64>, g: usize, level: f64) -> Option<f64> {
    let t = &traj.trajectory.t;
    let y = &traj.trajectory.y;
    let k = y.iter().position(|s| s[g].norm_sqr() >= level)?;
    if k == 0 {
        return Some(t[0]);
    }
    let (mut lo, mut hi) = (t[k - 1], t[k]);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if traj.sample(mid)[g].norm_sqr() >= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_field() {
        let b = ToyState::<f64>::pure(4, 1);
        let mut d = vec![Complex::new(0.0, 0.0); 4];
        toy_vector_field(&b.b, &mut d);
        assert_eq!(d[1], Complex::new(0.0, -1.0));
        assert!(d.iter().enumerate().all(|(k, x)| k == 1 || *x == Complex::new(0.0, 0.0)));
        assert_eq!(toy_invariants(&b.b), (1.0, 0.5));
    }

    #[test]
    fn slider_growth_rate_is_sqrt3() {
        // linearized neighbour of a pure state grows like e^{√3 t}
        let eps = 1e-9;
        let dir = Complex::new(1.0, 3f64.sqrt()) / 2.0;
        let mut b = ToyState::<f64>::pure(2, 0);
        b.b[1] = dir * eps;
        let tr = integrate_toy(&b, 2.0, &OdeConfig::with_tol(1e-13)).unwrap();
        let ratio = tr.final_state()[1].norm() / eps;
        assert!((ratio.ln() / 2.0 - 3f64.sqrt()).abs() < 1e-3, "{ratio}");
    }
}
