//! Galerkin-truncated cubic NLS in sparse Fourier space.
//!
//! Frames: physical amplitudes `a`, gauged `ρ = a·e^{−iGt}` with
//! `G = 2Σ|a|²`, and rotating `r = ρ·e^{−iλ(n)t}`. In the gauged frame the
//! truncated equation is
//! `−iρ̇ₙ = λ(n)ρₙ − |ρₙ|²ρₙ + Σ_{n₁−n₂+n₃=n, n₂∉{n₁,n₃}} ρ_{n₁}ρ̄_{n₂}ρ_{n₃}`,
//! i.e. `ρ̇ = i ∂𝓗/∂ρ̄` for
//! `𝓗 = Σλ|ρ|² − ½Σ|ρ|⁴ + ½Σ' ρ_{n₁}ρ̄_{n₂}ρ_{n₃}ρ̄_{n₄}`.

mod shadow;

pub use shadow::{
    growth_diagnostic, shadowing_experiment, write_growth_csv, write_z_csv, GrowthReport, GrowthSample, ShadowConfig, ShadowReport,
    ShadowRun, ZSample, SHADOW_SCHEMA_VERSION,
};

use std::collections::{BTreeMap, HashMap, HashSet};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::diophantine::OmegaSpec;
use crate::error::{Error, Result};
use crate::lambda_set::LambdaSet;
use crate::ode::{integrate_with, OdeConfig, OdeStats};
use crate::quartic::QuarticForm;
use crate::resonance::{enumerate_a0_in, enumerate_a1_in, Mode, OmegaValue, Quartet, RSquared};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Physical,
    Gauged,
    Rotating,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseFourierState<T: Real = f64> {
    pub amplitudes: BTreeMap<Mode, Complex<T>>,
    pub frame: Frame,
    pub time: T,
    pub omega: OmegaSpec,
}

impl<T: Real> SparseFourierState<T> {
    pub fn new(omega: OmegaSpec, frame: Frame) -> Self {
        SparseFourierState {
            amplitudes: BTreeMap::new(),
            frame,
            time: T::zero(),
            omega,
        }
    }

    pub fn from_pairs(omega: OmegaSpec, frame: Frame, pairs: impl IntoIterator<Item = (Mode, Complex<T>)>) -> Self {
        let mut s = Self::new(omega, frame);
        s.amplitudes.extend(pairs);
        s
    }

    pub fn get(&self, m: &Mode) -> Complex<T> {
        self.amplitudes
            .get(m)
            .copied()
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    pub fn support(&self) -> Vec<Mode> {
        self.amplitudes.keys().copied().collect()
    }

    pub fn mass(&self) -> T {
        self.amplitudes.values().map(|x| x.norm_sqr()).sum()
    }

    /// Σ n|ρₙ|².
    pub fn momentum(&self) -> (T, T) {
        self.amplitudes.iter().fold((T::zero(), T::zero()), |(a, b), (m, x)| {
            let w = x.norm_sqr();
            (a + T::lit(m.j as f64) * w, b + T::lit(m.k as f64) * w)
        })
    }

    pub fn ell1_norm(&self) -> T {
        ell1_norm(self)
    }

    pub fn sobolev_norm(&self, s: f64) -> T {
        sobolev_norm(self, s)
    }

    fn with_factors(&self, frame: Frame, phase: impl Fn(&Mode) -> T) -> Self {
        SparseFourierState {
            amplitudes: self
                .amplitudes
                .iter()
                .map(|(m, x)| (*m, *x * Complex::from_polar(T::one(), phase(m))))
                .collect(),
            frame,
            time: self.time,
            omega: self.omega.clone(),
        }
    }
}

/// λ(n) = j² + ω²k², exact in ℚ(√d) or certified by an interval.
pub fn eigenvalue(n: &Mode, r2: &RSquared) -> OmegaValue {
    let q = Quartet::new(*n, Mode::new(0, 0), Mode::new(0, 0), Mode::new(0, 0));
    r2.omega(&q)
}

pub fn eigenvalue_f64(n: &Mode, omega2: f64) -> f64 {
    (n.j as f64).powi(2) + omega2 * (n.k as f64).powi(2)
}

pub fn ell1_norm<T: Real>(state: &SparseFourierState<T>) -> T {
    state.amplitudes.values().map(|x| x.norm()).sum()
}

/// (Σ |aₙ|² ⟨n⟩^{2s})^{1/2} with ⟨n⟩ = max{1, |n|}.
pub fn sobolev_norm<T: Real>(state: &SparseFourierState<T>, s: f64) -> T {
    let s = T::lit(s);
    state
        .amplitudes
        .iter()
        .map(|(m, x)| x.norm_sqr() * T::lit(m.bracket()).powf(s * T::lit(2.0)))
        .sum::<T>()
        .sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeDirection {
    /// a → ρ
    ToGauged,
    /// ρ → a
    ToPhysical,
}

pub fn gauge_transform<T: Real>(state: &SparseFourierState<T>, dir: GaugeDirection) -> Result<SparseFourierState<T>> {
    let g = T::lit(2.0) * state.mass();
    let gt = g * state.time;
    match (dir, state.frame) {
        (GaugeDirection::ToGauged, Frame::Physical) => Ok(state.with_factors(Frame::Gauged, |_| -gt)),
        (GaugeDirection::ToPhysical, Frame::Gauged) => Ok(state.with_factors(Frame::Physical, |_| gt)),
        (d, f) => Err(Error::InvalidInput(format!("gauge {d:?} from frame {f:?}"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotateDirection {
    /// ρ → r
    ToRotating,
    /// r → ρ
    ToGauged,
}

pub fn rotate_frame<T: Real>(state: &SparseFourierState<T>, dir: RotateDirection) -> Result<SparseFourierState<T>> {
    let w2 = RSquared::from_omega(&state.omega).to_f64();
    let t = state.time;
    let lam = |m: &Mode| T::lit(eigenvalue_f64(m, w2)) * t;
    match (dir, state.frame) {
        (RotateDirection::ToRotating, Frame::Gauged) => Ok(state.with_factors(Frame::Rotating, |m| -lam(m))),
        (RotateDirection::ToGauged, Frame::Rotating) => Ok(state.with_factors(Frame::Gauged, lam)),
        (d, f) => Err(Error::InvalidInput(format!("rotate {d:?} from frame {f:?}"))),
    }
}

/// Converts to the requested frame through the gauged one.
pub fn to_frame<T: Real>(state: &SparseFourierState<T>, frame: Frame) -> Result<SparseFourierState<T>> {
    if state.frame == frame {
        return Ok(state.clone());
    }
    let gauged = match state.frame {
        Frame::Physical => gauge_transform(state, GaugeDirection::ToGauged)?,
        Frame::Rotating => rotate_frame(state, RotateDirection::ToGauged)?,
        Frame::Gauged => state.clone(),
    };
    match frame {
        Frame::Gauged => Ok(gauged),
        Frame::Physical => gauge_transform(&gauged, GaugeDirection::ToPhysical),
        Frame::Rotating => rotate_frame(&gauged, RotateDirection::ToRotating),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    /// {|j| ≤ m, |k| ≤ m}, all interactions.
    Box { m: i64 },
    /// Λ together with every mode within ℓ∞ distance `radius` of Λ, all
    /// interactions.
    Shell { radius: i64 },
    /// Λ and the outsiders of its A(1) quartets, with interactions limited
    /// to quartets having at most one mode outside Λ.
    LambdaPlusA1,
}

/// A mode set 𝒯 ⊇ Λ and the quartic interactions retained on it.
#[derive(Clone, Debug)]
pub struct TruncationRegion {
    pub spec: RegionSpec,
    modes: Vec<Mode>,
    lambda: HashSet<Mode>,
    /// Interacting canonical quartets grouped by the number of modes
    /// outside Λ: 0, 1 and ≥ 2. Self-interactions are included.
    classes: [Vec<Quartet>; 3],
}

fn class_of(q: &Quartet, lambda: &HashSet<Mode>) -> usize {
    q.0.iter().filter(|m| !lambda.contains(m)).count().min(2)
}

/// Canonical nontrivial quartets with all four modes in `modes`.
fn all_quartets(modes: &[Mode]) -> Vec<Quartet> {
    let mut by_sum: HashMap<Mode, Vec<(Mode, Mode)>> = HashMap::new();
    for (i, a) in modes.iter().enumerate() {
        for c in &modes[i..] {
            by_sum.entry(*a + *c).or_default().push((*a, *c));
        }
    }
    let mut out = Vec::new();
    for pairs in by_sum.values() {
        for (x, (a, c)) in pairs.iter().enumerate() {
            for (y, (b, d)) in pairs.iter().enumerate() {
                if x != y {
                    out.push(Quartet::new(*a, *b, *c, *d).canonical());
                }
            }
        }
    }
    out.sort();
    out
}

impl TruncationRegion {
    pub fn new(spec: RegionSpec, set: &LambdaSet) -> Result<Self> {
        let lambda = set.mode_set();
        let mut modes: Vec<Mode> = match &spec {
            RegionSpec::Box { m } => {
                if *m < 0 {
                    return Err(Error::InvalidInput("box half-width must be nonnegative".into()));
                }
                let b: Vec<Mode> = (-m..=*m).flat_map(|j| (-m..=*m).map(move |k| Mode::new(j, k))).collect();
                if let Some(x) = lambda.iter().find(|x| x.j.abs() > *m || x.k.abs() > *m) {
                    return Err(Error::SupportEscape(*x));
                }
                b
            }
            RegionSpec::Shell { radius } => {
                let mut s: HashSet<Mode> = HashSet::new();
                for x in &lambda {
                    for dj in -radius..=*radius {
                        for dk in -radius..=*radius {
                            s.insert(*x + Mode::new(dj, dk));
                        }
                    }
                }
                s.into_iter().collect()
            }
            RegionSpec::LambdaPlusA1 => {
                let mut s: HashSet<Mode> = lambda.clone();
                for q in enumerate_a1_in(&set.modes()) {
                    s.extend(q.0.iter().copied());
                }
                s.into_iter().collect()
            }
        };
        modes.sort();
        let quartets = match &spec {
            RegionSpec::LambdaPlusA1 => {
                let mut v = enumerate_a0_in(&set.modes());
                v.extend(enumerate_a1_in(&set.modes()));
                v
            }
            _ => all_quartets(&modes),
        };
        let mut classes: [Vec<Quartet>; 3] = Default::default();
        for q in quartets {
            classes[class_of(&q, &lambda)].push(q);
        }
        for m in &modes {
            let q = Quartet::new(*m, *m, *m, *m);
            classes[class_of(&q, &lambda)].push(q);
        }
        Ok(TruncationRegion {
            spec,
            modes,
            lambda,
            classes,
        })
    }

    /// Default box: three times the largest coordinate of Λ.
    pub fn default_box(set: &LambdaSet) -> Result<Self> {
        let m = set.modes().iter().map(|x| x.j.abs().max(x.k.abs())).max().unwrap_or(0);
        Self::new(RegionSpec::Box { m: 3 * m }, set)
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn contains(&self, m: &Mode) -> bool {
        self.modes.binary_search(m).is_ok()
    }

    pub fn in_lambda(&self, m: &Mode) -> bool {
        self.lambda.contains(m)
    }

    pub fn quartets(&self, class: usize) -> &[Quartet] {
        &self.classes[class]
    }

    pub fn n_interactions(&self) -> usize {
        self.classes.iter().map(|c| c.len()).sum()
    }
}

/// Number of slot orderings of an ordered quartet that give the same
/// monomial.
pub fn multiplicity(q: &Quartet) -> u8 {
    let [a, b, c, d] = q.0;
    (if a == c { 1 } else { 2 }) * (if b == d { 1 } else { 2 })
}

/// The truncated NLS on a region, ready for integration.
#[derive(Clone, Debug)]
pub struct NlsSystem<T: Real = f64> {
    modes: Vec<Mode>,
    index: HashMap<Mode, usize>,
    lambda: Vec<T>,
    /// Quartic part split by class (0, 1, ≥ 2 modes outside Λ).
    forms: [QuarticForm<T>; 3],
    in_lambda: Vec<bool>,
    pub nonlinear: bool,
}

impl<T: Real> NlsSystem<T> {
    pub fn new(region: &TruncationRegion, omega: &OmegaSpec) -> Self {
        let w2 = RSquared::from_omega(omega).to_f64();
        let modes = region.modes().to_vec();
        let index: HashMap<Mode, usize> = modes.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let lam: Vec<f64> = modes.iter().map(|m| eigenvalue_f64(m, w2)).collect();
        let half = T::lit(0.5);
        let forms = [0, 1, 2].map(|c| {
            let mut f = QuarticForm::new(modes.clone());
            for q in region.quartets(c) {
                let [a, b, cc, d] = q.0.map(|m| index[&m]);
                let omega = T::lit(lam[a] - lam[b] + lam[cc] - lam[d]);
                let coef = if q.is_trivial() {
                    -half
                } else {
                    half * T::lit(multiplicity(q) as f64)
                };
                f.push(q, Complex::new(coef, T::zero()), omega);
            }
            f
        });
        let in_lambda = modes.iter().map(|m| region.in_lambda(m)).collect();
        NlsSystem {
            modes,
            index,
            lambda: lam.into_iter().map(T::lit).collect(),
            forms,
            in_lambda,
            nonlinear: true,
        }
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn index_of(&self, m: &Mode) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.lambda
    }

    pub fn in_lambda(&self) -> &[bool] {
        &self.in_lambda
    }

    pub fn form(&self, class: usize) -> &QuarticForm<T> {
        &self.forms[class]
    }

    /// Dense vector on the region; errors if the state leaves it.
    pub fn pack(&self, state: &SparseFourierState<T>) -> Result<Vec<Complex<T>>> {
        let mut v = vec![Complex::new(T::zero(), T::zero()); self.dim()];
        for (m, x) in &state.amplitudes {
            let i = self.index_of(m).ok_or(Error::SupportEscape(*m))?;
            v[i] = *x;
        }
        Ok(v)
    }

    pub fn unpack(&self, v: &[Complex<T>], frame: Frame, time: T, omega: &OmegaSpec) -> SparseFourierState<T> {
        SparseFourierState::from_pairs(omega.clone(), frame, self.modes.iter().copied().zip(v.iter().copied())).with_time(time)
    }

    fn quartic_grad(&self, x: &[Complex<T>], out: &mut [Complex<T>], classes: &[usize]) {
        for o in out.iter_mut() {
            *o = Complex::new(T::zero(), T::zero());
        }
        if self.nonlinear {
            for c in classes {
                self.forms[*c].add_grad_conj(x, None, out);
            }
        }
    }

    /// Gauged-frame field ρ̇ = i(λρ + ∂H⁽⁴⁾/∂ρ̄).
    pub fn field_gauged(&self, rho: &[Complex<T>], out: &mut [Complex<T>]) {
        self.quartic_grad(rho, out, &[0, 1, 2]);
        let i = Complex::new(T::zero(), T::one());
        for n in 0..rho.len() {
            out[n] = i * (out[n] + rho[n] * self.lambda[n]);
        }
    }

    /// e^{iλ(n)t} per mode.
    pub fn phases(&self, t: T) -> Vec<Complex<T>> {
        self.lambda.iter().map(|l| Complex::from_polar(T::one(), *l * t)).collect()
    }

    /// Rotating-frame field restricted to the given interaction classes.
    pub fn field_rotating_classes(&self, t: T, r: &[Complex<T>], out: &mut [Complex<T>], classes: &[usize]) {
        let u = self.phases(t);
        let beta: Vec<Complex<T>> = r.iter().zip(&u).map(|(x, p)| *x * *p).collect();
        self.quartic_grad(&beta, out, classes);
        let i = Complex::new(T::zero(), T::one());
        for n in 0..r.len() {
            out[n] = i * u[n].conj() * out[n];
        }
    }

    /// Rotating-frame field ṙ = i e^{−iλt} ∂H⁽⁴⁾/∂ρ̄ (ρ = r e^{iλt}).
    pub fn field_rotating(&self, t: T, r: &[Complex<T>], out: &mut [Complex<T>]) {
        self.field_rotating_classes(t, r, out, &[0, 1, 2])
    }

    /// 𝓗 in the gauged frame.
    pub fn hamiltonian(&self, rho: &[Complex<T>]) -> T {
        let quad: T = rho.iter().zip(&self.lambda).map(|(x, l)| x.norm_sqr() * *l).sum();
        if !self.nonlinear {
            return quad;
        }
        quad + self.forms.iter().map(|f| f.value(rho, None).re).sum::<T>()
    }
}

impl<T: Real> SparseFourierState<T> {
    pub fn with_time(mut self, time: T) -> Self {
        self.time = time;
        self
    }
}

/// Field of the truncated equation at a gauged state, per mode of 𝒯.
pub fn nls_truncated_field<T: Real>(state: &SparseFourierState<T>, system: &NlsSystem<T>) -> Result<BTreeMap<Mode, Complex<T>>> {
    if state.frame != Frame::Gauged {
        return Err(Error::InvalidInput(format!(
            "field expects the gauged frame, got {:?}",
            state.frame
        )));
    }
    let rho = system.pack(state)?;
    let mut out = vec![Complex::new(T::zero(), T::zero()); rho.len()];
    system.field_gauged(&rho, &mut out);
    Ok(system.modes.iter().copied().zip(out).collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct NlsDrift {
    pub mass: f64,
    pub hamiltonian: f64,
    pub momentum: f64,
}

/// Samples of an NLS run in the rotating frame.
#[derive(Clone, Debug)]
pub struct NlsTrajectory<T: Real = f64> {
    pub times: Vec<T>,
    pub states: Vec<Vec<Complex<T>>>,
    pub drift: NlsDrift,
    pub stats: OdeStats,
}

/// Integrates the truncated NLS in the rotating frame from `state0` (any
/// frame) to `t_end`, recording every accepted step (or every `stride`-th).
pub fn integrate_nls<T: Real>(
    state0: &SparseFourierState<T>,
    t_end: T,
    system: &NlsSystem<T>,
    cfg: &OdeConfig,
    stride: usize,
) -> Result<NlsTrajectory<T>> {
    let r0s = to_frame(state0, Frame::Rotating)?;
    let r0 = system.pack(&r0s)?;
    let t0 = r0s.time;
    let invariants = |t: T, r: &[Complex<T>]| {
        let u = system.phases(t);
        let rho: Vec<Complex<T>> = r.iter().zip(&u).map(|(x, p)| *x * *p).collect();
        let mass: T = rho.iter().map(|x| x.norm_sqr()).sum();
        let mom = system.modes.iter().zip(&rho).fold((T::zero(), T::zero()), |(a, b), (m, x)| {
            (a + T::lit(m.j as f64) * x.norm_sqr(), b + T::lit(m.k as f64) * x.norm_sqr())
        });
        (mass, system.hamiltonian(&rho), mom)
    };
    let (m0, h0, p0) = invariants(t0, &r0);
    let mut traj = NlsTrajectory {
        times: vec![t0],
        states: vec![r0.clone()],
        drift: NlsDrift::default(),
        stats: OdeStats::default(),
    };
    let mut k = 0usize;
    let mut drift = NlsDrift::default();
    let (t_last, y_last, stats) = integrate_with(
        |t, y: &[Complex<T>], d: &mut [Complex<T>]| system.field_rotating(t, y, d),
        t0,
        &r0,
        t_end,
        cfg,
        |s| {
            k += 1;
            let (m, h, p) = invariants(s.t1, s.y1);
            let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
            drift.mass = drift.mass.max(f((m - m0).abs()));
            drift.hamiltonian = drift.hamiltonian.max(f((h - h0).abs()));
            drift.momentum = drift.momentum.max(f((p.0 - p0.0).abs() + (p.1 - p0.1).abs()));
            if k.is_multiple_of(stride.max(1)) {
                traj.times.push(s.t1);
                traj.states.push(s.y1.to_vec());
            }
            true
        },
    )?;
    if traj.times.last() != Some(&t_last) {
        traj.times.push(t_last);
        traj.states.push(y_last);
    }
    traj.drift = drift;
    traj.stats = stats;
    Ok(traj)
}

/// NLS trajectory CSV: t, ℓ¹ norm, mass, Hamiltonian, ℓ¹ mass outside Λ,
/// then |rₙ|² per Λ generation.
pub fn write_nls_csv<W: std::io::Write>(out: W, traj: &NlsTrajectory<f64>, system: &NlsSystem<f64>, set: &LambdaSet) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let n = set.n_generations();
    let mut header: Vec<String> = ["t", "ell1", "mass", "hamiltonian", "outside_ell1"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=n).map(|i| format!("gen{i}_mass")));
    w.write_record(&header).map_err(io)?;
    let gens: Vec<Option<usize>> = system.modes.iter().map(|m| set.generation_of(m)).collect();
    for (t, r) in traj.times.iter().zip(&traj.states) {
        let u = system.phases(*t);
        let rho: Vec<Complex<f64>> = r.iter().zip(&u).map(|(x, p)| x * p).collect();
        let mut gm = vec![0.0; n];
        let mut outside = 0.0;
        for (x, g) in r.iter().zip(&gens) {
            match g {
                Some(g) => gm[*g] += x.norm_sqr(),
                None => outside += x.norm(),
            }
        }
        let mut row = vec![
            format!("{t:.17e}"),
            format!("{:.17e}", r.iter().map(|x| x.norm()).sum::<f64>()),
            format!("{:.17e}", r.iter().map(|x| x.norm_sqr()).sum::<f64>()),
            format!("{:.17e}", system.hamiltonian(&rho)),
            format!("{outside:.17e}"),
        ];
        row.extend(gm.iter().map(|v| format!("{v:.17e}")));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalue_examples() {
        let r2 = RSquared::from_omega(&OmegaSpec::sqrt(2).unwrap());
        assert_eq!(eigenvalue(&Mode::new(1, 1), &r2).to_f64(), 3.0);
        assert_eq!(eigenvalue(&Mode::new(1, 1), &r2).is_zero(), Some(false));
        let one = RSquared::from_omega(&OmegaSpec::rational(1, 1).unwrap());
        assert_eq!(eigenvalue(&Mode::new(3, 4), &one).to_f64(), 25.0);
        assert_eq!(eigenvalue(&Mode::new(0, 0), &one).is_zero(), Some(true));
    }

    #[test]
    fn all_quartets_are_closed_and_nontrivial() {
        let modes: Vec<Mode> = (-1..=1).flat_map(|j| (-1..=1).map(move |k| Mode::new(j, k))).collect();
        let qs = all_quartets(&modes);
        assert!(qs.iter().all(|q| q.is_momentum_closed() && !q.is_trivial()));
        let mut d = qs.clone();
        d.dedup();
        assert_eq!(d.len(), qs.len());
    }
}
