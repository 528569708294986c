use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Frame, NlsSystem, RegionSpec, SparseFourierState, TruncationRegion};
use crate::diophantine::OmegaSpec;
use crate::error::{Error, Result};
use crate::lambda_set::{generation_weights, LambdaSet};
use crate::normal_form::{build_f, default_eta, gamma_apply, BirkhoffMap, Direction, Normalization};
use crate::ode::{integrate_to_times, integrate_with, OdeConfig};
use crate::resonance::{compute_l1, Mode, RSquared};
use crate::toy_model::{integrate_toy, SpouseSystem, ToyState, ToyTrajectory};

pub const SHADOW_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShadowConfig {
    pub ladder: Vec<f64>,
    pub region: RegionSpec,
    pub ode: OdeConfig,
    /// Integrator settings for Γ and Γ⁻¹.
    pub flow: OdeConfig,
    /// Start the NLS from Γ(r^λ(0)) and compare through Γ⁻¹.
    pub conjugate: bool,
    pub nonlinear: bool,
    /// Uniform samples of [0, λ²T₀] for the supremum.
    pub grid_points: usize,
    /// Samples on which the Z-term split is evaluated.
    pub z_points: usize,
    /// Ball radius for Γ; defaults to the larger of the smallness value and
    /// four times ‖r^λ(0)‖_{ℓ¹}.
    pub eta: Option<f64>,
}

impl Default for ShadowConfig {
    fn default() -> Self {
        ShadowConfig {
            ladder: vec![4.0, 8.0, 16.0],
            region: RegionSpec::LambdaPlusA1,
            ode: OdeConfig {
                atol: 1e-11,
                rtol: 1e-8,
                ..Default::default()
            },
            flow: OdeConfig {
                atol: 1e-15,
                rtol: 1e-12,
                ..Default::default()
            },
            conjugate: true,
            nonlinear: true,
            grid_points: 1024,
            z_points: 16,
            eta: None,
        }
    }
}

/// ℓ¹ sizes of the five terms of the error equation at one time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZSample {
    pub t: f64,
    pub z: [f64; 5],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadowRun {
    pub lambda: f64,
    pub t_end: f64,
    /// sup_t ‖r(t) − r^λ(t)‖_{ℓ¹}.
    pub sup_error: f64,
    /// sup_t of the error divided by ‖r^λ(t)‖_{ℓ¹}.
    pub sup_relative_error: f64,
    /// sup_t of the ℓ¹ mass outside Λ.
    pub leak: f64,
    pub eta: f64,
    /// ‖r^λ(0)‖_{ℓ¹} ≤ η with η from the smallness condition.
    pub small_data: bool,
    pub steps: usize,
    pub z_terms: Vec<ZSample>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadowReport {
    pub schema_version: u32,
    pub omega: String,
    pub scaling: (i64, i64),
    pub t0: f64,
    pub region_modes: usize,
    pub interactions: usize,
    pub conjugate: bool,
    pub nonlinear: bool,
    pub runs: Vec<ShadowRun>,
    /// Least-squares slope of log sup-error against log λ.
    pub slope: f64,
    pub strictly_decreasing: bool,
    pub pass: bool,
}

fn l1(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).sum()
}

/// Least-squares slope of log y against log x.
pub(crate) fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

struct Ctx<'a> {
    system: &'a NlsSystem<f64>,
    spouse: &'a SpouseSystem,
    /// Region index of each Λ mode, in spouse order.
    lam_idx: Vec<usize>,
    omega: &'a OmegaSpec,
}

impl Ctx<'_> {
    fn dim(&self) -> usize {
        self.system.dim()
    }

    /// Lifted toy values placed in a region vector.
    fn embed(&self, b: &[Complex64]) -> Vec<Complex64> {
        let lifted = self.spouse.lift(b);
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (i, x) in self.lam_idx.iter().zip(lifted) {
            v[*i] = x;
        }
        v
    }

    fn x_n(&self, x: &[Complex64]) -> Vec<Complex64> {
        let r: Vec<Complex64> = self.lam_idx.iter().map(|i| x[*i]).collect();
        let mut d = vec![Complex64::new(0.0, 0.0); r.len()];
        if self.system.nonlinear {
            self.spouse.field(&r, &mut d);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (i, v) in self.lam_idx.iter().zip(d) {
            out[*i] = v;
        }
        out
    }

    /// X of 𝓠⁽⁴,⁰⁾ + 𝓠⁽⁴,≥²⁾ at time t.
    fn x_q(&self, t: f64, x: &[Complex64]) -> Vec<Complex64> {
        let mut h40 = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.system.field_rotating_classes(t, x, &mut h40, &[0]);
        let mut h42 = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.system.field_rotating_classes(t, x, &mut h42, &[2]);
        let n = self.x_n(x);
        (0..self.dim()).map(|k| h40[k] - n[k] + h42[k]).collect()
    }

    fn pull_back(&self, map: Option<&BirkhoffMap<f64>>, t: f64, r: &[Complex64]) -> Result<Vec<Complex64>> {
        let Some(map) = map else { return Ok(r.to_vec()) };
        let s = self.system.unpack(r, Frame::Rotating, t, self.omega);
        let b = gamma_apply(map, &s)?;
        self.system.pack(&b)
    }
}

fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[allow(clippy::too_many_arguments)]
fn z_sample(
    ctx: &Ctx,
    inv: Option<&BirkhoffMap<f64>>,
    cfg: &ShadowConfig,
    t: f64,
    r: &[Complex64],
    beta: &[Complex64],
    rl: &[Complex64],
    h: f64,
) -> Result<ZSample> {
    let xi = sub(beta, rl);
    let minus: Vec<Complex64> = sub(rl, &xi);
    let n_plus = ctx.x_n(beta);
    let n_minus = ctx.x_n(&minus);
    let n_rl = ctx.x_n(rl);
    let n_xi = ctx.x_n(&xi);
    let z1: Vec<Complex64> = (0..xi.len()).map(|k| (n_plus[k] - n_minus[k]) * 0.5 - n_xi[k]).collect();
    let z2: Vec<Complex64> = (0..xi.len()).map(|k| n_plus[k] - n_rl[k] - z1[k]).collect();
    let q_rl = ctx.x_q(t, rl);
    let q_beta = ctx.x_q(t, beta);
    let z3 = q_rl.clone();
    let z4 = sub(&q_beta, &q_rl);
    // β̇ by a centred difference of Γ⁻¹ along the NLS flow
    let step = |dt: f64| -> Result<Vec<Complex64>> {
        let (_, y, _) = integrate_with(
            |s, y: &[Complex64], d: &mut [Complex64]| ctx.system.field_rotating(s, y, d),
            t,
            r,
            t + dt,
            &cfg.ode,
            |_| true,
        )?;
        ctx.pull_back(inv, t + dt, &y)
    };
    let bp = step(h)?;
    let bm = step(-h)?;
    let beta_dot: Vec<Complex64> = bp.iter().zip(&bm).map(|(p, m)| (p - m) / (2.0 * h)).collect();
    let model = add(&ctx.x_n(beta), &q_beta);
    let z0 = sub(&beta_dot, &model);
    Ok(ZSample {
        t,
        z: [l1(&z0), l1(&z1), l1(&z2), l1(&z3), l1(&z4)],
    })
}

/// Runs the λ-ladder shadowing experiment for the reference toy orbit
/// starting at `b0` with lifespan `t0`.
pub fn shadowing_experiment(set: &LambdaSet, omega: &OmegaSpec, b0: &ToyState<f64>, t0: f64, cfg: &ShadowConfig) -> Result<ShadowReport> {
    if cfg.ladder.is_empty() || cfg.ladder.windows(2).any(|w| w[1] <= w[0]) || cfg.ladder[0] <= 0.0 {
        return Err(Error::InvalidInput("λ ladder must be positive and strictly increasing".into()));
    }
    if b0.b.len() != set.n_generations() {
        return Err(Error::InvalidInput(format!(
            "toy state has {} generations, set has {}",
            b0.b.len(),
            set.n_generations()
        )));
    }
    if t0 <= 0.0 || cfg.grid_points < 2 {
        return Err(Error::InvalidInput("T₀ must be positive and the grid at least two points".into()));
    }
    let region = TruncationRegion::new(cfg.region.clone(), set)?;
    let mut system = NlsSystem::<f64>::new(&region, omega);
    system.nonlinear = cfg.nonlinear;
    let spouse = SpouseSystem::new(set)?;
    let lam_idx: Vec<usize> = spouse
        .modes()
        .iter()
        .map(|m| system.index_of(m).ok_or(Error::SupportEscape(*m)))
        .collect::<Result<_>>()?;
    let ctx = Ctx {
        system: &system,
        spouse: &spouse,
        lam_idx,
        omega,
    };
    let (forward, l1_value) = if cfg.conjugate && cfg.nonlinear {
        let f = build_f::<f64>(set, omega, Normalization::Field)?;
        let l1v = compute_l1(set, &RSquared::from_omega(omega))?.value.to_f64();
        (Some(f), l1v)
    } else {
        (None, f64::INFINITY)
    };
    let reference: Option<ToyTrajectory<f64>> = if cfg.nonlinear {
        Some(integrate_toy(b0, t0, &OdeConfig::with_tol(1e-12))?)
    } else {
        None
    };
    let toy_at = |tau: f64| -> Vec<Complex64> {
        match &reference {
            Some(tr) => tr.sample(tau),
            None => b0.b.clone(),
        }
    };
    let omega_max = system
        .form(0)
        .terms()
        .iter()
        .chain(system.form(1).terms())
        .map(|t| t.omega.abs())
        .fold(1.0f64, f64::max);
    let runs: Vec<Result<ShadowRun>> = cfg
        .ladder
        .par_iter()
        .map(|&lambda| -> Result<ShadowRun> {
            let t_end = lambda * lambda * t0;
            let rl0: Vec<Complex64> = ctx.embed(&toy_at(0.0).iter().map(|x| x / lambda).collect::<Vec<_>>());
            let small = default_eta(l1_value);
            let eta = cfg.eta.unwrap_or_else(|| small.max(4.0 * l1(&rl0)));
            let fwd = forward
                .as_ref()
                .map(|f| BirkhoffMap::<f64>::new(f, Direction::Forward, cfg.flow, eta));
            let inv = fwd.as_ref().map(|m| m.inverse());
            let start = match &fwd {
                Some(m) => {
                    let s = system.unpack(&rl0, Frame::Rotating, 0.0, omega);
                    system.pack(&gamma_apply(m, &s)?)?
                }
                None => rl0.clone(),
            };
            let times: Vec<f64> = (1..cfg.grid_points)
                .map(|k| t_end * k as f64 / (cfg.grid_points - 1) as f64)
                .collect();
            let (states, stats) = integrate_to_times(
                |t, y: &[Complex64], d: &mut [Complex64]| system.field_rotating(t, y, d),
                0.0,
                &start,
                &times,
                &cfg.ode,
            )?;
            let mut all_t = vec![0.0];
            all_t.extend_from_slice(&times);
            let mut all_r = vec![start];
            all_r.extend(states);
            let mut sup_error: f64 = 0.0;
            let mut sup_rel: f64 = 0.0;
            let mut leak: f64 = 0.0;
            let mut betas = Vec::with_capacity(all_t.len());
            for (t, r) in all_t.iter().zip(&all_r) {
                let beta = ctx.pull_back(inv.as_ref(), *t, r)?;
                let rl = ctx.embed(&toy_at(t / (lambda * lambda)).iter().map(|x| x / lambda).collect::<Vec<_>>());
                let e = l1(&sub(&beta, &rl));
                sup_error = sup_error.max(e);
                sup_rel = sup_rel.max(e / l1(&rl).max(f64::MIN_POSITIVE));
                let out: f64 = r
                    .iter()
                    .zip(system.in_lambda())
                    .filter(|(_, inside)| !**inside)
                    .map(|(x, _)| x.norm())
                    .sum();
                leak = leak.max(out);
                betas.push((beta, rl));
            }
            let mut z_terms = Vec::new();
            if cfg.z_points > 0 && cfg.nonlinear {
                let stride = (all_t.len() / cfg.z_points).max(1);
                let h = 1e-2 / omega_max;
                for k in (stride..all_t.len()).step_by(stride).take(cfg.z_points) {
                    let (beta, rl) = &betas[k];
                    z_terms.push(z_sample(&ctx, inv.as_ref(), cfg, all_t[k], &all_r[k], beta, rl, h)?);
                }
            }
            Ok(ShadowRun {
                lambda,
                t_end,
                sup_error,
                sup_relative_error: sup_rel,
                leak,
                eta,
                small_data: l1(&rl0) <= small,
                steps: stats.accepted,
                z_terms,
            })
        })
        .collect();
    let runs: Vec<ShadowRun> = runs.into_iter().collect::<Result<_>>()?;
    let errs: Vec<f64> = runs.iter().map(|r| r.sup_error).collect();
    let strictly_decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let slope = if runs.len() >= 2 && errs.iter().all(|e| *e > 0.0) {
        loglog_slope(&cfg.ladder, &errs)
    } else {
        f64::NAN
    };
    let pass = strictly_decreasing && slope <= -0.7;
    Ok(ShadowReport {
        schema_version: SHADOW_SCHEMA_VERSION,
        omega: omega.to_string(),
        scaling: set.scaling(),
        t0,
        region_modes: system.dim(),
        interactions: region.n_interactions(),
        conjugate: cfg.conjugate,
        nonlinear: cfg.nonlinear,
        runs,
        slope,
        strictly_decreasing,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthSample {
    pub t: f64,
    pub norm_s: f64,
    /// Σ_{n∈Λᵢ} |rₙ|² per generation.
    pub generation_mass: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub s: f64,
    pub samples: Vec<GrowthSample>,
    /// ‖·‖_s² at the end over ‖·‖_s² at the start.
    pub ratio: f64,
    /// S_target / S_start.
    pub expected: f64,
    pub start: usize,
    pub target: usize,
}

/// H^s norms and generation masses along a trajectory given on `modes`.
pub fn growth_diagnostic(
    set: &LambdaSet,
    modes: &[Mode],
    times: &[f64],
    states: &[Vec<Complex64>],
    s: f64,
    start: usize,
    target: usize,
) -> Result<GrowthReport> {
    if times.is_empty() || times.len() != states.len() {
        return Err(Error::InvalidInput("times and states must be nonempty and aligned".into()));
    }
    let n = set.n_generations();
    if start >= n || target >= n {
        return Err(Error::InvalidInput(format!("generations {start}/{target} out of range")));
    }
    let omega = OmegaSpec::rational(1, 1)?;
    let samples: Vec<GrowthSample> = times
        .iter()
        .zip(states)
        .map(|(t, v)| {
            let st = SparseFourierState::from_pairs(omega.clone(), Frame::Gauged, modes.iter().copied().zip(v.iter().copied()));
            let mut gm = vec![0.0; n];
            for (m, x) in modes.iter().zip(v) {
                if let Some(g) = set.generation_of(m) {
                    gm[g] += x.norm_sqr();
                }
            }
            GrowthSample {
                t: *t,
                norm_s: st.sobolev_norm(s),
                generation_mass: gm,
            }
        })
        .collect();
    let w = generation_weights(set, s);
    let first = samples.first().expect("nonempty").norm_s;
    let last = samples.last().expect("nonempty").norm_s;
    Ok(GrowthReport {
        s,
        ratio: (last / first).powi(2),
        expected: w[target] / w[start],
        samples,
        start,
        target,
    })
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

/// Growth CSV: t, ‖·‖_s, then the mass of each generation.
pub fn write_growth_csv<W: std::io::Write>(out: W, report: &GrowthReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = report.samples.first().map_or(0, |s| s.generation_mass.len());
    let mut header = vec!["t".to_string(), "norm_s".to_string()];
    header.extend((1..=n).map(|i| format!("gen{i}_mass")));
    w.write_record(&header).map_err(csv_err)?;
    for s in &report.samples {
        let mut row = vec![format!("{:.17e}", s.t), format!("{:.17e}", s.norm_s)];
        row.extend(s.generation_mass.iter().map(|v| format!("{v:.17e}")));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))
}

/// Z-term CSV: lambda, t, z0 … z4.
pub fn write_z_csv<W: std::io::Write>(out: W, report: &ShadowReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "t", "z0", "z1", "z2", "z3", "z4"]).map_err(csv_err)?;
    for run in &report.runs {
        for z in &run.z_terms {
            let mut row = vec![format!("{:.17e}", run.lambda), format!("{:.17e}", z.t)];
            row.extend(z.z.iter().map(|v| format!("{v:.17e}")));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))
}
