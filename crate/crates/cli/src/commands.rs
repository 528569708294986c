use std::fs;
use std::path::PathBuf;

use num_bigint::BigUint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use nls_cascade::diophantine::{
    convergents, expand_continued_fraction, is_psi_convergent, select_convergent, verify_bracket, ApproxProfile, Expansion, OmegaSpec,
};
use nls_cascade::lambda_set::{
    build_base_set, radius_bracket, scale_set, verify_properties, verify_properties_exhaustive, LambdaSet, Strategy, VerifyOptions,
};
use nls_cascade::nls_sim::{
    growth_diagnostic, integrate_nls, shadowing_experiment, write_growth_csv, write_nls_csv, write_z_csv, Frame, NlsSystem, RegionSpec,
    ShadowConfig, SparseFourierState, TruncationRegion,
};
use nls_cascade::normal_form::{build_f, check_l1_hypothesis, homological_residual, Normalization};
use nls_cascade::ode::OdeConfig;
use nls_cascade::params::{paper_scale_params, parse_rational, ScaleConstants};
use nls_cascade::resonance::{compute_l1, RSquared};
use nls_cascade::scalar::QuadSurd;
use nls_cascade::toy_model::{
    find_transfer_orbit, integrate_spouse, integrate_toy, write_toy_csv, SpouseSystem, ToyState, TransferConfig, TransferOrbit,
};

use crate::output::RunOutput;
use crate::CliError;

fn default_omega() -> OmegaSpec {
    OmegaSpec::sqrt(2).expect("valid")
}

/// Loads a set file, accepting either a bare set or a wrapped report.
pub fn load_set(path: &PathBuf) -> Result<LambdaSet, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let inner = match value.get("report") {
        Some(r) => r.get("set").cloned().unwrap_or_else(|| r.clone()),
        None => value,
    };
    Ok(LambdaSet::from_json(&inner.to_string())?)
}

/// A set file, optionally rescaled by `(p, q)` relative to its base.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetRef {
    pub path: PathBuf,
    #[serde(default)]
    pub scale: Option<(i64, i64)>,
}

impl SetRef {
    fn load(&self) -> Result<LambdaSet, CliError> {
        let set = load_set(&self.path)?;
        match self.scale {
            Some((p, q)) => Ok(scale_set(set.base(), p, q)?),
            None => Ok(set),
        }
    }
}

fn print_line(s: &str) {
    println!("{s}");
}

// ---------------------------------------------------------------- cf

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CfConfig {
    pub omega: OmegaSpec,
    pub depth: usize,
    pub profile: Option<ApproxProfile>,
}

impl Default for CfConfig {
    fn default() -> Self {
        CfConfig {
            omega: default_omega(),
            depth: 20,
            profile: None,
        }
    }
}

#[derive(Serialize)]
struct ConvergentRow {
    index: usize,
    p: String,
    q: String,
    abs_error_lo: f64,
    abs_error_hi: f64,
    bracket_holds: Option<bool>,
    psi_holds: Option<bool>,
}

#[derive(Serialize)]
struct CfReport {
    omega: String,
    expansion: Expansion,
    convergents: Vec<ConvergentRow>,
    all_brackets_hold: bool,
}

pub fn run_cf(cfg: &CfConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let expansion = expand_continued_fraction(&cfg.omega, cfg.depth)?;
    let convs = convergents(&cfg.omega, cfg.depth + 1)?;
    let mut rows = Vec::new();
    for (k, c) in convs.iter().enumerate().take(cfg.depth) {
        let bracket = match convs.get(k + 1) {
            Some(next) => Some(verify_bracket(&cfg.omega, c, &next.q)?),
            None => None,
        };
        let psi = match &cfg.profile {
            Some(prof) if c.q >= 2u32.into() => Some(is_psi_convergent(&cfg.omega, &c.p, &c.q, prof)?.holds),
            _ => None,
        };
        rows.push(ConvergentRow {
            index: c.index,
            p: c.p.to_string(),
            q: c.q.to_string(),
            abs_error_lo: nls_cascade::scalar::ratio_to_f64(&c.abs_error_bounds.0),
            abs_error_hi: nls_cascade::scalar::ratio_to_f64(&c.abs_error_bounds.1),
            bracket_holds: bracket,
            psi_holds: psi,
        });
    }
    let all = rows.iter().all(|r| r.bracket_holds != Some(false));
    print_line(&format!(
        "cf: {} quotients, {} convergents, brackets hold: {all}",
        expansion.quotients.len(),
        rows.len()
    ));
    out.json(
        "cf.json",
        &CfReport {
            omega: cfg.omega.to_string(),
            expansion,
            convergents: rows,
            all_brackets_hold: all,
        },
    )
}

// ---------------------------------------------------------------- lambda

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LambdaBuildConfig {
    pub n: usize,
    pub seed: u64,
    pub strategy: Option<Strategy>,
    pub scale: (i64, i64),
    pub verify: bool,
}

impl Default for LambdaBuildConfig {
    fn default() -> Self {
        LambdaBuildConfig {
            n: 3,
            seed: 1,
            strategy: None,
            scale: (1, 1),
            verify: true,
        }
    }
}

#[derive(Serialize)]
struct SetReport<'a, R: Serialize> {
    set: serde_json::Value,
    verification: Option<&'a R>,
}

fn set_value(set: &LambdaSet) -> serde_json::Value {
    serde_json::from_str(&set.to_json()).expect("set json")
}

pub fn run_lambda_build(cfg: &LambdaBuildConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let strategy = cfg.strategy.clone().unwrap_or_else(|| Strategy::for_generations(cfg.n));
    let base = build_base_set(cfg.n, &strategy, cfg.seed)?;
    let set = scale_set(&base, cfg.scale.0, cfg.scale.1)?;
    let report = if cfg.verify {
        Some(verify_properties(&set, &VerifyOptions::default())?)
    } else {
        None
    };
    print_line(&format!(
        "lambda build: N = {}, {} modes, verification {}",
        cfg.n,
        set.len(),
        report.as_ref().map_or("skipped".to_string(), |r| if r.all_pass() {
            "pass".into()
        } else {
            format!("fail {:?}", r.failing())
        })
    ));
    out.json(
        "lambda_set.json",
        &SetReport {
            set: set_value(&set),
            verification: report.as_ref(),
        },
    )
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaVerifyConfig {
    pub set: SetRef,
    #[serde(default)]
    pub exhaustive: bool,
    #[serde(default)]
    pub budget: Option<u128>,
}

pub fn run_lambda_verify(cfg: &LambdaVerifyConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let set = cfg.set.load()?;
    let mut opts = VerifyOptions::default();
    if let Some(b) = cfg.budget {
        opts.budget = b;
    }
    let report = if cfg.exhaustive {
        verify_properties_exhaustive(&set, &opts)?
    } else {
        verify_properties(&set, &opts)?
    };
    out.json("verify.json", &report)?;
    if report.all_pass() {
        print_line(&format!(
            "lambda verify: all properties pass ({} modes, scanner {})",
            report.modes, report.scanner
        ));
        Ok(())
    } else {
        Err(CliError::Check(format!("properties fail: {:?}", report.failing())))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaScaleConfig {
    pub set: SetRef,
    /// Explicit (p, q); otherwise the first ψ-convergent of ω is used.
    #[serde(default)]
    pub scaling: Option<(i64, i64)>,
    #[serde(default = "default_omega")]
    pub omega: OmegaSpec,
    #[serde(default)]
    pub profile: Option<ApproxProfile>,
    #[serde(default = "default_depth")]
    pub max_depth: usize,
}

fn default_depth() -> usize {
    40
}

#[derive(Serialize)]
struct ScaleReport {
    set: serde_json::Value,
    p: i64,
    q: i64,
    radius: nls_cascade::lambda_set::RadiusBracket,
    l1_lower: Option<f64>,
    l1_hypothesis: Option<nls_cascade::normal_form::L1Hypothesis>,
}

pub fn run_lambda_scale(cfg: &LambdaScaleConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let base = load_set(&cfg.set.path)?;
    let (p, q) = match cfg.scaling {
        Some(pq) => pq,
        None => {
            let profile = cfg.profile.clone().unwrap_or_else(|| ApproxProfile::log(1));
            let c = select_convergent(&cfg.omega, &profile, |_, _| true, cfg.max_depth)?;
            let p = i64::try_from(&c.p).map_err(|_| CliError::Config("convergent numerator exceeds i64".into()))?;
            let q = i64::try_from(&c.q).map_err(|_| CliError::Config("convergent denominator exceeds i64".into()))?;
            (p, q)
        }
    };
    let set = scale_set(base.base(), p, q)?;
    let l1 = compute_l1(&set, &RSquared::from_omega(&cfg.omega))
        .ok()
        .map(|e| e.value.bounds().0)
        .map(|b| nls_cascade::scalar::ratio_to_f64(&b));
    let hyp = check_l1_hypothesis(&set, &cfg.omega).ok();
    print_line(&format!("lambda scale: (p, q) = ({p}, {q}), L1 ≥ {:?}", l1));
    out.json(
        "lambda_set.json",
        &ScaleReport {
            set: set_value(&set),
            p,
            q,
            radius: radius_bracket(&set),
            l1_lower: l1,
            l1_hypothesis: hyp,
        },
    )
}

// ---------------------------------------------------------------- toy

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToyRunConfig {
    pub n: usize,
    /// Initial amplitudes as [re, im]; defaults to all mass on `pure_generation`.
    pub initial: Option<Vec<[f64; 2]>>,
    pub pure_generation: usize,
    pub t_end: f64,
    pub ode: OdeConfig,
    pub stride: usize,
}

impl Default for ToyRunConfig {
    fn default() -> Self {
        ToyRunConfig {
            n: 5,
            initial: None,
            pure_generation: 0,
            t_end: 100.0,
            ode: OdeConfig::default(),
            stride: 10,
        }
    }
}

#[derive(Serialize)]
struct ToyReport {
    n: usize,
    t_end: f64,
    drift: nls_cascade::toy_model::Drift,
    stats: nls_cascade::ode::OdeStats,
    final_state: Vec<[f64; 2]>,
}

fn to_pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|x| [x.re, x.im]).collect()
}

pub fn run_toy(cfg: &ToyRunConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let b0 = match &cfg.initial {
        Some(v) => {
            if v.len() != cfg.n {
                return Err(CliError::Config(format!("initial has {} entries, n = {}", v.len(), cfg.n)));
            }
            ToyState::new(v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
        }
        None => {
            if cfg.pure_generation >= cfg.n {
                return Err(CliError::Config("pure_generation out of range".into()));
            }
            ToyState::pure(cfg.n, cfg.pure_generation)
        }
    };
    let traj = integrate_toy(&b0, cfg.t_end, &cfg.ode)?;
    out.csv("toy_trajectory.csv", |w| write_toy_csv(w, &traj, cfg.stride))?;
    print_line(&format!(
        "toy run: mass drift {:.2e}, energy drift {:.2e}",
        traj.drift.mass, traj.drift.energy
    ));
    out.json(
        "toy_summary.json",
        &ToyReport {
            n: cfg.n,
            t_end: cfg.t_end,
            drift: traj.drift,
            stats: traj.stats(),
            final_state: to_pairs(traj.final_state()),
        },
    )
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToyTransferConfig {
    pub n: usize,
    pub delta: f64,
    pub search: TransferConfig,
    pub stride: usize,
}

impl Default for ToyTransferConfig {
    fn default() -> Self {
        ToyTransferConfig {
            n: 5,
            delta: 1e-2,
            search: TransferConfig::default(),
            stride: 10,
        }
    }
}

pub fn run_toy_transfer(cfg: &ToyTransferConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let orbit = find_transfer_orbit(cfg.n, cfg.delta, &cfg.search)?;
    let traj = integrate_toy(&orbit.initial_state(), orbit.t0.max(1e-12), &OdeConfig::with_tol(cfg.search.tol))?;
    out.csv("transfer_trajectory.csv", |w| write_toy_csv(w, &traj, cfg.stride))?;
    print_line(&format!(
        "toy transfer: N = {}, T0 = {:.4}, concentration {:.3} on generation {}",
        orbit.n,
        orbit.t0,
        orbit.target_concentration,
        orbit.target + 1
    ));
    out.json("transfer.json", &orbit)
}

// ---------------------------------------------------------------- nf

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NfConfig {
    pub set: SetRef,
    #[serde(default = "default_omega")]
    pub omega: OmegaSpec,
    #[serde(default)]
    pub normalization: Normalization,
}

#[derive(Serialize)]
struct NfReport {
    terms: usize,
    max_coefficient: f64,
    l1_hypothesis: Option<nls_cascade::normal_form::L1Hypothesis>,
}

pub fn run_nf_build(cfg: &NfConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let set = cfg.set.load()?;
    let f = build_f::<f64>(&set, &cfg.omega, cfg.normalization)?;
    out.csv("f_terms.csv", |w| f.write_csv(w))?;
    print_line(&format!(
        "nf build: {} terms, max |coefficient| {:.3e}",
        f.len(),
        f.max_coefficient()
    ));
    out.json(
        "nf_summary.json",
        &NfReport {
            terms: f.len(),
            max_coefficient: f.max_coefficient(),
            l1_hypothesis: check_l1_hypothesis(&set, &cfg.omega).ok(),
        },
    )
}

#[derive(Serialize)]
struct NfCheckReport {
    float: nls_cascade::normal_form::Residual,
    exact: Option<nls_cascade::normal_form::Residual>,
}

pub fn run_nf_check(cfg: &NfConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let set = cfg.set.load()?;
    let ff = build_f::<f64>(&set, &cfg.omega, cfg.normalization)?;
    let float = homological_residual(&ff, &set, &cfg.omega)?;
    let exact = match cfg.omega.exact() {
        Some(_) => {
            let fe = build_f::<QuadSurd>(&set, &cfg.omega, cfg.normalization)?;
            Some(homological_residual(&fe, &set, &cfg.omega)?)
        }
        None => None,
    };
    let report = NfCheckReport { float, exact };
    out.json("nf_check.json", &report)?;
    print_line(&format!(
        "nf check: float residual {:.3e}, exact nonzero terms {:?}",
        report.float.max_abs,
        report.exact.as_ref().map(|r| r.nonzero)
    ));
    match &report.exact {
        Some(r) if r.nonzero > 0 => Err(CliError::Check(format!("exact residual has {} nonzero terms", r.nonzero))),
        _ => Ok(()),
    }
}

// ---------------------------------------------------------------- nls

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlsRunConfig {
    pub set: SetRef,
    #[serde(default = "default_omega")]
    pub omega: OmegaSpec,
    /// Defaults to a box of three times the largest coordinate of Λ.
    #[serde(default)]
    pub region: Option<RegionSpec>,
    /// Per-generation toy amplitudes, lifted to Λ and divided by `lambda`.
    pub initial: Vec<[f64; 2]>,
    #[serde(default = "one")]
    pub lambda: f64,
    pub t_end: f64,
    #[serde(default)]
    pub ode: OdeConfig,
    #[serde(default = "ten")]
    pub stride: usize,
    #[serde(default = "yes")]
    pub nonlinear: bool,
}

fn one() -> f64 {
    1.0
}
fn ten() -> usize {
    10
}
fn yes() -> bool {
    true
}

#[derive(Serialize)]
struct NlsReport {
    modes: usize,
    interactions: usize,
    drift: nls_cascade::nls_sim::NlsDrift,
    stats: nls_cascade::ode::OdeStats,
}

pub fn run_nls(cfg: &NlsRunConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let set = cfg.set.load()?;
    if cfg.initial.len() != set.n_generations() {
        return Err(CliError::Config(format!(
            "initial has {} entries, N = {}",
            cfg.initial.len(),
            set.n_generations()
        )));
    }
    if cfg.lambda <= 0.0 {
        return Err(CliError::Config("lambda must be positive".into()));
    }
    let region = match &cfg.region {
        Some(r) => TruncationRegion::new(r.clone(), &set)?,
        None => TruncationRegion::default_box(&set)?,
    };
    let mut system = NlsSystem::<f64>::new(&region, &cfg.omega);
    system.nonlinear = cfg.nonlinear;
    let spouse = SpouseSystem::new(&set)?;
    let b: Vec<Complex64> = cfg.initial.iter().map(|[re, im]| Complex64::new(*re, *im) / cfg.lambda).collect();
    let lifted = spouse.lift(&b);
    let state = SparseFourierState::from_pairs(cfg.omega.clone(), Frame::Gauged, spouse.modes().iter().copied().zip(lifted));
    let traj = integrate_nls(&state, cfg.t_end, &system, &cfg.ode, cfg.stride)?;
    out.csv("nls_trajectory.csv", |w| write_nls_csv(w, &traj, &system, &set))?;
    print_line(&format!(
        "nls run: {} modes, drift mass {:.2e} H {:.2e} momentum {:.2e}",
        system.dim(),
        traj.drift.mass,
        traj.drift.hamiltonian,
        traj.drift.momentum
    ));
    out.json(
        "nls_summary.json",
        &NlsReport {
            modes: system.dim(),
            interactions: region.n_interactions(),
            drift: traj.drift,
            stats: traj.stats,
        },
    )
}

// ---------------------------------------------------------------- shadow

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceOrbit {
    pub b0: Vec<[f64; 2]>,
    pub t0: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowCliConfig {
    pub set: SetRef,
    #[serde(default = "default_omega")]
    pub omega: OmegaSpec,
    /// Reference toy orbit; searched for with `search` when absent.
    #[serde(default)]
    pub orbit: Option<ReferenceOrbit>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "first_transfer")]
    pub search: TransferConfig,
    #[serde(default)]
    pub shadow: ShadowConfig,
}

fn default_delta() -> f64 {
    1e-2
}

fn first_transfer() -> TransferConfig {
    TransferConfig {
        start: 0,
        target: Some(1),
        ..Default::default()
    }
}

fn reference_orbit(
    orbit: &Option<ReferenceOrbit>,
    n: usize,
    delta: f64,
    search: &TransferConfig,
) -> Result<(ToyState<f64>, f64, Option<TransferOrbit>), CliError> {
    match orbit {
        Some(o) => Ok((
            ToyState::new(o.b0.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()),
            o.t0,
            None,
        )),
        None => {
            let found = find_transfer_orbit(n, delta, search)?;
            Ok((found.initial_state(), found.t0, Some(found)))
        }
    }
}

pub fn run_shadow(cfg: &ShadowCliConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let ladder = &cfg.shadow.ladder;
    if ladder.is_empty() || ladder.windows(2).any(|w| w[1] <= w[0]) || ladder[0] <= 0.0 {
        return Err(CliError::Config("λ ladder must be positive and strictly increasing".into()));
    }
    let set = cfg.set.load()?;
    let (b0, t0, _) = reference_orbit(&cfg.orbit, set.n_generations(), cfg.delta, &cfg.search)?;
    let report = shadowing_experiment(&set, &cfg.omega, &b0, t0, &cfg.shadow)?;
    out.csv("z_terms.csv", |w| write_z_csv(w, &report))?;
    print_line(&format!(
        "shadow: errors {:?}, slope {:.3}, strictly decreasing {}",
        report.runs.iter().map(|r| format!("{:.3e}", r.sup_error)).collect::<Vec<_>>(),
        report.slope,
        report.strictly_decreasing
    ));
    out.json("shadow_report.json", &report)
}

// ---------------------------------------------------------------- growth

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub set: SetRef,
    #[serde(default = "two")]
    pub s: f64,
    #[serde(default)]
    pub orbit: Option<ReferenceOrbit>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub search: TransferConfig,
    #[serde(default = "samples")]
    pub samples: usize,
    #[serde(default)]
    pub ode: OdeConfig,
}

fn two() -> f64 {
    2.0
}
fn samples() -> usize {
    256
}

pub fn run_growth(cfg: &GrowthConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let set = cfg.set.load()?;
    let n = set.n_generations();
    let (b0, t0, found) = reference_orbit(&cfg.orbit, n, cfg.delta, &cfg.search)?;
    let (start, target) = match &found {
        Some(o) => (o.start, o.target),
        None => (cfg.search.start, cfg.search.target.unwrap_or(n.saturating_sub(2))),
    };
    let spouse = SpouseSystem::new(&set)?;
    let (traj, _) = integrate_spouse(&spouse, &spouse.lift(&b0.b), t0, &cfg.ode)?;
    let k = cfg.samples.max(2);
    let times: Vec<f64> = (0..k).map(|i| t0 * i as f64 / (k - 1) as f64).collect();
    let states: Vec<Vec<Complex64>> = times.iter().map(|t| traj.sample(*t)).collect();
    let report = growth_diagnostic(&set, spouse.modes(), &times, &states, cfg.s, start, target)?;
    out.csv("growth.csv", |w| write_growth_csv(w, &report))?;
    print_line(&format!(
        "growth: ratio {:.4e}, S_target/S_start {:.4e}",
        report.ratio, report.expected
    ));
    out.json("growth.json", &report)
}

// ---------------------------------------------------------------- params

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    /// The growth factor 𝓒 as a decimal integer.
    pub c: String,
    pub mu: f64,
    /// s as a rational or decimal string.
    pub s: String,
    pub profile: ApproxProfile,
    pub epsilon: f64,
    pub constants: ScaleConstants,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig {
            c: "1000000".into(),
            mu: 1.0,
            s: "2".into(),
            profile: ApproxProfile::log(1),
            epsilon: 0.1,
            constants: ScaleConstants::default(),
        }
    }
}

pub fn run_params(cfg: &ParamsConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let c: BigUint = cfg
        .c
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("C = {:?} is not a positive integer", cfg.c)))?;
    let s = parse_rational(&cfg.s)?;
    let report = paper_scale_params(&c, cfg.mu, &s, &cfg.profile, cfg.epsilon, &cfg.constants)?;
    print_line(&format!("params: N = {}, ln λ = 5^{} = {}", report.n, report.n, report.ln_lambda));
    out.json("params.json", &report)
}
