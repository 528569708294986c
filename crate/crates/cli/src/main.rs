//! `nlslab`: command-line driver for the cascade experiments.

mod commands;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use nls_cascade::ErrorClass;
use output::RunOutput;

pub const ENV_OUT_DIR: &str = "NLSLAB_OUT_DIR";
pub const ENV_THREADS: &str = "NLSLAB_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error(transparent)]
    Core(#[from] nls_cascade::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Check(_) => 3,
            CliError::Core(e) => match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Numeric => 3,
                ErrorClass::Search => 4,
                ErrorClass::Precision => 5,
            },
        }
    }
}

#[derive(Parser)]
#[command(name = "nlslab", version, about = "Energy-cascade experiments for cubic NLS on irrational tori")]
struct Cli {
    /// Output directory; overrides NLSLAB_OUT_DIR.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; overrides NLSLAB_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Continued fraction, convergents and bracket checks for ω.
    Cf(ConfigArg),
    /// Frequency sets.
    #[command(subcommand)]
    Lambda(LambdaCmd),
    /// Toy model runs and transfer-orbit search.
    #[command(subcommand)]
    Toy(ToyCmd),
    /// Normal-form generating function.
    #[command(subcommand)]
    Nf(NfCmd),
    /// Truncated NLS runs.
    #[command(subcommand)]
    Nls(NlsCmd),
    /// λ-ladder shadowing experiment.
    Shadow(ConfigArg),
    /// Sobolev-norm growth along a transfer orbit.
    Growth(ConfigArg),
    /// Asymptotic-regime parameter calculator.
    Params(ConfigArg),
    /// Re-runs the command recorded in a manifest.
    Replay { manifest: PathBuf },
}

#[derive(Subcommand)]
enum LambdaCmd {
    Build(ConfigArg),
    Verify(ConfigArg),
    Scale(ConfigArg),
}

#[derive(Subcommand)]
enum ToyCmd {
    Run(ConfigArg),
    Transfer(ConfigArg),
}

#[derive(Subcommand)]
enum NfCmd {
    Build(ConfigArg),
    Check(ConfigArg),
}

#[derive(Subcommand)]
enum NlsCmd {
    Run(ConfigArg),
}

#[derive(clap::Args)]
struct ConfigArg {
    /// JSON config; defaults apply when omitted (where the command has them).
    #[arg(long, short)]
    config: Option<PathBuf>,
}

fn read_config(path: &Option<PathBuf>) -> Result<serde_json::Value, CliError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
        None => Ok(serde_json::Value::Object(Default::default())),
    }
}

/// Parses and validates a config, returning it with its normalized JSON.
fn parse<T: DeserializeOwned + Serialize>(raw: serde_json::Value) -> Result<(T, serde_json::Value), CliError> {
    let cfg: T = serde_json::from_value(raw).map_err(|e| CliError::Config(e.to_string()))?;
    let normalized = serde_json::to_value(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    Ok((cfg, normalized))
}

fn run_with<T, F>(name: &str, raw: serde_json::Value, out_dir: &Path, seed: impl Fn(&T) -> Option<u64>, body: F) -> Result<(), CliError>
where
    T: DeserializeOwned + Serialize,
    F: FnOnce(&T, &mut RunOutput) -> Result<(), CliError>,
{
    let (cfg, normalized) = parse::<T>(raw)?;
    let mut out = RunOutput::new(out_dir, name, normalized, seed(&cfg))?;
    body(&cfg, &mut out)?;
    let manifest = out.finish()?;
    println!("manifest: {}", manifest.display());
    Ok(())
}

fn no_seed<T>(_: &T) -> Option<u64> {
    None
}

fn dispatch(name: &str, raw: serde_json::Value, out_dir: &Path) -> Result<(), CliError> {
    use commands::*;
    match name {
        "cf" => run_with::<CfConfig, _>(name, raw, out_dir, no_seed, run_cf),
        "lambda build" => run_with::<LambdaBuildConfig, _>(name, raw, out_dir, |c| Some(c.seed), run_lambda_build),
        "lambda verify" => run_with::<LambdaVerifyConfig, _>(name, raw, out_dir, no_seed, run_lambda_verify),
        "lambda scale" => run_with::<LambdaScaleConfig, _>(name, raw, out_dir, no_seed, run_lambda_scale),
        "toy run" => run_with::<ToyRunConfig, _>(name, raw, out_dir, no_seed, run_toy),
        "toy transfer" => run_with::<ToyTransferConfig, _>(name, raw, out_dir, no_seed, run_toy_transfer),
        "nf build" => run_with::<NfConfig, _>(name, raw, out_dir, no_seed, run_nf_build),
        "nf check" => run_with::<NfConfig, _>(name, raw, out_dir, no_seed, run_nf_check),
        "nls run" => run_with::<NlsRunConfig, _>(name, raw, out_dir, no_seed, run_nls),
        "shadow" => run_with::<ShadowCliConfig, _>(name, raw, out_dir, no_seed, run_shadow),
        "growth" => run_with::<GrowthConfig, _>(name, raw, out_dir, no_seed, run_growth),
        "params" => run_with::<ParamsConfig, _>(name, raw, out_dir, no_seed, run_params),
        other => Err(CliError::Config(format!("unknown command {other:?}"))),
    }
}

fn replay(path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let command = doc
        .get("command")
        .and_then(|c| c.as_str())
        .ok_or_else(|| CliError::Config("manifest has no command".into()))?;
    let config = doc
        .get("config")
        .cloned()
        .ok_or_else(|| CliError::Config("manifest has no config".into()))?;
    dispatch(command, config, out_dir)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => match std::env::var(ENV_THREADS) {
            Ok(v) => Some(
                v.parse()
                    .map_err(|_| CliError::Config(format!("{ENV_THREADS}={v:?} is not a count")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let out_dir = cli
        .out
        .or_else(|| std::env::var_os(ENV_OUT_DIR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("nlslab-out"));
    let (name, arg) = match &cli.command {
        Command::Cf(a) => ("cf", a),
        Command::Lambda(LambdaCmd::Build(a)) => ("lambda build", a),
        Command::Lambda(LambdaCmd::Verify(a)) => ("lambda verify", a),
        Command::Lambda(LambdaCmd::Scale(a)) => ("lambda scale", a),
        Command::Toy(ToyCmd::Run(a)) => ("toy run", a),
        Command::Toy(ToyCmd::Transfer(a)) => ("toy transfer", a),
        Command::Nf(NfCmd::Build(a)) => ("nf build", a),
        Command::Nf(NfCmd::Check(a)) => ("nf check", a),
        Command::Nls(NlsCmd::Run(a)) => ("nls run", a),
        Command::Shadow(a) => ("shadow", a),
        Command::Growth(a) => ("growth", a),
        Command::Params(a) => ("params", a),
        Command::Replay { manifest } => return replay(manifest, &out_dir),
    };
    dispatch(name, read_config(&arg.config)?, &out_dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nlslab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
