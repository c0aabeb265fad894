//! `funnel`: command-line front end for the funnel-trap simulator.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "funnel", version, about = "Funnel-trap Duffing oscillator simulator")]
pub struct Cli {
    /// Parameter file (TOML). Built-in defaults are used when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "funnel-out")]
    pub out: PathBuf,
    /// Overrides the seed from the parameter file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Run every job on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Steady-state roots and their stability.
    Steady(SteadyArgs),
    /// Detuning sweeps with jump extraction.
    Sweep(SweepArgs),
    /// Three-stage amplification of the axial signal.
    Vibres(VibresArgs),
    /// Time-domain integration of the full or the envelope model.
    Integrate(IntegrateArgs),
    /// Bistable window against radial drive.
    BistableMap(MapArgs),
    /// Re-runs the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, serde::Serialize, serde::Deserialize)]
pub struct SteadyArgs {
    /// Detunings in Hz. Defaults to the configured detuning.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub detuning_hz: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
pub enum DirectionArg {
    Ascending,
    Descending,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
pub enum SweepModelArg {
    QuasiStatic,
    Envelope,
}

#[derive(Debug, Clone, Args, serde::Serialize, serde::Deserialize)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = DirectionArg::Both)]
    pub direction: DirectionArg,
    /// Lower end of the detuning range, Hz.
    #[arg(long, default_value_t = -40e3, allow_hyphen_values = true)]
    pub from_hz: f64,
    /// Upper end of the detuning range, Hz.
    #[arg(long, default_value_t = 3e3, allow_hyphen_values = true)]
    pub to_hz: f64,
    /// Step in Hz. Defaults to γ/20.
    #[arg(long)]
    pub step_hz: Option<f64>,
    /// Radial drives in zN. Defaults to the configured drive.
    #[arg(long, value_delimiter = ',')]
    pub drives_zn: Vec<f64>,
    #[arg(long, value_enum, default_value_t = SweepModelArg::QuasiStatic)]
    pub model: SweepModelArg,
    /// Dwell per step in s. Defaults to 20/γ.
    #[arg(long)]
    pub dwell_s: Option<f64>,
}

#[derive(Debug, Clone, Args, serde::Serialize, serde::Deserialize)]
pub struct VibresArgs {
    /// Stages to run.
    #[arg(long, value_delimiter = ',', default_value = "a,c,e")]
    pub stages: Vec<String>,
    /// Use the configured F_e instead of tuning it.
    #[arg(long)]
    pub fixed_fe: bool,
    /// Keep the configured detuning instead of centring on the bistable window.
    #[arg(long)]
    pub keep_detuning: bool,
    /// Number of F_e values in the tuning scan.
    #[arg(long, default_value_t = 41)]
    pub tune_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
pub enum ModelArg {
    Full,
    Envelope,
}

#[derive(Debug, Clone, Args, serde::Serialize, serde::Deserialize)]
pub struct IntegrateArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Envelope)]
    pub model: ModelArg,
    /// Integration time, s.
    #[arg(long, default_value_t = 10e-3)]
    pub duration_s: f64,
    /// Step, s. Defaults to 256 steps per radial period (full) or 64 per axial period (envelope).
    #[arg(long)]
    pub dt_s: Option<f64>,
    /// Keep every n-th step. Defaults to one sample per default-step period.
    #[arg(long)]
    #[arg(value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: Option<u64>,
}

#[derive(Debug, Clone, Args, serde::Serialize, serde::Deserialize)]
pub struct MapArgs {
    /// Radial drives in zN. Defaults to 0.5 zN steps up to 30 zN.
    #[arg(long, value_delimiter = ',')]
    pub drives_zn: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<funnel_core::Error>() {
        Some(e) if e.is_configuration() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
