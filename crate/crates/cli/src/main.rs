//! `qfpsim`: tables for gate metrics, lattice spectra, potentials and nuclei.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qfpsim::io::OutputFormat;
use qfpsim::Error;

#[derive(Parser, Debug)]
#[command(name = "qfpsim", version, about = "Frequency-bin photonic VQE simulator")]
struct Cli {
    /// Table format on stdout and in the output directory.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,

    /// Also write every table, transcript and plot file here.
    #[arg(long, env = "QFPSIM_OUT", global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    JsonLines,
    GnuplotData,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::JsonLines => OutputFormat::JsonLines,
            Format::GnuplotData => OutputFormat::GnuplotData,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Beamsplitter metrics versus modulation depth.
    GateMetrics(GateArgs),
    /// One static-charge configuration: basis, spectrum, local observables.
    Schwinger(SchwingerArgs),
    /// Ground energies of the whole static-charge study set.
    Energies(EnergiesArgs),
    /// Potentials, fits, contact matching and radii from an energy table.
    Analyze(AnalyzeArgs),
    /// Ingested nuclear Hamiltonians and model-space extrapolation.
    Nuclear(NuclearArgs),
    /// S-wave NN phase shifts of the separable contact potential.
    PhaseShift(PhaseArgs),
}

#[derive(Args, Debug)]
pub struct GateArgs {
    /// Modulation depths, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Vec<f64>,
    /// `start:stop:step`, inclusive of both ends.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long, default_value_t = 32)]
    pub sidebands: i64,
}

#[derive(Args, Debug, Clone)]
pub struct NoiseArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Half-width of the per-run relative systematic error.
    #[arg(long, default_value_t = 0.0)]
    pub systematic: f64,
    /// Gaussian sigma on each normalized power reading.
    #[arg(long, default_value_t = 0.0)]
    pub statistical: f64,
    #[arg(long, default_value_t = 50)]
    pub iterations: usize,
    /// Iterations averaged for the reported value.
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    /// Gradient step; defaults to 1/‖H‖.
    #[arg(long)]
    pub step: Option<f64>,
    /// Read pairs out through the modulator beamsplitter at this depth
    /// instead of an ideal splitter.
    #[arg(long)]
    pub gate_depth: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SchwingerArgs {
    /// Fermion sites of the static charges, e.g. `0,2`; empty for vacuum.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    pub charges: String,
    /// Electric-energy cutoff; defaults to the study-set value.
    #[arg(long)]
    pub lambda: Option<i32>,
    /// `auto`, `none`, or a list of `p`, `cp`, `momentum`.
    #[arg(long, default_value = "auto")]
    pub project: String,
    /// Reflection axis for `p` / `cp`.
    #[arg(long)]
    pub axis: Option<usize>,
    #[arg(long, conflicts_with = "vqe")]
    pub exact: bool,
    #[arg(long)]
    pub vqe: bool,
    #[arg(long, default_value_t = 0.6)]
    pub x: f64,
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
    #[command(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Args, Debug)]
pub struct EnergiesArgs {
    #[arg(long)]
    pub vqe: bool,
    #[command(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum FitChoice {
    Qq,
    Qqbar,
    Both,
    None,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// CSV with columns config,value,stat_sigma,sys_sigma.
    pub table: PathBuf,
    #[arg(long, value_enum, default_value_t = FitChoice::Both)]
    pub fit: FitChoice,
    /// Heavy-meson mass for the contact matching.
    #[arg(long, default_value_t = 4.5)]
    pub m_h_eft: f64,
    #[arg(long, default_value_t = 10_000)]
    pub resamples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Charge and field-energy radii from the exact one-charge profile.
    #[arg(long)]
    pub radii: bool,
    #[arg(long, default_value_t = 8)]
    pub sites: usize,
}

#[derive(Args, Debug)]
pub struct NuclearArgs {
    /// Directory of `*.mat` matrices with `*.toml` sidecars.
    pub dir: PathBuf,
    #[arg(long)]
    pub vqe: bool,
    #[arg(long)]
    pub extrapolate: bool,
    #[arg(long, default_value_t = 10_000)]
    pub replicas: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 25)]
    pub iterations: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum ChannelChoice {
    Singlet,
    Triplet,
    Both,
}

#[derive(Args, Debug)]
pub struct PhaseArgs {
    #[arg(long, value_enum, default_value_t = ChannelChoice::Both)]
    pub channel: ChannelChoice,
    #[arg(long, default_value_t = 300.0)]
    pub p_max: f64,
    #[arg(long, default_value_t = 10.0)]
    pub p_step: f64,
}

/// Process exit status per error class.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => 3,
        Error::MissingEntry(_) => 4,
        Error::InvalidArgument(_)
        | Error::Dimension { .. }
        | Error::InvalidMask { .. }
        | Error::Truncation { .. }
        | Error::ChannelParity(_)
        | Error::OutOfRange { .. }
        | Error::Asymmetric(_) => 5,
        Error::Divergence { .. }
        | Error::FitFailure(_)
        | Error::ExtrapolationInvalid(_)
        | Error::DomainTooSmall(_)
        | Error::Normalization { .. } => 6,
        Error::Consistency { .. } | Error::SymmetryViolation(_) | Error::IncompleteMeasurement(..) => 7,
        Error::Io(_) => 8,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut out = output::Output::new(cli.format.into(), cli.out.clone());
    let res = match &cli.command {
        Command::GateMetrics(a) => commands::gate_metrics(a, &mut out),
        Command::Schwinger(a) => commands::schwinger(a, &mut out),
        Command::Energies(a) => commands::energies(a, &mut out),
        Command::Analyze(a) => commands::analyze(a, &mut out),
        Command::Nuclear(a) => commands::nuclear(a, &mut out),
        Command::PhaseShift(a) => commands::phase_shift(a, &mut out),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
