use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "condent", version, about = "Conditional entanglement of open quantum systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Histograms of x = f/F over a grid of decay probabilities, with closed forms.
    Distribution(DistributionArgs),
    /// Mean conditional entanglement x̄(t) against time.
    Mean(MeanArgs),
    /// Disentanglement time of the Ornstein–Uhlenbeck channel over a grid of μ.
    Tau(TauArgs),
    /// Oracle, invariance, distribution and kernel checks; exit code 3 on failure.
    Verify(VerifyArgs),
    /// Scaling-law check on the discrete-mode oracle for random outcomes.
    Oracle(OracleArgs),
    /// Entanglement of conditional states predicted from Husimi values.
    Tomography(TomographyArgs),
    /// Re-runs the command recorded in a manifest.
    #[serde(skip)]
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Output {
    /// Output directory; tables go to stdout when neither this nor CONDENT_OUT_DIR is set.
    #[arg(long, env = "CONDENT_OUT_DIR")]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Sampling {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ConfigArg {
    /// System configuration (JSON).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DistributionArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub config: ConfigArg,
    /// Decay probabilities.
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75")]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    /// Upper edge of the histogram; defaults to the largest finite support edge on the grid.
    #[arg(long)]
    pub x_max: Option<f64>,
    #[command(flatten)]
    pub sampling: Sampling,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MeanArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub config: ConfigArg,
    #[arg(long, default_value_t = 5.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
    /// Values of ω̄ = ω_d/Δ² replacing the cutoff of a dephasing channel.
    #[arg(long, value_delimiter = ',')]
    pub omega_bar: Vec<f64>,
    #[command(flatten)]
    pub sampling: Sampling,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TauArgs {
    /// Explicit μ values; overrides the geometric grid.
    #[arg(long, value_delimiter = ',')]
    pub mu: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub mu_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub mu_max: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteArg {
    Oracle,
    Invariance,
    Distribution,
    Kernels,
    All,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 5)]
    pub instances: usize,
    /// Multiplies the predicted scaling function; for fault injection only.
    #[arg(long, default_value_t = 1.0, hide = true)]
    pub f_scale: f64,
    #[command(flatten)]
    pub sampling: Sampling,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathShape {
    /// Flat couplings g² = Δω/(2π).
    Flat,
    /// Couplings sampling a Lorentzian spectral density.
    Lorentzian,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BathArgs {
    #[arg(long, value_enum, default_value = "flat")]
    pub bath: BathShape,
    #[arg(long, default_value_t = 2)]
    pub modes: usize,
    #[arg(long, default_value_t = 1.0)]
    pub spacing: f64,
    /// Lorentzian width; defaults to the channel's ω_d.
    #[arg(long)]
    pub omega_d: Option<f64>,
    #[arg(long, default_value_t = 4)]
    pub fock_cutoff: usize,
    #[arg(long, default_value_t = 0.8)]
    pub time: f64,
    #[arg(long, default_value_t = 10)]
    pub outcomes: usize,
    /// Standard deviation of the random outcome amplitudes.
    #[arg(long, default_value_t = 0.8)]
    pub scale: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OracleArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub bath: BathArgs,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TomographyArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub bath: BathArgs,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Default)]
pub struct RerunArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    #[arg(long, env = "CONDENT_OUT_DIR")]
    pub out: Option<PathBuf>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Distribution(_) => "distribution",
            Self::Mean(_) => "mean",
            Self::Tau(_) => "tau",
            Self::Verify(_) => "verify",
            Self::Oracle(_) => "oracle",
            Self::Tomography(_) => "tomography",
            Self::Rerun(_) => "rerun",
        }
    }

    pub fn config_path(&self) -> Option<&PathBuf> {
        match self {
            Self::Distribution(a) => a.config.config.as_ref(),
            Self::Mean(a) => a.config.config.as_ref(),
            Self::Oracle(a) => a.config.config.as_ref(),
            Self::Tomography(a) => a.config.config.as_ref(),
            _ => None,
        }
    }

    pub fn output(&self) -> Option<&Output> {
        match self {
            Self::Distribution(a) => Some(&a.output),
            Self::Mean(a) => Some(&a.output),
            Self::Tau(a) => Some(&a.output),
            Self::Verify(a) => Some(&a.output),
            Self::Oracle(a) => Some(&a.output),
            Self::Tomography(a) => Some(&a.output),
            Self::Rerun(_) => None,
        }
    }

    pub fn output_mut(&mut self) -> Option<&mut Output> {
        match self {
            Self::Distribution(a) => Some(&mut a.output),
            Self::Mean(a) => Some(&mut a.output),
            Self::Tau(a) => Some(&mut a.output),
            Self::Verify(a) => Some(&mut a.output),
            Self::Oracle(a) => Some(&mut a.output),
            Self::Tomography(a) => Some(&mut a.output),
            Self::Rerun(_) => None,
        }
    }
}
