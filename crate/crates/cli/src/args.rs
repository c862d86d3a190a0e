use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geophase_core::Beam;

#[derive(Debug, Parser)]
#[command(
    name = "geophase",
    version,
    about = "Off-diagonal geometric phase toolkit for polarized neutron interferometry"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Off-diagonal phase over a θ × α grid, with the fitted phase of the
    /// mixed-polarization pipeline when --pol-fraction < 1.
    #[command(allow_negative_numbers = true)]
    PhaseSweep(PhaseSweepArgs),
    /// Synthesize rotated and reference interferograms and fit their phase shift.
    #[command(allow_negative_numbers = true)]
    Interferogram(InterferogramArgs),
    /// O-beam and H-beam visibilities versus α.
    #[command(allow_negative_numbers = true)]
    Eraser(EraserArgs),
    /// Compare Poincaré-sphere solid angles with the algebraic phases.
    #[command(allow_negative_numbers = true)]
    GeometryCheck(GeometryArgs),
    /// Fit a measured interferogram against its reference.
    Fit(FitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BeamArg {
    O,
    H,
}

impl From<BeamArg> for Beam {
    fn from(b: BeamArg) -> Beam {
        match b {
            BeamArg::O => Beam::O,
            BeamArg::H => Beam::H,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Fraction of the incident beam in the prepared spin state.
    #[arg(long = "pol-fraction", default_value_t = 1.0)]
    pub pol_fraction: f64,
    /// Instrument contrast applied to the oscillation amplitude.
    #[arg(long, default_value_t = 1.0)]
    pub contrast: f64,
}

#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    /// Expected counts at unit relative intensity.
    #[arg(long, default_value_t = 1.0)]
    pub counts: f64,
    /// Seed for Poisson counting noise; noise-free when absent.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ChiArgs {
    #[arg(long = "chi-start", default_value_t = 0.0)]
    pub chi_start: f64,
    /// Exclusive end of the χ grid.
    #[arg(long = "chi-end", default_value_t = 720.0)]
    pub chi_end: f64,
    #[arg(long = "chi-steps", default_value_t = 32)]
    pub chi_steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct TableOutput {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct PhaseSweepArgs {
    /// Polar angle θ in degrees (repeatable).
    #[arg(long = "theta", required = true)]
    pub thetas: Vec<f64>,
    /// Rotation angle α in degrees (repeatable).
    #[arg(long = "alpha", required = true)]
    pub alphas: Vec<f64>,
    #[arg(long, value_enum, default_value_t = BeamArg::O)]
    pub beam: BeamArg,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub chi: ChiArgs,
    #[command(flatten)]
    pub output: TableOutput,
}

#[derive(Debug, Clone, Args)]
pub struct InterferogramArgs {
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = BeamArg::O)]
    pub beam: BeamArg,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub chi: ChiArgs,
    /// Directory receiving rotated.csv, reference.csv, their sidecars and
    /// fit_report.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EraserArgs {
    #[arg(long)]
    pub theta: f64,
    /// Rotation angle α in degrees (repeatable).
    #[arg(long = "alpha", required = true)]
    pub alphas: Vec<f64>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub chi: ChiArgs,
    #[command(flatten)]
    pub output: TableOutput,
}

#[derive(Debug, Clone, Args)]
pub struct GeometryArgs {
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub alpha: f64,
    /// Waypoints per arc.
    #[arg(long, default_value_t = geophase_core::DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Directory receiving geometry_report.json and the loop waypoint CSVs;
    /// the report goes to standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Interferogram CSV with the rotators on.
    pub input: PathBuf,
    /// Reference interferogram CSV.
    pub reference: PathBuf,
    /// Report file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
