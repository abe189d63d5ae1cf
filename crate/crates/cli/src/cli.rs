use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "windres",
    version,
    about = "Measure how lowering the temporal resolution of wind-speed data shifts its distribution and energy yield"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full pipeline and write every artifact to --out.
    Analyze(AnalyzeArgs),
    /// Block-average or subsample one series.
    Resample(ResampleArgs),
    /// Fit Weibull and/or generalized Gamma distributions.
    Fit(FitArgs),
    /// Two-sample Kolmogorov-Smirnov test between two series.
    Ks(KsArgs),
    /// Energy yield of a series through a power curve.
    Power(PowerArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Where a series comes from. Files starting with a `# start_time` header are
/// read as series files; anything else is parsed as raw observations and
/// reduced to complete days.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Native step of raw observations.
    #[arg(long, default_value = "10min")]
    pub base_step: String,
    /// Timestamp column of raw observation files (default: first column).
    #[arg(long)]
    pub time_column: Option<String>,
    /// Wind-speed column of raw observation files (default: second column).
    #[arg(long)]
    pub speed_column: Option<String>,
    /// chrono format string for timestamps (default: RFC 3339).
    #[arg(long)]
    pub time_format: Option<String>,
    /// Comma-separated missing-value markers (default: "", NaN, -999).
    #[arg(long, value_delimiter = ',')]
    pub missing: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_delimiter = ',', default_value = "3h,6h,1d")]
    pub resolutions: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "avg,inst")]
    pub modes: Vec<String>,
    #[arg(long)]
    pub power_curve: Option<PathBuf>,
    /// Series that differences and errors are measured against.
    #[arg(long, default_value = "base")]
    pub reference: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct ResampleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Block length in steps of the input.
    #[arg(long, conflicts_with = "resolution")]
    pub t: Option<usize>,
    /// Target resolution such as 3h; converted to a block length.
    #[arg(long)]
    pub resolution: Option<String>,
    #[arg(long, default_value = "avg")]
    pub mode: String,
    /// Output file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Distribution {
    Weibull,
    Gengamma,
    Both,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = Distribution::Both)]
    pub dist: Distribution,
    /// Fit monthly or coarser series despite the guard.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Second sample; read the same way as --input.
    #[arg(long)]
    pub other: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub power_curve: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the running energy total to this CSV.
    #[arg(long)]
    pub cumulative: Option<PathBuf>,
}
