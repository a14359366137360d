use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fpcal::fuzzy::DEFAULT_OVERLAP;
use fpcal::TrainingConfig;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "fpcal",
    version,
    about = "Calibrate function point weights against project effort data",
    arg_required_else_help = true,
    args_override_self = true
)]
pub struct Cli {
    /// TOML file with default flag values: top-level keys for global flags,
    /// one table per subcommand. Command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Master seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Write the primary output here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Human-readable tables instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,

    /// Run manifest path. Defaults to `<out>.manifest.json`, or stderr
    /// when writing to stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic project dataset.
    Synth(SynthArgs),
    /// Keep the records that pass the repository quality filter.
    Filter(FilterArgs),
    /// Fit the power-law effort model.
    Fit(FitArgs),
    /// Calibrate the 15 UFP weights on a dataset.
    Calibrate(CalibrateArgs),
    /// Repeated train/test experiments comparing original and calibrated weights.
    Validate(ValidateArgs),
    /// Classify a component, or size and estimate a project.
    Estimate(EstimateArgs),
    /// Crisp and fuzzy weight of one component, or a weight surface.
    FuzzyWeight(FuzzyWeightArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Filter(_) => "filter",
            Command::Fit(_) => "fit",
            Command::Calibrate(_) => "calibrate",
            Command::Validate(_) => "validate",
            Command::Estimate(_) => "estimate",
            Command::FuzzyWeight(_) => "fuzzy-weight",
        }
    }
}

pub const SUBCOMMANDS: [&str; 7] = [
    "synth",
    "filter",
    "fit",
    "calibrate",
    "validate",
    "estimate",
    "fuzzy-weight",
];

/// Project dataset input shared by the data-driven subcommands.
#[derive(Debug, Args, Serialize)]
pub struct DataArgs {
    /// Project CSV file.
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,

    /// Apply the repository quality filter before use.
    #[arg(long)]
    pub isbsg_filter: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct WeightArgs {
    /// `original`, or a weight CSV (`kind,level,weight`).
    #[arg(long, default_value = "original", value_name = "original|FILE")]
    pub weights: String,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainingArgs {
    #[arg(long, default_value_t = TrainingConfig::default().learning_rate)]
    pub learning_rate: f64,

    #[arg(long, default_value_t = TrainingConfig::default().max_epochs)]
    pub max_epochs: usize,

    /// Relative loss decrease below which training stops.
    #[arg(long, default_value_t = TrainingConfig::default().convergence_tol)]
    pub tol: f64,

    /// Outlier threshold in residual standard deviations (`inf` disables).
    #[arg(long, default_value_t = TrainingConfig::default().outlier_sigma)]
    pub outlier_sigma: f64,

    #[arg(long, default_value_t = TrainingConfig::default().min_weight)]
    pub min_weight: f64,
}

impl TrainingArgs {
    pub fn to_config(&self, seed: u64) -> TrainingConfig {
        TrainingConfig {
            learning_rate: self.learning_rate,
            max_epochs: self.max_epochs,
            convergence_tol: self.tol,
            outlier_sigma: self.outlier_sigma,
            min_weight: self.min_weight,
            seed,
        }
    }
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 184)]
    pub n: usize,

    /// True coefficient A.
    #[arg(long, default_value_t = 10.0)]
    pub a: f64,

    /// True exponent B.
    #[arg(long, default_value_t = 0.9)]
    pub b: f64,

    /// Standard deviation of the lognormal effort noise.
    #[arg(long, default_value_t = 0.3)]
    pub noise: f64,

    /// Smallest count per breakdown cell.
    #[arg(long, default_value_t = 0)]
    pub count_min: u32,

    /// Largest count per breakdown cell.
    #[arg(long, default_value_t = 20)]
    pub count_max: u32,

    #[command(flatten)]
    #[serde(flatten)]
    pub weights: WeightArgs,

    /// Scale each true weight by a factor drawn from `[1-p, 1+p]`.
    #[arg(long, default_value_t = 0.0)]
    pub perturb: f64,

    /// Also write the true weights used by the generator.
    #[arg(long, value_name = "FILE")]
    pub true_weights_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct FilterArgs {
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct FitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub weights: WeightArgs,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct CalibrateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,

    /// Starting weights.
    #[command(flatten)]
    #[serde(flatten)]
    pub weights: WeightArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub training: TrainingArgs,

    /// Effort model JSON (`fit` output). Fitted on the data when omitted.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,

    /// Output format of the primary output.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Also write the calibrated weights as a loadable weight CSV.
    #[arg(long, value_name = "FILE")]
    pub weights_out: Option<PathBuf>,

    /// Also write the loss history as `epoch,loss` CSV.
    #[arg(long, value_name = "FILE")]
    pub history_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct ValidateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub weights: WeightArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub training: TrainingArgs,

    #[arg(long, default_value_t = 5)]
    pub experiments: usize,

    #[arg(long, default_value_t = 100)]
    pub train_size: usize,

    /// Run experiments in parallel (same results).
    #[arg(long)]
    pub parallel: bool,

    /// Per-experiment MMRE table as CSV.
    #[arg(long, value_name = "FILE")]
    pub mmre_csv: Option<PathBuf>,

    /// Average PRED table as CSV.
    #[arg(long, value_name = "FILE")]
    pub pred_csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct EstimateArgs {
    /// Component kind (EI, EO, EQ, ILF, EIF) for single-component mode.
    #[arg(long, requires_all = ["det", "records"], conflicts_with_all = ["breakdown", "components"])]
    pub kind: Option<String>,

    #[arg(long, requires = "kind")]
    pub det: Option<u32>,

    /// RETs for ILF/EIF, FTRs for EI/EO/EQ.
    #[arg(long, requires = "kind")]
    pub records: Option<u32>,

    /// Breakdown counts such as `ei_low=3,ilf_avg=2`.
    #[arg(long, conflicts_with = "components")]
    pub breakdown: Option<String>,

    /// Component inventory CSV (`kind,det,records`).
    #[arg(long, value_name = "FILE")]
    pub components: Option<PathBuf>,

    #[command(flatten)]
    #[serde(flatten)]
    pub weights: WeightArgs,

    /// Complexity matrix CSV; IFPUG defaults when omitted.
    #[arg(long, value_name = "FILE")]
    pub matrices: Option<PathBuf>,

    /// Also compute fuzzy weights (component and inventory modes).
    #[arg(long)]
    pub fuzzy: bool,

    #[arg(long, default_value_t = DEFAULT_OVERLAP)]
    pub overlap: f64,

    /// Effort model coefficient A (needs `--b`).
    #[arg(long, requires = "b", conflicts_with = "model")]
    pub a: Option<f64>,

    /// Effort model exponent B (needs `--a`).
    #[arg(long, requires = "a")]
    pub b: Option<f64>,

    /// Effort model JSON (`fit` output).
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct FuzzyWeightArgs {
    #[arg(long)]
    pub kind: String,

    #[arg(long, required_unless_present = "sweep")]
    pub det: Option<f64>,

    #[arg(long, required_unless_present = "sweep")]
    pub records: Option<f64>,

    #[command(flatten)]
    #[serde(flatten)]
    pub weights: WeightArgs,

    #[arg(long, value_name = "FILE")]
    pub matrices: Option<PathBuf>,

    #[arg(long, default_value_t = DEFAULT_OVERLAP)]
    pub overlap: f64,

    /// Emit the weight surface as CSV instead of a single point.
    #[arg(long)]
    pub sweep: bool,

    /// DET range `LO:HI` for the sweep.
    #[arg(long, default_value = "1:100", value_parser = parse_range)]
    pub det_range: (f64, f64),

    /// Record range `LO:HI` for the sweep.
    #[arg(long, default_value = "1:10", value_parser = parse_range)]
    pub records_range: (f64, f64),

    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got '{s}'"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{lo}: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{hi}: {e}"))?;
    if !(lo <= hi) {
        return Err(format!("range {lo}:{hi} is empty"));
    }
    Ok((lo, hi))
}
