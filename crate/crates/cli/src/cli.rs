use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "svarica", version, about = "Heavy-tailed SVAR identification by distance-covariance ICA")]
pub struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "SVARICA_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an SVAR from a TOML model file or a grid design cell.
    Simulate(SimulateArgs),
    /// Fit a reduced-form VAR by least squares.
    Estimate(EstimateArgs),
    /// Fit a VAR, whiten, run ICA and test the shocks for independence.
    Identify(IdentifyArgs),
    /// Permutation test of mutual independence of the columns of a CSV.
    Test(TestArgs),
    /// Impulse responses to the identified disaster shock.
    Irf(IrfArgs),
    /// Replicate the simulation grid.
    Montecarlo(MonteCarloArgs),
    /// Quantiles of sample kurtosis for IID Pareto data.
    KurtosisTable(KurtosisArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Estimate(_) => "estimate",
            Command::Identify(_) => "identify",
            Command::Test(_) => "test",
            Command::Irf(_) => "irf",
            Command::Montecarlo(_) => "montecarlo",
            Command::KurtosisTable(_) => "kurtosis-table",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// TOML model description.
    #[arg(long, conflicts_with = "cell", required_unless_present = "cell")]
    pub model: Option<PathBuf>,
    /// Design cell: NLT-HL, LT-HL, NLT-LL or LT-LL.
    #[arg(long)]
    pub cell: Option<String>,
    /// Tail index of triangular-array damping for a design cell.
    #[arg(long, requires = "cell")]
    pub hl_alpha: Option<f64>,
    #[arg(long, short = 't', default_value_t = 400)]
    pub length: usize,
    #[arg(long, default_value_t = 200)]
    pub burn_in: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

/// Data preparation shared by the estimation subcommands.
#[derive(Debug, Args, Serialize)]
pub struct DataArgs {
    /// Input CSV: header row, optional leading date column, numeric columns.
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    /// VAR lag order.
    #[arg(long, short = 'p', default_value_t = 1)]
    pub lags: usize,
    /// Fit without an intercept.
    #[arg(long)]
    pub no_intercept: bool,
    /// Remove this many low-frequency cosine components first.
    #[arg(long, default_value_t = 0)]
    pub q_cosines: usize,
    /// CSV of exogenous series to purge from the data first.
    #[arg(long)]
    pub exog: Option<PathBuf>,
    /// Lags of the exogenous series used in the purge.
    #[arg(long, default_value_t = 0, requires = "exog")]
    pub exog_lags: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WhitenerKind {
    Cholesky,
    CovarianceSvd,
    DataSvd,
}

/// Identification settings shared by `identify` and `irf`.
#[derive(Debug, Args, Serialize)]
pub struct IcaArgs {
    #[arg(long, value_enum, default_value_t = WhitenerKind::Cholesky)]
    pub whitener: WhitenerKind,
    /// Cholesky ordering: `kurtosis` or a 1-based list such as `2,3,1`.
    #[arg(long, default_value = "kurtosis")]
    pub ordering: String,
    /// Distance-covariance exponent, in (0, 2).
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    /// `none`, `negative:<var>` or `positive:<var>` with a 1-based variable.
    #[arg(long, default_value = "none")]
    pub sign_rule: String,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct IdentifyArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub ica: IcaArgs,
    /// Permutations per independence test.
    #[arg(long, default_value_t = 199)]
    pub permutations: usize,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TestArgs {
    /// CSV whose numeric columns are tested jointly.
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    /// Also test the squared series.
    #[arg(long)]
    pub squared: bool,
    #[arg(long, default_value_t = 199)]
    pub permutations: usize,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct IrfArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub ica: IcaArgs,
    /// Largest horizon.
    #[arg(long, short = 'H', default_value_t = 6)]
    pub horizon: usize,
    /// 1-based shock after kurtosis ordering; 1 is the disaster shock.
    #[arg(long, default_value_t = 1)]
    pub shock: usize,
    /// Rescale so the impact on this 1-based variable is one.
    #[arg(long)]
    pub unit_effect: Option<usize>,
    /// Leave the other contemporaneous shocks out of the local projections.
    #[arg(long)]
    pub lp_no_other_shocks: bool,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScopeArg {
    Full,
    Means,
}

#[derive(Debug, Args, Serialize)]
pub struct MonteCarloArgs {
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    /// Comma-separated cells; defaults to all four.
    #[arg(long, value_delimiter = ',')]
    pub cells: Vec<String>,
    #[arg(long, short = 't', default_value_t = 400)]
    pub length: usize,
    #[arg(long, default_value_t = 199)]
    pub permutations: usize,
    #[arg(long, value_enum, default_value_t = ScopeArg::Full)]
    pub scope: ScopeArg,
    /// Draws per sample length for the kurtosis-quantile table.
    #[arg(long, default_value_t = 10_000)]
    pub kurtosis_draws: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct KurtosisArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [500, 1000])]
    pub lengths: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}
