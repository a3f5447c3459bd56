//! Command-line surface.

use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use kantian_core::CriterionKind;

#[derive(Debug, Parser)]
#[command(
    name = "kantian",
    version,
    about = "Kantian equilibria, Pareto frontiers, and lower-bound shifts \
             for concave social dilemmas",
    after_help = "CSV goes to stdout (or --out); prose and verdicts go to stderr.\n\
                  Exit codes: 0 verified, 1 solver or verification failure, 2 bad input."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a game file: own/ray concavity and externality signs at sampled profiles
    Validate(ValidateArgs),
    /// Sweep the Pareto frontier; one CSV row per certified efficient point
    Frontier(FrontierArgs),
    /// Solve for the Kantian equilibrium (no player gains from rescaling everyone)
    Mke(MkeArgs),
    /// Solve for the simultaneous best-response (Nash) profile
    Nash(NashArgs),
    /// Verify a profile as a Kantian equilibrium, optionally of a shifted game
    Verify(VerifyArgs),
    /// Build a verified lower-bound shift realizing a target efficient point
    Realize(RealizeArgs),
    /// Sweep the frontier and build a verified shift for every point
    SweepRealize(SweepRealizeArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Game description file (JSON)
    #[arg(long, value_name = "FILE")]
    pub game: PathBuf,

    /// Write CSV to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Stationarity tolerance for solves and verification
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,

    /// Seed for the validation sampler
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Random profiles sampled when checking the game's assumptions
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct FrontierArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Number of weight vectors swept across the simplex
    #[arg(long, default_value_t = 25)]
    pub points: usize,

    /// Also report the point this criterion selects
    #[arg(long, value_enum)]
    pub criterion: Option<CriterionArg>,

    /// Disagreement payoffs for the bargaining criteria (default: Nash play)
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    pub disagreement: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct MkeArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Starting profile for the interior solve (default: all ones)
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub start: Option<Vec<f64>>,

    /// Upper end of the rescaling interval scanned by the oracle
    #[arg(long, default_value_t = 3.0)]
    pub a_hi: f64,
}

#[derive(Debug, Args)]
pub struct NashArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Upper end of the deviation interval scanned by the oracle
    #[arg(long, default_value_t = 3.0)]
    pub a_hi: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Profile to verify
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub point: Vec<f64>,

    /// Lower-bound shift; when given, the profile is checked in the shifted game
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub c: Option<Vec<f64>>,

    /// Upper end of the rescaling interval scanned by the oracle
    #[arg(long, default_value_t = 3.0)]
    pub a_hi: f64,
}

#[derive(Debug, Args)]
#[command(group(
    ArgGroup::new("target")
        .required(true)
        .args(["point", "weights", "criterion"]),
))]
pub struct RealizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Target efficient profile, given directly
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub point: Option<Vec<f64>>,

    /// Target chosen by maximizing this weighted payoff sum
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub weights: Option<Vec<f64>>,

    /// Target chosen by a selection criterion over a frontier sweep
    #[arg(long, value_enum)]
    pub criterion: Option<CriterionArg>,

    /// Disagreement payoffs for the bargaining criteria (default: Nash play)
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    pub disagreement: Option<Vec<f64>>,

    /// Sweep size when the target comes from a criterion
    #[arg(long, default_value_t = 25)]
    pub points: usize,

    /// Fraction of the largest feasible step taken along the tangent
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,

    /// Upper end of the rescaling interval scanned by the oracle
    #[arg(long, default_value_t = 3.0)]
    pub a_hi: f64,
}

#[derive(Debug, Args)]
pub struct SweepRealizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Number of weight vectors swept across the simplex
    #[arg(long, default_value_t = 25)]
    pub points: usize,

    /// Fraction of the largest feasible step taken along the tangent
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,

    /// Upper end of the rescaling interval scanned by the oracle
    #[arg(long, default_value_t = 3.0)]
    pub a_hi: f64,
}

/// Selection criteria, as spelled on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Utilitarian,
    Maximin,
    NashBargaining,
    KalaiSmorodinsky,
}

impl From<CriterionArg> for CriterionKind {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Utilitarian => CriterionKind::Utilitarian,
            CriterionArg::Maximin => CriterionKind::Maximin,
            CriterionArg::NashBargaining => CriterionKind::NashBargaining,
            CriterionArg::KalaiSmorodinsky => CriterionKind::KalaiSmorodinsky,
        }
    }
}
