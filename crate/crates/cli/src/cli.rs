use std::path::PathBuf;

use cantor_waring::coverage::DEFAULT_BUDGET;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "cantor-waring",
    version,
    about = "Exact certificates for sums of powers of Cantor-set points",
    after_help = "EXIT CODES:\n  0  success / verified\n  1  usage error\n  2  verification failure\n  3  budget or cap exceeded"
)]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Caps shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Maximum number of multisets or residues an enumeration may visit
    #[arg(long, global = true, env = "CANTOR_WARING_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Largest enumeration depth accepted
    #[arg(long, global = true, env = "CANTOR_WARING_MAX_DEPTH", default_value_t = 20)]
    pub max_depth: usize,
    /// Worker threads for parallel enumeration (default: all cores)
    #[arg(long, global = true, env = "CANTOR_WARING_THREADS")]
    pub threads: Option<usize>,
    /// Print errors as one JSON object on stderr
    #[arg(long, global = true)]
    pub json_errors: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound profile and side conditions, one table row per exponent
    Bounds(BoundsArgs),
    /// Certificate that a rational target is a sum of k m-th powers
    Decompose(DecomposeArgs),
    /// Level-n image of the power-sum map and its gaps
    Coverage(CoverageArgs),
    /// Open windows missed by two m-th powers
    Window(WindowArgs),
    /// The three-power epsilon table
    Epsilon(EpsilonArgs),
    /// Complex targets as sums of m-th powers of points of C + iC
    Dust(DustArgs),
    /// p-adic Cantor set certificates and residue lower bounds
    Padic(PadicArgs),
    /// Replay a certificate file
    Verify {
        file: PathBuf,
    },
    /// Write or check the regression fixtures
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Debug, Args)]
pub struct Ratio {
    /// Contraction ratio r in (0, 1/2)
    #[arg(long, default_value = "1/3", conflicts_with = "alpha")]
    pub r: String,
    /// Middle-1/alpha set, r = (1 - 1/alpha)/2
    #[arg(long)]
    pub alpha: Option<String>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub ratio: Ratio,
    #[arg(long)]
    pub m: u32,
    /// Sweep every exponent from --m up to this one
    #[arg(long)]
    pub m_max: Option<u32>,
    /// Total number of summands, or "auto" for the lower bound ceil((1/r - 1)^m)
    #[arg(long, default_value = "auto")]
    pub k: String,
    /// Also enclose the large-exponent threshold
    #[arg(long)]
    pub threshold: bool,
    #[arg(long)]
    pub json: bool,
    /// Write a bounds certificate (single exponent only)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub ratio: Ratio,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub m: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub target: String,
    #[arg(long, default_value_t = 40)]
    pub digits: usize,
    /// Fall back to a seed-box search outside the certified regime
    #[arg(long)]
    pub best_effort: bool,
    #[arg(long, default_value_t = 3)]
    pub seed_depth: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub ratio: Ratio,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub n: usize,
    /// Write intervals and gaps as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report gap trends at k = ceil((1/r - 1)^m) for depths 1..=n instead
    #[arg(long)]
    pub probe: bool,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    #[command(flatten)]
    pub ratio: Ratio,
    #[arg(long)]
    pub m: u32,
    #[arg(long, default_value_t = 8)]
    pub max_n: usize,
    /// Confirm each window against the brute-force level-n image
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EpsilonArgs {
    #[arg(long, default_value_t = 32)]
    pub m_max: u32,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct DustArgs {
    #[arg(long)]
    pub m: u32,
    /// Target in the closed unit disk: "a+bi", "a-bi", "bi", "a" or "a,b"
    #[arg(long, allow_hyphen_values = true, required_unless_present = "budget_check")]
    pub target: Option<String>,
    #[arg(long, default_value_t = 30)]
    pub digits: usize,
    /// Print the summand budget and the construction chosen for m
    #[arg(long)]
    pub budget_check: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PadicArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub gamma: String,
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "lower_bound")]
    pub target: Option<String>,
    /// Truncation: digits of precision mod p^digits
    #[arg(long, default_value_t = 30)]
    pub digits: usize,
    /// Smallest count whose m-th power sums cover Z/p^j
    #[arg(long, requires = "j")]
    pub lower_bound: bool,
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum FixtureAction {
    Write { dir: PathBuf },
    Check { dir: PathBuf },
}
