use std::path::PathBuf;
use std::str::FromStr;

use bigdecimal::{BigDecimal, One, Signed};
use clap::{ArgGroup, Args, Parser, Subcommand};
use metadist::{BetaParams, Error};

use crate::output::Format;
use crate::AppError;

#[derive(Parser)]
#[command(
    name = "metadist",
    version,
    about = "Reconstruct distributions on [0,1] from their moment sequences"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Build the exact order-n inverse matrix and export its integer rows
    Matrix(MatrixArgs),
    /// Generate a moment sequence and write it as `j,M_j` CSV
    Moments(MomentsArgs),
    /// Invert a moment sequence into CDF (and optionally PDF) grid samples
    Reconstruct(ReconstructArgs),
    /// Solve F_n(x) = p over a theta grid for the SIR meta distribution
    Percentiles(PercentilesArgs),
    /// Reconstruction error versus order against a closed-form reference
    Convergence(ConvergenceArgs),
}

#[derive(Args)]
pub struct MatrixArgs {
    /// Matrix order n; the matrix is (n+1) x (n+1)
    #[arg(long)]
    pub n: usize,
    /// Output file (stdout when omitted); rows are always emitted bare,
    /// diagnostics go to stderr
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Which distribution supplies the moment sequence.
#[derive(Args)]
pub struct SourceArgs {
    /// Uniform distribution on [0, 1]
    #[arg(long, group = "source")]
    pub uniform: bool,
    /// Beta distribution with the given shape parameters
    #[arg(long, num_args = 2, value_names = ["ALPHA", "BETA"], group = "source")]
    pub beta: Option<Vec<String>>,
    /// Point mass at NU in [0, 1]
    #[arg(long, value_name = "NU", group = "source")]
    pub point_mass: Option<String>,
    /// SIR success probability of the typical user of a Poisson network
    #[arg(long, group = "source", requires = "theta_db", requires = "delta")]
    pub sir: bool,
    /// SIR threshold in dB (with --sir)
    #[arg(long, value_name = "DB", allow_hyphen_values = true)]
    pub theta_db: Option<String>,
    /// Stability exponent delta = 2/alpha, strictly inside (0, 1) (with --sir)
    #[arg(long, value_name = "DELTA")]
    pub delta: Option<String>,
}

#[derive(Args)]
#[command(group = ArgGroup::new("source").required(true))]
pub struct MomentsArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Highest moment order to generate
    #[arg(long)]
    pub n: usize,
    /// Fractional digits of working precision (default: rule of thumb for n)
    #[arg(long)]
    pub digits: Option<u32>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Suppress `#` metadata lines so reruns are byte-identical
    #[arg(long)]
    pub no_meta: bool,
}

#[derive(Args)]
#[command(group = ArgGroup::new("source").required(true))]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Load moments from a `j,M_j` CSV file instead of a generator
    #[arg(long, value_name = "FILE", group = "source")]
    pub moments: Option<PathBuf>,
    /// Reconstruction order (defaults to the file's order with --moments)
    #[arg(long)]
    pub n: Option<usize>,
    /// Fractional digits of working precision (default: rule of thumb for n)
    #[arg(long)]
    pub digits: Option<u32>,
    /// Also emit density samples as a third column
    #[arg(long)]
    pub pdf: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Suppress `#` metadata lines so reruns are byte-identical
    #[arg(long)]
    pub no_meta: bool,
}

#[derive(Args)]
pub struct PercentilesArgs {
    /// Comma-separated percentiles, each strictly inside (0, 1)
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<String>,
    /// Stability exponent delta = 2/alpha, strictly inside (0, 1)
    #[arg(long)]
    pub delta: String,
    /// Reconstruction order
    #[arg(long)]
    pub n: usize,
    /// Fractional digits of working precision (default: noise-safe budget for n)
    #[arg(long)]
    pub digits: Option<u32>,
    /// Grid start in dB
    #[arg(long, default_value = "-20", allow_hyphen_values = true)]
    pub theta_min_db: String,
    /// Grid end in dB
    #[arg(long, default_value = "20", allow_hyphen_values = true)]
    pub theta_max_db: String,
    /// Grid step in dB
    #[arg(long, default_value = "1")]
    pub theta_step_db: String,
    /// Write one file per percentile named PREFIX_p<percentile>.<ext>
    /// (stdout when omitted)
    #[arg(long)]
    pub output_prefix: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Suppress `#` metadata lines so reruns are byte-identical
    #[arg(long)]
    pub no_meta: bool,
}

#[derive(Args)]
#[command(group = ArgGroup::new("source").required(true))]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Comma-separated strictly increasing reconstruction orders
    #[arg(long, value_delimiter = ',', default_values_t = [20usize, 50, 100, 200])]
    pub orders: Vec<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Suppress `#` metadata lines so reruns are byte-identical
    #[arg(long)]
    pub no_meta: bool,
}

/// A fully parsed moment source.
pub enum Source {
    Uniform,
    Beta(BetaParams),
    PointMass(BigDecimal),
    Sir {
        theta_db: BigDecimal,
        delta: BigDecimal,
    },
}

impl Source {
    pub fn describe(&self) -> String {
        match self {
            Source::Uniform => "uniform".into(),
            Source::Beta(p) => format!("beta {} {}", p.alpha().normalized(), p.beta().normalized()),
            Source::PointMass(nu) => format!("point-mass {}", nu.normalized()),
            Source::Sir { theta_db, delta } => format!(
                "sir theta-db {} delta {}",
                theta_db.normalized(),
                delta.normalized()
            ),
        }
    }
}

pub fn parse_decimal(s: &str, what: &str) -> Result<BigDecimal, AppError> {
    BigDecimal::from_str(s.trim())
        .map_err(|e| AppError::Usage(format!("invalid {what} '{s}': {e}")))
}

impl SourceArgs {
    pub fn resolve(&self) -> Result<Source, AppError> {
        if self.uniform {
            return Ok(Source::Uniform);
        }
        if let Some(ab) = &self.beta {
            let alpha = parse_decimal(&ab[0], "beta alpha")?;
            let beta = parse_decimal(&ab[1], "beta beta")?;
            return Ok(Source::Beta(BetaParams::new(alpha, beta)?));
        }
        if let Some(nu) = &self.point_mass {
            return Ok(Source::PointMass(parse_decimal(nu, "point-mass position")?));
        }
        if self.sir {
            let theta_db = parse_decimal(self.theta_db.as_deref().unwrap(), "theta-db")?;
            let delta = parse_decimal(self.delta.as_deref().unwrap(), "delta")?;
            // fail early on a bad exponent instead of deep in the series
            if !delta.is_positive() || delta >= BigDecimal::one() {
                return Err(AppError::Lib(Error::Domain(format!(
                    "delta must lie strictly inside (0, 1), got {}",
                    delta.normalized()
                ))));
            }
            return Ok(Source::Sir { theta_db, delta });
        }
        Err(AppError::Usage(
            "a moment source is required: --uniform, --beta, --point-mass, or --sir".into(),
        ))
    }
}
