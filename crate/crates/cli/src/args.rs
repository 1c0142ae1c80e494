use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Maximal energies, stable-law bounds and spherical embeddings.
#[derive(Debug, Parser)]
#[command(name = "energy", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Seed for every random stream of the run.
    #[arg(long, global = true, env = "ENERGY_SEED", default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the run record here instead of standard output.
    #[arg(long, short, global = true)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the one-dimensional constant m_p on symmetric grids.
    Mp(MpArgs),
    /// Discrete lower bound for the maximal energy of a body.
    MaxEnergy(MaxEnergyArgs),
    /// pi_p(T)^p of a linear operator by sphere integration.
    PiP(PiPArgs),
    /// Stable-law upper bound for the maximal energy of a body.
    Gub(GubArgs),
    /// Average of ||t||_r^p over the unit sphere.
    SphereMoment(SphereMomentArgs),
    /// Lower and upper bounds over a range of dimensions, with fitted slopes.
    Asymptotics(AsymptoticsArgs),
    /// Schoenberg radii: closed form, point sets, or growth over dimensions.
    Radius(RadiusArgs),
    /// Embed a snowflaked point set on a sphere.
    Embed(EmbedArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MpArgs {
    #[arg(long)]
    pub p: f64,

    /// Odd grid sizes, increasing.
    #[arg(long, value_delimiter = ',', default_values_t = [41, 101, 401])]
    pub grids: Vec<usize>,

    /// Use equally spaced grids instead of Chebyshev points.
    #[arg(long)]
    pub uniform: bool,

    /// Include the optimal weights in the record.
    #[arg(long)]
    pub weights: bool,
}

/// A body as inline JSON or a JSON file.
#[derive(Debug, Clone, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct BodyArg {
    /// e.g. '{"kind":"lq_ball","n":3,"q":2}'
    #[arg(long)]
    #[serde(skip)]
    pub body: Option<String>,

    #[arg(long)]
    #[serde(skip)]
    pub body_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MaxEnergyArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub body: BodyArg,

    #[arg(long, default_value_t = 2.0)]
    pub r: f64,

    #[arg(long)]
    pub p: f64,

    /// Point counts, increasing.
    #[arg(long, value_delimiter = ',', default_values_t = [101, 401, 1001, 2001])]
    pub resolutions: Vec<usize>,

    /// Samples for Monte-Carlo reference values.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[group(id = "operator", required = true, multiple = false)]
pub struct OperatorArg {
    /// Diagonal operator, e.g. 2,1
    #[arg(long, value_delimiter = ',')]
    pub semi_axes: Option<Vec<f64>>,

    /// Row-major JSON matrix, e.g. '[[1,2],[0,1]]'
    #[arg(long)]
    #[serde(skip)]
    pub matrix: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PiPArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub operator: OperatorArg,

    #[arg(long)]
    pub p: f64,

    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GubArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub body: BodyArg,

    #[arg(long, default_value_t = 2.0)]
    pub r: f64,

    #[arg(long)]
    pub p: f64,

    /// Value of m_p; defaults to 1 at p = 1 and to a grid estimate otherwise.
    #[arg(long)]
    pub mp: Option<f64>,

    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SphereMomentArgs {
    #[arg(long)]
    pub n: usize,

    #[arg(long)]
    pub r: f64,

    #[arg(long)]
    pub p: f64,

    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[group(id = "sweep", required = true, multiple = false)]
pub struct SweepArg {
    /// Sweep B_q^n under the Euclidean distance.
    #[arg(long)]
    pub q: Option<f64>,

    /// Sweep B_2^n under the l_r distance.
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub sweep: SweepArg,

    #[arg(long)]
    pub p: f64,

    #[arg(long, value_delimiter = ',', default_values_t = [4, 8, 16, 32, 64, 128])]
    pub n_list: Vec<usize>,

    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,

    /// Points per discrete lower-bound solve.
    #[arg(long, default_value_t = 401)]
    pub points: usize,

    #[arg(long, value_delimiter = ',', default_values_t = [41, 101, 401])]
    pub mp_grids: Vec<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(group = ArgGroup::new("mode").required(true).args(["n", "points", "q"]))]
pub struct RadiusArgs {
    #[arg(long)]
    pub alpha: f64,

    /// Closed-form radius of the Euclidean ball in this dimension.
    #[arg(long)]
    pub n: Option<usize>,

    /// Value of m_{2 alpha}; defaults to 1 at alpha = 1/2 and to a grid estimate otherwise.
    #[arg(long)]
    pub mp: Option<f64>,

    /// Schoenberg radius of a point set (CSV).
    #[arg(long)]
    pub points: Option<PathBuf>,

    /// Radius growth of B_q^n over --n-list.
    #[arg(long)]
    pub q: Option<f64>,

    #[arg(long, value_delimiter = ',', default_values_t = [4, 8, 16, 32, 64, 128])]
    pub n_list: Vec<usize>,

    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,

    #[arg(long, default_value_t = 401)]
    pub budget_points: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EmbedArgs {
    /// Point set CSV with header x1,...,xn.
    #[arg(long)]
    pub points: PathBuf,

    #[arg(long)]
    pub alpha: f64,

    /// Sphere radius; defaults to the Schoenberg radius of the points.
    #[arg(long)]
    pub radius: Option<f64>,
}
