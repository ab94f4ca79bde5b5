use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "sonclust", version, about = "Sum-of-norms clustering of weighted point sets")]
pub struct Cli {
    /// Output encoding; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the payload here instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Absolute tolerance on both ADMM residuals.
    #[arg(long)]
    pub solver_tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Atoms whose values are closer than this share a cluster
    /// (default 1e-6 · diameter).
    #[arg(long)]
    pub fuse_tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Minimise the clustering functional at one λ.
    Solve {
        /// Measure file (CSV `x0,...,weight` or JSON).
        measure: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Solve along an increasing λ grid with warm starts.
    Path {
        measure: PathBuf,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',', conflicts_with = "log_grid")]
        lambdas: Option<Vec<f64>>,
        /// `LO HI N`: N geometrically spaced values.
        #[arg(long, num_args = 3, value_names = ["LO", "HI", "N"])]
        log_grid: Option<Vec<f64>>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// The cohesion threshold λ₁.
    Lambda1 {
        measure: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        method: Lambda1Method,
        /// Absolute tolerance on λ₁.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Include the witness field in JSON output.
        #[arg(long)]
        certificate: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// The shattering threshold λ*.
    LambdaStar {
        measure: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Detection interval of a partition (CSV with a `label` column).
    Detect {
        measure: PathBuf,
        partition: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// KKT check of a solution produced by `solve`.
    Verify {
        measure: PathBuf,
        solution: PathBuf,
        /// Partition CSV; defaults to the partition stored with the
        /// solution, or one extracted at the fuse tolerance.
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long)]
        fuse_tol: Option<f64>,
        /// Include the witness field in JSON output.
        #[arg(long)]
        certificate: bool,
    },
    /// Closed-form constants in dimension d.
    Constants {
        #[arg(long)]
        d: usize,
    },
    /// W₁ or W∞ between two measures of equal mass.
    Wasserstein {
        #[arg(long, value_enum)]
        p: Order,
        a: PathBuf,
        b: PathBuf,
        /// Include the optimal coupling in JSON output.
        #[arg(long)]
        plan: bool,
    },
    /// Seeded experiments on the two-ball model.
    #[command(subcommand)]
    Experiment(Experiment),
    /// Draw or build a measure.
    #[command(subcommand)]
    Sample(Sample),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Lambda1Method {
    Exact,
    Bisect,
    Bounds,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Order {
    #[value(name = "1")]
    One,
    Inf,
}

#[derive(Args, Debug, Clone)]
pub struct ExperimentArgs {
    /// Seeds: `3`, `0,4,7`, `0..10` (half-open) or a mix.
    #[arg(long, required = true)]
    pub seed: String,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long)]
    pub r: Option<f64>,
    /// Skip the KKT check of each solve.
    #[arg(long)]
    pub no_kkt: bool,
    #[arg(long, default_value_t = 1e-5)]
    pub kkt_tol: f64,
    /// Absolute tolerance for per-cluster λ₁ and λ*.
    #[arg(long, default_value_t = 1e-3)]
    pub threshold_tol: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Subcommand, Debug)]
pub enum Experiment {
    /// Cluster counts at multiples of the empirical λ₁.
    StochBall {
        #[command(flatten)]
        common: ExperimentArgs,
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "1.15,0.85")]
        factors: Vec<f64>,
        /// Mass each reported cluster must carry.
        #[arg(long, default_value_t = 0.05)]
        mass_report: f64,
        /// Relative accuracy of the empirical λ₁.
        #[arg(long, default_value_t = 1e-3)]
        lambda1_rel_tol: f64,
    },
    /// Exact recovery of the two balls at a fixed λ.
    Separation {
        #[command(flatten)]
        common: ExperimentArgs,
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long)]
        lambda: f64,
    },
    /// Detection-interval endpoints of the true split as N grows.
    Detection {
        #[command(flatten)]
        common: ExperimentArgs,
        #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
        n: Vec<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum Sample {
    /// Uniform on two unit balls centred at ±r e₁.
    TwoBalls {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, required = true)]
        seed: u64,
    },
    /// Uniform in the unit ball.
    Ball {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, required = true)]
        seed: u64,
    },
    /// Uniform on the unit sphere.
    Sphere {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, required = true)]
        seed: u64,
    },
    /// Density ∝ |x|^{-(d-1)} on the ball of the given radius.
    PowerLaw {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, required = true)]
        seed: u64,
        /// Rescale the total mass to ½ α_{d-1} R.
        #[arg(long)]
        normalize: bool,
    },
    /// Unit masses at ±e_k (deterministic).
    CrossPolytope {
        #[arg(long)]
        d: usize,
    },
}
