use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "isocap", version, about = "Capacity, torsion and capacity upper bounds of convex bodies")]
pub struct Cli {
    /// File of `key = value` defaults; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for every Monte Carlo estimate (default 42).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory (default: current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Monte Carlo budget of the main estimator.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailArg {
    Exact,
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CapacityMethodArg {
    Auto,
    Exact,
    Quadrature,
    Wos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorpusArg {
    All,
    Convex,
    Balls,
    Ellipsoids,
    Boxes,
    Polytopes,
    Segments,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MembershipArg {
    Bridge,
    Capsule,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every applicable capacity bound against a reference capacity.
    Bounds {
        shape: PathBuf,
        /// Constant of the quantitative isoperimetric inequality; enables the refined bound.
        #[arg(long)]
        cd: Option<f64>,
        #[arg(long, value_enum)]
        tail: Option<TailArg>,
        #[arg(long)]
        t_max_factor: Option<f64>,
    },
    /// Capacity of a shape.
    Capacity {
        shape: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        method: CapacityMethodArg,
    },
    /// Torsional rigidity of a shape.
    Torsion { shape: PathBuf },
    /// Shape functional: g, g_alpha, h_alpha or j_alpha.
    Functional {
        shape: PathBuf,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Fraenkel asymmetry.
    Asymmetry { shape: PathBuf },
    /// Bound reports over the built-in corpus.
    Sweep {
        #[arg(long, value_enum, default_value = "all")]
        corpus: CorpusArg,
        #[arg(long)]
        cd: Option<f64>,
    },
    /// Wiener sausage of a ball.
    Sausage {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        /// Compare the growth rate with the upper bounds (d >= 5).
        #[arg(long)]
        check_bounds: bool,
        /// Repeat the run at dt/2 and report the change in slope.
        #[arg(long)]
        refine: bool,
        #[arg(long, value_enum, default_value = "bridge")]
        membership: MembershipArg,
    },
    /// Runs an invariant suite over the built-in corpus.
    Verify {
        suite: String,
        #[arg(long)]
        cd: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
    },
}
