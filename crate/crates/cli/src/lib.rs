//! `bohr`: command-line access to Bohr bases, equivalence decisions, value
//! sets and zero location for general Dirichlet series.

pub mod commands;
pub mod error;
pub mod file;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::CliError;
use error::{EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "bohr", version, about = "Bohr equivalence toolkit for general Dirichlet series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Tolerance; the default depends on the subcommand (see its help)
    #[arg(long)]
    pub tol: Option<f64>,
    /// Write output here (atomically) instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    /// Evaluate at random points of the strip or line
    Direct,
    /// Evaluate random equivalent series on the real axis
    Equivalence,
}

/// Comma-separated reals, e.g. `0.5,-1,3.14`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim().is_empty() {
            return Ok(FloatList(Vec::new()));
        }
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<Result<_, _>>()
            .map(FloatList)
    }
}

/// `NxM`: `N` steps in sigma and `M` steps in t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid(pub usize, pub usize);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected NxM, got {s:?}"))?;
        let n = a.parse().map_err(|e| format!("{a:?}: {e}"))?;
        let m = b.parse().map_err(|e| format!("{b:?}: {e}"))?;
        Ok(Grid(n, m))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Basis, Bohr matrices R and T, and denominator lcms of a series
    Basis {
        #[arg(long)]
        series: PathBuf,
        /// Also rescale the basis so the first H rows of R are integral
        #[arg(long)]
        h: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Multiply coefficient n by exp(i (R Y)_n); writes a series file
    Twist {
        #[arg(long)]
        series: PathBuf,
        /// Phase vector Y, one entry per basis element
        #[arg(long, allow_hyphen_values = true)]
        y: FloatList,
        #[command(flatten)]
        common: Common,
    },
    /// Solve R Y = theta (mod 2 pi); exits 2 when infeasible [tol 1e-9]
    SolvePhases {
        #[arg(long)]
        series: PathBuf,
        /// Take theta(n) = arg(b(n)/a(n)) from this series
        #[arg(long, conflicts_with = "theta", required_unless_present = "theta")]
        series2: Option<PathBuf>,
        /// Explicit theta, one entry per term
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<FloatList>,
        #[command(flatten)]
        common: Common,
    },
    /// Decide equivalence of two aligned truncations; exits 2 if not [tol 1e-9]
    Equiv {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        series2: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Per-truncation feasibility and minimal phase norms [tol 1e-9]
    ClosureDemo {
        #[arg(long)]
        series: PathBuf,
        /// Defaults to the negated series
        #[arg(long)]
        series2: Option<PathBuf>,
        /// Largest truncation; defaults to all terms
        #[arg(long)]
        n: Option<usize>,
        /// Give up on minimal norms beyond this many periods
        #[arg(long, default_value_t = bohr_core::equivalence::DEFAULT_SEARCH_BOUND)]
        search_bound: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate at one point, or on a grid with --grid
    Eval {
        #[arg(long)]
        series: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        sigma: Option<f64>,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        t: f64,
        #[arg(long)]
        grid: Option<Grid>,
        #[command(flatten)]
        range: Range,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Certified tail bound and modulus bound at sigma
    Tail {
        #[arg(long)]
        series: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Largest |f - g| over a grid box
    UniformDistance {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        series2: PathBuf,
        #[arg(long, default_value = "20x40")]
        grid: Grid,
        #[command(flatten)]
        range: Range,
        #[command(flatten)]
        common: Common,
    },
    /// Sampled values on a vertical strip
    ValueSet {
        #[arg(long)]
        series: PathBuf,
        #[command(flatten)]
        range: Range,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = RouteArg::Direct)]
        route: RouteArg,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Sampled values on the vertical line sigma
    LineSet {
        #[arg(long)]
        series: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        #[arg(long, default_value_t = 1000.0)]
        t_max: f64,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = RouteArg::Direct)]
        route: RouteArg,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Abscissa of the zero-free half-plane of f - v within a t-window [tol 1e-3]
    SigmaStar {
        #[arg(long)]
        series: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        v_re: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        v_im: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -50.0)]
        t_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 50.0)]
        t_max: f64,
        /// Left end of the search
        #[arg(long, allow_hyphen_values = true, default_value_t = -10.0)]
        sigma_floor: f64,
        /// Instead of v, report sigma*(f(m)) for m = 1..=M
        #[arg(long)]
        sequence: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Count zeros of f - v in a rectangle
    Zeros {
        #[arg(long)]
        series: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        v_re: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        v_im: f64,
        #[command(flatten)]
        range: Range,
        /// Initial samples per side
        #[arg(long, default_value_t = bohr_core::zeros::DEFAULT_STEPS)]
        steps: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Find t with t beta_j close to target_j (mod 2 pi); exits 2 if none [tol 1e-2]
    Kronecker {
        /// Frequencies; alternatively take the basis values of --series
        #[arg(long, allow_hyphen_values = true, required_unless_present = "series")]
        beta: Option<FloatList>,
        #[arg(long, conflicts_with = "beta")]
        series: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        target: FloatList,
        #[arg(long, default_value_t = 1e5)]
        t_max_search: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Write Bohr's counterexample truncated to n terms as a series file
    BohrExample {
        #[arg(long)]
        n: usize,
        /// Negate all coefficients
        #[arg(long)]
        negate: bool,
        /// Shift by i tau_m
        #[arg(long)]
        shift_m: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
}

/// Box flags. Defaults: sigma in [1, 2], t in [-1, 1].
#[derive(Debug, Clone, Copy, Args)]
pub struct Range {
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub sigma_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
    pub sigma_max: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
    pub t_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub t_max: f64,
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run(args: Vec<OsString>) -> u8 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match commands::execute(cli.command, &args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
