//! `heightlab` command-line driver: configuration, the `F_n` cache and
//! one subcommand per experiment. Reports are JSON on stdout or `--out`.

pub mod cache;
mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use heightlab_core::equilab::EquilabError;
use heightlab_core::heights::HeightError;
use heightlab_core::per1::Per1Error;
use heightlab_core::potentials::PotentialError;

pub use config::Config;

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NONCONVERGENCE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NonConvergence(_) => EXIT_NONCONVERGENCE,
            CliError::Usage(_) | CliError::Failed(_) => EXIT_USAGE,
        }
    }
}

impl From<Per1Error> for CliError {
    fn from(e: Per1Error) -> Self {
        match e {
            Per1Error::NoConvergence { .. } => CliError::NonConvergence(e.to_string()),
            Per1Error::InvalidLambda(_) | Per1Error::InvalidDepth | Per1Error::LevelUnavailable(..) => {
                CliError::Usage(e.to_string())
            }
            e => CliError::Failed(e.to_string()),
        }
    }
}

impl From<PotentialError> for CliError {
    fn from(e: PotentialError) -> Self {
        match e {
            PotentialError::Per1(p) => p.into(),
            PotentialError::Numerical(_) => CliError::NonConvergence(e.to_string()),
            PotentialError::InvalidTolerance
            | PotentialError::GridTooSmall(_)
            | PotentialError::InvalidWeights(_)
            | PotentialError::TooShallow(_)
            | PotentialError::ZeroPoint => CliError::Usage(e.to_string()),
            e => CliError::Failed(e.to_string()),
        }
    }
}

impl From<HeightError> for CliError {
    fn from(e: HeightError) -> Self {
        match e {
            HeightError::Potential(p) => p.into(),
            HeightError::Per1(p) => p.into(),
            HeightError::InvalidDepth(..) | HeightError::InvalidDelta | HeightError::InvalidPrimeBound => {
                CliError::Usage(e.to_string())
            }
            e => CliError::Failed(e.to_string()),
        }
    }
}

impl From<EquilabError> for CliError {
    fn from(e: EquilabError) -> Self {
        match e {
            EquilabError::Per1(p) => p.into(),
            EquilabError::Potential(p) => p.into(),
            EquilabError::Io(io) => CliError::Failed(io.to_string()),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "heightlab", version, about = "Canonical heights and potentials for f_t(z) = lambda z / (z^2 + t z + 1)")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags mirroring the configuration keys.
#[derive(Debug, Args, Default)]
pub struct GlobalArgs {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// `std` or `paper-literal`.
    #[arg(long, global = true)]
    pub lift: Option<String>,
    /// `log-plain` or `log-plus`.
    #[arg(long, global = true)]
    pub escape: Option<String>,
    /// Prime bound of truncated place sums.
    #[arg(long = "P", global = true)]
    pub p_bound: Option<String>,
    #[arg(long, global = true)]
    pub n_max: Option<String>,
    #[arg(long, global = true)]
    pub grid: Option<String>,
    #[arg(long, global = true)]
    pub tol: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    #[arg(long, global = true)]
    pub precision_digits: Option<String>,
    #[arg(long, global = true)]
    pub cache_dir: Option<String>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl GlobalArgs {
    fn flags(&self) -> Vec<(&'static str, String)> {
        let pairs: [(&'static str, &Option<String>); 10] = [
            ("lambda", &self.lambda),
            ("lift", &self.lift),
            ("escape", &self.escape),
            ("P", &self.p_bound),
            ("n_max", &self.n_max),
            ("grid", &self.grid),
            ("tol", &self.tol),
            ("seed", &self.seed),
            ("precision_digits", &self.precision_digits),
            ("cache_dir", &self.cache_dir),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k, v))).collect()
    }

    /// The merged configuration.
    pub fn config(&self) -> Result<Config, CliError> {
        let file = match &self.config {
            Some(p) => Some(
                std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?,
            ),
            None => None,
        };
        let env = std::env::var(config::CACHE_ENV).ok();
        Config::resolve(file.as_deref(), env.as_deref(), &self.flags())
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// gamma_v(lambda) at infinity and every prime up to P.
    Gamma,
    /// The critical-orbit lift F_n for one sign.
    Fn {
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        sign: String,
        /// Level; defaults to n_max.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Capacity estimates from the resultants of F_1..F_{n_max}.
    Capacity {
        /// Restrict to one sign.
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<String>,
        /// Places, comma separated (`inf`, primes); defaults to inf and p <= P.
        #[arg(long)]
        place: Option<String>,
    },
    /// Sampled inner and outer radii of the filled sets.
    Radii {
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<String>,
        #[arg(long, default_value = "inf")]
        place: String,
    },
    /// Height of a rational parameter.
    Height {
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        sign: String,
        /// quasi-adelic, callsilverman-local, callsilverman-direct or combined.
        #[arg(long, default_value = "quasi-adelic")]
        method: String,
        /// Iteration depth of callsilverman-direct.
        #[arg(long, default_value_t = 16)]
        depth: usize,
        /// Proxy level for the L estimate of the combined height.
        #[arg(long, default_value_t = 7)]
        level: usize,
    },
    /// PCF classification of rational parameters.
    PcfScan {
        /// Explicit parameters, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
        /// Otherwise all rationals a/b with max(|a|, b) <= bound.
        #[arg(long, default_value_t = 5)]
        bound: u64,
        #[arg(long, default_value_t = 64)]
        budget: usize,
    },
    /// Build S_n, export its point cloud and an annulus histogram.
    Equidist {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        sign: String,
        /// CSV point cloud destination.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Annulus outer radii around 0, comma separated.
        #[arg(long, default_value = "0.5,1,2,4")]
        bins: String,
    },
    /// Archimedean pair energies of S_n along a list of levels.
    Energy {
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        sign: String,
        #[arg(long, default_value = "1,3,5,7")]
        levels: String,
    },
    /// The L estimate, the combined height at t and an optional finiteness scan.
    Lcheck {
        #[arg(long, default_value_t = 7)]
        level: usize,
        #[arg(long, default_value_t = 8)]
        blocks: usize,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        t: String,
        /// Report rationals with combined height below -delta.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 3)]
        bound: u64,
    },
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("heightlab: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command and writes its report.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = cli.global.config()?;
    let report = commands::dispatch(&cli.command, &cfg)?;
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Failed(e.to_string()))?;
    text.push('\n');
    match &cli.global.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
