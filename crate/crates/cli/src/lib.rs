//! Command-line pipeline around `torus_bnf`: compute a normal form,
//! diagnose its Gevrey growth, verify flatness and stability, and run the
//! inequality suites.

pub mod commands;
pub mod output;
pub mod problem;

use std::fmt;

use clap::{Parser, Subcommand, ValueEnum};
use torus_bnf::Error;

pub use commands::{cmd_checks, cmd_compute, cmd_diagnose, cmd_verify};

/// Exit status for schema, I/O and missing-data errors.
pub const EXIT_SCHEMA: i32 = 2;
/// Exit status for resonant frequencies.
pub const EXIT_RESONANT: i32 = 3;
/// Exit status when the flatness slope falls short.
pub const EXIT_SLOPE: i32 = 4;
/// Exit status for failed checks and other errors.
pub const EXIT_FAILED: i32 = 1;

/// An error with its process exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    pub fn schema(message: impl Into<String>) -> Self {
        Self::new(EXIT_SCHEMA, message)
    }

    pub fn from_core(e: Error) -> Self {
        let code = if problem::is_resonance(&e) {
            EXIT_RESONANT
        } else {
            match e {
                Error::MissingData(_)
                | Error::DimensionMismatch { .. }
                | Error::InvalidParameter(_)
                | Error::DegreeMismatch { .. }
                | Error::NotHermitian { .. }
                | Error::Format(_) => EXIT_SCHEMA,
                _ => EXIT_FAILED,
            }
        };
        Failure::new(code, e.to_string())
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Failure::schema(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

#[derive(Debug, Parser)]
#[command(name = "bnf", version, about = "Birkhoff normal forms near Kronecker tori")]
pub struct Cli {
    /// Worker threads for the data-parallel kernels (default: all cores).
    #[arg(long, global = true, env = "BNF_WORKERS")]
    pub workers: Option<usize>,
    /// Seed for every sampled check.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Wiener,
    Gamma,
    Combinatorics,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the normal-form recursion on a problem file.
    Compute {
        problem: std::path::PathBuf,
        /// Highest order M (overrides the problem file).
        #[arg(long)]
        order: Option<usize>,
        /// Keep B_m in the result (default: only when M < 8).
        #[arg(long)]
        retain_b: Option<bool>,
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Norm profiles, fitted Gevrey constants and truncation estimates.
    Diagnose {
        result: std::path::PathBuf,
        /// Comma-separated smoothness weights.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5")]
        s_grid: Vec<f64>,
        /// Comma-separated action radii for the truncation table.
        #[arg(long, value_delimiter = ',', default_value = "1e-6,1e-5,1e-4,1e-3,1e-2")]
        radii: Vec<f64>,
        /// Product tuples sampled per length in the lemma checks.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Flatness scan of the transformed Hamiltonian and escape times.
    Verify {
        problem: std::path::PathBuf,
        result: std::path::PathBuf,
        /// Smallest and largest radius of the flatness scan.
        #[arg(long, value_delimiter = ',', default_value = "1e-3,1e-2")]
        radii: Vec<f64>,
        /// Number of log-spaced radii.
        #[arg(long, default_value_t = 8)]
        count: usize,
        /// Samples per radius.
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Time cap of the escape-time runs (0 skips them).
        #[arg(long, default_value_t = 1e3)]
        horizon: f64,
        /// Initial action radii of the escape-time runs.
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05")]
        escape_radii: Vec<f64>,
        #[arg(long, default_value_t = 2.0)]
        band: f64,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Inequality suites; prints a JSON report.
    Checks {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

/// Configure the thread pool. Repeated calls keep the first setting.
pub fn init_workers(workers: Option<usize>) {
    if let Some(n) = workers {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Run a parsed command line and return the exit status.
pub fn run(cli: Cli) -> i32 {
    init_workers(cli.workers);
    let seed = cli.seed;
    let outcome = match cli.command {
        Command::Compute {
            problem,
            order,
            retain_b,
            out,
        } => cmd_compute(&problem, order, retain_b, &out),
        Command::Diagnose {
            result,
            s_grid,
            radii,
            samples,
            out,
        } => cmd_diagnose(&result, &s_grid, &radii, samples, seed, &out),
        Command::Verify {
            problem,
            result,
            radii,
            count,
            samples,
            horizon,
            escape_radii,
            band,
            dt,
            out,
        } => {
            let opts = commands::VerifyOptions {
                radii,
                count,
                samples,
                horizon,
                escape_radii,
                band,
                dt,
                seed,
            };
            cmd_verify(&problem, &result, &opts, &out)
        }
        Command::Checks { suite, out } => cmd_checks(suite, seed, out.as_deref()),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {f}");
            f.code
        }
    }
}
