//! `zml`: moments of zeta on the critical line, their modified Mellin
//! transforms, and checks of the identities those transforms satisfy.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use zml_core::cache::CacheError;
use zml_core::quadrature::QuadError;
use zml_core::special::SpecialError;
use zml_core::tauberian::TauberianError;
use zml_core::Error;

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "zml", version, about = "Moments of zeta on the critical line and their modified Mellin transforms")]
pub struct Cli {
    /// Absolute tolerance of the computation (each command has its own default).
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Sample cache file; samples are read from and written back to it.
    #[arg(long, global = true, env = "ZML_CACHE")]
    pub cache: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Seed for randomized test panels.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// |zeta(1/2 + it)|^2 on a grid of heights.
    Zeta {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t_lo: f64,
        #[arg(long)]
        t_hi: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
    },
    /// I_k(T), the 2k-th power moment up to height T.
    Moment {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long)]
        t: f64,
    },
    /// Z_k(s), the modified Mellin transform of |zeta|^{2k}.
    Mellin {
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Complex argument, e.g. `2`, `1.5+3i`, `0.6-5i`.
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
    },
    /// L_k(sigma), the Laplace transform of |zeta|^{2k}.
    Laplace {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long)]
        sigma: f64,
    },
    /// a_k, g_k and c_k of the conjectured moment asymptotics.
    Constants {
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 100_000)]
        cutoff: u64,
    },
    /// Leading coefficient of I_k from its values on a logarithmic grid.
    Tauberian {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 5.0)]
        lo: f64,
        #[arg(long, default_value_t = 5000.0)]
        hi: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Check a named identity numerically; exits 1 if the defect exceeds the
    /// combined error.
    Verify {
        #[arg(value_enum)]
        identity: Identity,
        /// Complex argument (convolution, square).
        #[arg(long, allow_hyphen_values = true)]
        s: Option<String>,
        /// Lower end of the convolution support.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Upper end of the convolution support.
        #[arg(long, default_value_t = 2.0)]
        b: f64,
        /// Randomized convolution cases in addition to f = 1.
        #[arg(long, default_value_t = 10)]
        cases: usize,
        /// Truncation of the square identity.
        #[arg(long, default_value_t = 400.0)]
        x_max: f64,
        /// Smoothing height of the Gamma-contour identity.
        #[arg(long, default_value_t = 50.0)]
        t: f64,
        /// Abscissa of the contour.
        #[arg(long, default_value_t = 1.5)]
        c: f64,
        /// Increasing truncations of the contour.
        #[arg(long, value_delimiter = ',', default_values_t = vec![20.0, 40.0, 80.0])]
        spans: Vec<f64>,
        /// Radius of the Laurent contour.
        #[arg(long, default_value_t = 0.25)]
        radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Direct,
    Continued,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Identity {
    PoleStructure,
    Convolution,
    Square,
    GammaContour,
    Laurent,
}

/// A computed check that did not hold.
#[derive(Debug)]
pub struct VerificationFailed(pub String);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

/// Invalid arguments detected after parsing.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

const EXIT_VERIFICATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CEILING: u8 = 3;
const EXIT_IO: u8 = 4;

fn special_code(e: &SpecialError) -> u8 {
    match e {
        SpecialError::ImaginaryPartTooLarge(_) | SpecialError::Overflow { .. } => EXIT_CEILING,
        SpecialError::PoleAt1 | SpecialError::PoleAtNonPositiveInteger(_) | SpecialError::Domain(_) => EXIT_USAGE,
        SpecialError::AccuracyUnreachable { .. } => EXIT_VERIFICATION,
    }
}

fn quad_code(e: &QuadError) -> u8 {
    match e {
        QuadError::InvalidInterval { .. }
        | QuadError::InvalidTolerance(_)
        | QuadError::NotAbsolutelyConvergent { .. } => EXIT_USAGE,
        QuadError::BudgetExhausted { .. } | QuadError::NonFinite(_) => EXIT_VERIFICATION,
    }
}

fn core_code(e: &Error) -> u8 {
    match e {
        Error::Special(s) => special_code(s),
        Error::Quadrature(q) => quad_code(q),
        Error::Cache(_) => EXIT_IO,
        Error::DeskScaleExceeded { .. } | Error::Overflow(_) => EXIT_CEILING,
        Error::PoleAt1
        | Error::TooCloseToAbscissa { .. }
        | Error::NotAbsolutelyConvergent { .. }
        | Error::TruncationNotClosed { .. }
        | Error::Domain(_) => EXIT_USAGE,
        Error::Tauberian(TauberianError::NotMonotone { .. }) => EXIT_VERIFICATION,
        Error::Tauberian(_) => EXIT_USAGE,
        Error::ToleranceNotMet { .. } | Error::IllConditionedFit { .. } => EXIT_VERIFICATION,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return core_code(e);
        }
        if let Some(e) = cause.downcast_ref::<SpecialError>() {
            return special_code(e);
        }
        if cause.is::<CacheError>() || cause.is::<std::io::Error>() || cause.is::<csv::Error>() {
            return EXIT_IO;
        }
        if cause.is::<Usage>() {
            return EXIT_USAGE;
        }
        if cause.is::<VerificationFailed>() {
            return EXIT_VERIFICATION;
        }
    }
    EXIT_VERIFICATION
}

fn run(cli: &Cli) -> Result<()> {
    let lab = commands::open_lab(cli.cache.as_deref())?;
    let result = commands::dispatch(cli, &lab);
    // keep whatever was sampled, even when the command itself failed
    if let Some(path) = &cli.cache {
        lab.save(path)?;
    }
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zml: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
