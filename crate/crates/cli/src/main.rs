//! `mvglide` command-line front end. Every subcommand writes CSV.
//!
//! Exit codes: 0 success, 2 bad configuration or arguments, 3 numerical
//! failure (singular multiplier, quadrature trouble, overflow).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mvglide::Nu;

#[derive(Parser)]
#[command(
    name = "mvglide",
    version,
    about = "Mean-variance glidepaths under Vasicek rates and a mean-reverting equity premium"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Where parameters come from, the initial state, and where output goes.
#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Named parameter set(s): at most one rate and one equity preset,
    /// comma separated or repeated.
    #[arg(long, value_delimiter = ',')]
    pub preset: Vec<String>,
    /// Flat `key = value` parameter file.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Initial short rate (default 0 or the file's `r0`).
    #[arg(long, allow_hyphen_values = true)]
    pub r0: Option<f64>,
    /// Initial equity premium (default x̄ or the file's `x0`).
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Rates,
    Equity,
}

fn parse_nu(s: &str) -> Result<Nu, String> {
    s.parse::<Nu>().map_err(|e| e.to_string())
}

#[derive(Subcommand)]
pub enum Command {
    /// Zero-coupon yields by maturity, one column per initial short rate.
    YieldCurve {
        #[command(flatten)]
        source: Source,
        /// Maturities in years.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0,1,2,3,5,7,10,15,20,25,30"
        )]
        maturities: Vec<f64>,
        /// Initial short rates, one column each (overridden by --r0).
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "-0.02,0,0.02,0.04,0.06"
        )]
        r0s: Vec<f64>,
    },
    /// Annualised volatility of log excess stock returns over horizons.
    VolProfile {
        #[command(flatten)]
        source: Source,
        /// Horizons in years; a final `inf` row holds the long-run limit.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "1,2,5,10,20,30,40,60,100,1000,100000"
        )]
        t: Vec<f64>,
    },
    /// Risk-reward profile (sigma, mu) of the extremal family.
    Profile {
        #[command(flatten)]
        source: Source,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long)]
        factor: Option<Factor>,
        /// Explicit multipliers; default is a compactified grid below 1/2.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_nu)]
        nus: Vec<Nu>,
        /// Size of the default grid.
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Also sweep the minimising branch (nu > 1/2).
        #[arg(long)]
        minimizing: bool,
        /// Report interior wedge points on standard error.
        #[arg(long)]
        wedge: bool,
    },
    /// Extremal strategy as a glidepath (or coefficient record).
    Strategy {
        #[command(flatten)]
        source: Source,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_nu)]
        nu: Nu,
        #[arg(long)]
        factor: Option<Factor>,
        /// Number of equal time steps in the glidepath.
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Print the equity coefficient record instead of the glidepath.
        #[arg(long)]
        coefficients: bool,
    },
    /// Risk statistics of the extremal multiplier over (T, nu) grids.
    Stats {
        #[command(flatten)]
        source: Source,
        #[arg(long = "T", value_delimiter = ',', default_value = "10,20,30,40,50,60")]
        horizons: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_nu,
              default_value = "-10,-2,-1,-1/2,-1/4,-1/16,0")]
        nu: Vec<Nu>,
        #[arg(long)]
        factor: Option<Factor>,
    },
    /// Monte Carlo check of the analytic horizon moments.
    Simulate {
        #[command(flatten)]
        source: Source,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_nu)]
        nu: Nu,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        /// Time steps per year.
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        antithetic: bool,
        /// Also write the raw terminal log values to this file.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Solution type of the equity extremal for each multiplier.
    Classify {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_nu, required = true)]
        nu: Vec<Nu>,
    },
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(m) = cause.downcast_ref::<mvglide::Error>() {
            return if m.is_numerical() { 3 } else { 2 };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
