//! `cluster-virial`: batch front end for ground states, Mayer and virial
//! coefficients, low-temperature scans and the acceptance checks.

mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::Format;
use failure::{usage, Failure};

const OUTPUT_HELP: &str = "\
Output files (in --out, default `.`):
  groundstate.json   table with configurations and thresholds
  groundstate.csv    k,energy,method,connected
  mayer.csv          k,beta,value,std_err,method
  zcl.csv            k,beta,value,std_err,method   (connected partition function)
  maylt.json         low-temperature diagnostic (with --ground-states)
  virial.csv         n,beta,d_n,c_n,provenance,propagated_error
  radius.json, sign_pattern.json, rhozero.json
  thermo_scan.csv    beta,mu_or_nu,value,target,label
  verify.json        one record per criterion
With --format json every table is written as <name>.json instead.

Exit codes: 0 success, 1 criterion failure, 2 usage error, 3 numerical failure.
CLUSTER_VIRIAL_THREADS caps the number of worker threads.";

#[derive(Debug, Parser)]
#[command(name = "cluster-virial", version, about, after_help = OUTPUT_HELP)]
pub struct Cli {
    /// TOML file with [potential], [grid], [sampler] and [output] sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// `kind[:key=value,...]` (square_well, ramp_well, two_well, soft_disk) or a .toml/.json file.
    #[arg(long, global = true)]
    pub potential: Option<String>,
    /// Inverse temperatures: `1,2,4,8` or `start:stop:step`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta_grid: Option<String>,
    /// Largest cluster size K.
    #[arg(long, global = true)]
    pub kmax: Option<usize>,
    /// Largest virial order N (at most K).
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Monte Carlo samples per estimate.
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    /// Seed for Monte Carlo and the optimizer.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroundStateMethodArg {
    Oracle,
    Optimizer,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ground-state energies E_1..E_K and derived thresholds.
    Groundstate {
        /// Default: oracle in one dimension, optimizer otherwise.
        #[arg(long, value_enum)]
        method: Option<GroundStateMethodArg>,
        /// Gap grid step of the one-dimensional oracle.
        #[arg(long, default_value_t = 0.02)]
        grid_step: f64,
        /// Optimizer multistarts.
        #[arg(long)]
        starts: Option<usize>,
    },
    /// Mayer coefficients b_k(beta) and connected partition functions.
    Mayer {
        /// auto, quadrature, monte_carlo or both.
        #[arg(long)]
        method: Option<String>,
        /// Ground-state table for the low-temperature diagnostic.
        #[arg(long)]
        ground_states: Option<PathBuf>,
    },
    /// Virial coefficients from a Mayer table, with radius, sign and root reports.
    Virial {
        /// Mayer table written by `mayer` (.csv or .json).
        #[arg(long)]
        mayer: PathBuf,
        /// Ground-state table for sign-pattern and radius reports.
        #[arg(long)]
        ground_states: Option<PathBuf>,
        /// Fail unless c_n = -(n-1) d_n on every row.
        #[arg(long)]
        check_consistency: bool,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Runs the acceptance criteria.
    Verify {
        /// Comma-separated numbers, names or groups (all, identities, mayer, virial, thermo).
        #[arg(long, default_value = "all")]
        criteria: String,
        /// Corrupts one transform coefficient to exercise the identity checks.
        #[arg(long)]
        inject_fault: bool,
    },
    /// Variational thermodynamics on a ground-state table.
    Thermo {
        #[command(subcommand)]
        command: ThermoCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum ThermoCommand {
    /// nu(mu), mu(nu) and region labels; with --mu and --beta-grid also the cross-over curves.
    Scan {
        /// Ground-state table; computed from --potential when absent.
        #[arg(long)]
        ground_states: Option<PathBuf>,
        /// Chemical potentials: list or start:stop:step.
        #[arg(long, allow_hyphen_values = true)]
        mu_grid: Option<String>,
        /// Density exponents nu: list or start:stop:step.
        #[arg(long)]
        nu_grid: Option<String>,
        /// Chemical potential of the cross-over scan.
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<f64>,
    },
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("CLUSTER_VIRIAL_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            usage(anyhow::anyhow!(
                "CLUSTER_VIRIAL_THREADS must be a positive integer, got `{value}`"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(usage)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| commands::run(cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}
