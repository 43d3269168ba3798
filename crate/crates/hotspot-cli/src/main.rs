//! `hotspot` — prediction, steady solving, time integration, batch
//! sweeps, and nondegeneracy checks for the crime-hotspot
//! reaction–diffusion model, reporting as deterministic JSON.

mod config;
mod csvio;
mod fail;
mod nlep_check;
mod predict;
mod report;
mod simulate;
mod steady;
mod sweep;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Mode;
use fail::Failure;
use predict::Target;

#[derive(Parser)]
#[command(
    name = "hotspot",
    version,
    about = "Spike patterns of a reaction–diffusion model of crime hotspots",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModeArgs {
    /// Pattern family to work with.
    #[arg(long, value_enum)]
    mode: Mode,
    /// Spike count for the equal-amplitude family.
    #[arg(long = "K", default_value_t = 1)]
    k: usize,
    /// Tall-spike count for the two-amplitude family.
    #[arg(long, default_value_t = 1)]
    k1: usize,
    /// Short-spike count for the two-amplitude family.
    #[arg(long, default_value_t = 1)]
    k2: usize,
}

impl ModeArgs {
    fn target(&self) -> Target {
        Target {
            mode: self.mode,
            k: self.k,
            k1: self.k1,
            k2: self.k2,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the asymptotic prediction for a configuration.
    ///
    /// Exit code 3 means the two-amplitude quadratic has no admissible
    /// root; the classification JSON is still printed.
    Predict {
        /// TOML configuration file.
        config: PathBuf,
        #[command(flatten)]
        mode_args: ModeArgs,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Integrate the evolution equations from configured initial data.
    ///
    /// Initial data comes from the config's [initial] table:
    /// kind = "uniform" perturbs the flat state A by
    /// A*(1 + amplitude*cos(pi*spike_count*x/L)), defaulting to
    /// spike_count 1 and amplitude 0.05; kind = "ansatz" starts from
    /// the predicted spike profile of a mode; kind = "file" reads a
    /// previous snapshot CSV. Omitting the table means "uniform".
    /// Snapshots land in --out-dir as snap_NNNN.csv with columns
    /// x,A,rho,v; --t-max 0 writes the initial snapshot and stops.
    /// Exit code 5 means the field blew up; the last stable snapshot
    /// path is reported on stderr.
    Simulate {
        /// TOML configuration file.
        config: PathBuf,
        /// Integration horizon (model time units).
        #[arg(long, default_value_t = 400.0)]
        t_max: f64,
        /// First step size (adapted afterwards); default picks one from
        /// the reaction scale.
        #[arg(long)]
        dt0: Option<f64>,
        /// Keep every Nth accepted step as a snapshot (0 = only first
        /// and last).
        #[arg(long, default_value_t = 0)]
        snap_every: usize,
        /// Stop early when the steady metric drops below this.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Relative spike-detection threshold in (0, 1).
        #[arg(long, default_value_t = 0.25)]
        threshold: f64,
        /// Directory for snapshot CSVs.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Refine the predicted pattern with a Newton solve and compare.
    ///
    /// Exit code 4 means the solve did not converge (the report still
    /// records the attempt); 3 means there was no pattern to refine.
    Steady {
        /// TOML configuration file.
        config: PathBuf,
        #[command(flatten)]
        mode_args: ModeArgs,
        /// Relative spike-detection threshold; defaults to 0.25, or
        /// 0.05 for the two-amplitude family.
        #[arg(long)]
        threshold: Option<f64>,
        /// Newton residual tolerance (envelope norm).
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Newton iteration cap.
        #[arg(long, default_value_t = 60)]
        max_iter: usize,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Check the prediction against steady solves over shrinking ε.
    ///
    /// Exit code 4 means some ε failed to converge or the error trend
    /// did not improve; the per-ε rows are in the report either way.
    Validate {
        /// TOML configuration file.
        config: PathBuf,
        #[command(flatten)]
        mode_args: ModeArgs,
        /// Comma-separated ε values, strictly descending.
        #[arg(long, value_delimiter = ',', required = true)]
        eps_list: Vec<f64>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Report see-saw eigenvalues and layout-Jacobian diagnostics.
    ///
    /// Exit code 3 means no admissible two-amplitude root exists; the
    /// classification and scale flags are still printed.
    NlepCheck {
        /// TOML configuration file.
        config: PathBuf,
        /// Tall-spike count.
        #[arg(long, default_value_t = 1)]
        k1: usize,
        /// Short-spike count.
        #[arg(long, default_value_t = 1)]
        k2: usize,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Predict across many configurations concurrently.
    ///
    /// Items appear in input order. A config that fails to load or
    /// validate turns the exit code to 2 after the report is written;
    /// a no-solution classification does not.
    Sweep {
        /// TOML configuration files (one prediction each).
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[command(flatten)]
        mode_args: ModeArgs,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run() -> Result<(), Failure> {
    match Cli::parse().command {
        Command::Predict {
            config,
            mode_args,
            out,
        } => predict::cmd_predict(&config, &mode_args.target(), out.as_deref()),
        Command::Simulate {
            config,
            t_max,
            dt0,
            snap_every,
            tol,
            threshold,
            out_dir,
            out,
        } => simulate::cmd_simulate(
            &config,
            t_max,
            dt0,
            snap_every,
            tol,
            threshold,
            &out_dir,
            out.as_deref(),
        ),
        Command::Steady {
            config,
            mode_args,
            threshold,
            tol,
            max_iter,
            out,
        } => steady::cmd_steady(
            &config,
            &mode_args.target(),
            threshold,
            tol,
            max_iter,
            out.as_deref(),
        ),
        Command::Validate {
            config,
            mode_args,
            eps_list,
            out,
        } => validate::cmd_validate(&config, &mode_args.target(), &eps_list, out.as_deref()),
        Command::NlepCheck {
            config,
            k1,
            k2,
            out,
        } => nlep_check::cmd_nlep_check(&config, k1, k2, out.as_deref()),
        Command::Sweep {
            configs,
            mode_args,
            out,
        } => sweep::cmd_sweep(&configs, &mode_args.target(), out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("hotspot: {failure}");
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
