//! `catsim`: reproducible experiment runner for the cat-code simulator.
//! Exit codes: 0 success, 2 usage or validation problem, 3 violated
//! numerical contract (norm drift, truncation overflow, ...).

mod commands;
mod config;

use catsim::qec::GateMode;
use clap::{Parser, Subcommand, ValueEnum};
use config::{defaults, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "catsim", version, about = "cat-code qubit experiments")]
struct Cli {
    /// Run from a JSON configuration instead of a subcommand
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Code-word distinguishability ratios over an (alpha, eta) grid
    Ratios {
        /// Cat amplitudes, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
        /// Survival probabilities, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        eta: Vec<f64>,
        /// Uniformity tolerance for the pass column
        #[arg(long, default_value_t = defaults::kl_tol())]
        kl_tol: f64,
        /// Fock dimension override (default: sized from alpha)
        #[arg(long)]
        dim: Option<usize>,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ramped cat preparation: CSV trajectory plus JSON summary
    Adiabatic {
        /// linear:rate=<r> or tanh:k0=<k>,lambda=<l>
        #[arg(long, default_value = "tanh:k0=4,lambda=0.1")]
        schedule: String,
        /// Kerr coefficient
        #[arg(long, default_value_t = defaults::chi())]
        chi: f64,
        /// even or odd
        #[arg(long, default_value = "even")]
        parity: String,
        /// Total ramp time
        #[arg(long, default_value_t = defaults::t_final())]
        t_final: f64,
        /// Integrator step
        #[arg(long, default_value_t = defaults::dt())]
        dt: f64,
        /// Record every Nth step
        #[arg(long, default_value_t = defaults::sample_every())]
        sample_every: usize,
        /// Fock dimension
        #[arg(long, default_value_t = defaults::dim())]
        dim: usize,
        /// Fraction of the time span scored as steady state
        #[arg(long, default_value_t = defaults::tail_fraction())]
        tail_fraction: f64,
        /// Trajectory CSV path
        #[arg(long, default_value = "trajectory.csv")]
        out: PathBuf,
    },
    /// Monte Carlo single-jump protection of a cat code word
    Qec {
        /// Cat amplitude of the protected word
        #[arg(long)]
        alpha: f64,
        /// Survival probability; shorthand for gamma=1, t=-ln(eta)
        #[arg(long, conflicts_with_all = ["gamma", "t"])]
        eta: Option<f64>,
        /// Damping rate (pair with --t)
        #[arg(long, requires = "t")]
        gamma: Option<f64>,
        /// Exposure time (pair with --gamma)
        #[arg(long, requires = "gamma")]
        t: Option<f64>,
        /// Number of Monte Carlo trials
        #[arg(long, default_value_t = defaults::trials())]
        trials: u64,
        /// Base seed; trial i uses stream i
        #[arg(long, default_value_t = defaults::seed())]
        seed: u64,
        /// Gate realisation: ideal parity kicks or the trapped-ion pulse
        #[arg(long, value_enum, default_value_t = GateModeArg::Exact)]
        gate_mode: GateModeArg,
        /// Fock dimension override (default: sized from alpha)
        #[arg(long)]
        dim: Option<usize>,
        /// Write the JSON summary here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time until the decayed code words stop being distinguishable
    ResetBudget {
        /// Initial cat amplitude
        #[arg(long)]
        alpha0: f64,
        /// Damping rate
        #[arg(long)]
        gamma: f64,
        /// Acceptable distinguishability loss, in (0, 1)
        #[arg(long)]
        tolerance: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GateModeArg {
    /// Ideal parity-controlled NOT
    Exact,
    /// Trapped-ion coupling with default carrier strength and Lamb-Dicke
    /// parameter
    Ion,
}

fn build_config(cli: Cli) -> Result<RunConfig, String> {
    match (cli.config, cli.command) {
        (Some(_), Some(_)) => Err("--config conflicts with a subcommand".into()),
        (None, None) => Err("nothing to do: pass a subcommand or --config".into()),
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("bad config: {e}"))
        }
        (None, Some(cmd)) => Ok(match cmd {
            Cmd::Ratios { alpha, eta, kl_tol, dim, out } => {
                RunConfig::Ratios { alpha, eta, kl_tol, dim, out }
            }
            Cmd::Adiabatic {
                schedule,
                chi,
                parity,
                t_final,
                dt,
                sample_every,
                dim,
                tail_fraction,
                out,
            } => RunConfig::Adiabatic {
                schedule,
                chi,
                parity,
                t_final,
                dt,
                sample_every,
                dim,
                tail_fraction,
                out,
            },
            Cmd::Qec { alpha, eta, gamma, t, trials, seed, gate_mode, dim, out } => {
                let (gamma, t) = match (eta, gamma, t) {
                    (Some(eta), None, None) => {
                        if !(eta > 0.0 && eta <= 1.0) {
                            return Err(format!("eta must lie in (0, 1], got {eta}"));
                        }
                        (1.0, -eta.ln())
                    }
                    (None, Some(gamma), Some(t)) => (gamma, t),
                    _ => return Err("pass either --eta or both --gamma and --t".into()),
                };
                let gate_mode = match gate_mode {
                    GateModeArg::Exact => GateMode::Exact,
                    GateModeArg::Ion => GateMode::ion_default(),
                };
                RunConfig::Qec { alpha, gamma, t, trials, seed, gate_mode, dim, out }
            }
            Cmd::ResetBudget { alpha0, gamma, tolerance } => {
                RunConfig::ResetBudget { alpha0, gamma, tolerance }
            }
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(cli) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    match commands::run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            match error {
                catsim::Error::Input(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
