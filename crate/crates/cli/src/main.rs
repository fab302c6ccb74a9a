use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use twrn_cli::{run_solve, run_sweep, run_verify, RunConfig, StrategyChoice, VerifyOptions};

#[derive(Parser)]
#[command(
    name = "twrn",
    about = "Minimum-energy resource allocation for fading two-way relay networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOverrides {
    /// Run configuration file (flat key = value)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override the channel seed
    #[arg(long)]
    seed: Option<u64>,

    /// Override the number of channel samples
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one strategy at one rate pair and print the result row
    Solve {
        #[command(flatten)]
        common: CommonOverrides,

        /// Strategy id: pnc_zp, pnc_sup, dnc_ts, dnc_sup, cw_sup or popt
        #[arg(long)]
        strategy: String,

        /// Required average rate from source 1 to source 2 (frames/slot)
        #[arg(long)]
        lambda1: f64,

        /// Required average rate from source 2 to source 1 (frames/slot)
        #[arg(long)]
        lambda2: f64,
    },
    /// Run the full (strategy, rate-pair) table of a config to its output file
    Sweep {
        #[command(flatten)]
        common: CommonOverrides,
    },
    /// Run the brute-force verification suites
    Verify {
        /// Master seed for the randomized sweeps
        #[arg(long, default_value_t = VerifyOptions::default().seed)]
        seed: u64,

        /// Trials per downlink-dominance sweep
        #[arg(long, default_value_t = VerifyOptions::default().dominance_trials)]
        trials_dominance: usize,

        /// Random inputs per allocator oracle
        #[arg(long, default_value_t = VerifyOptions::default().oracle_trials)]
        trials_oracle: usize,

        /// Grid resolution (points per axis)
        #[arg(long, default_value_t = VerifyOptions::default().grid_points)]
        grid_points: usize,
    },
}

const EXIT_RUNTIME: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn load_config(common: &CommonOverrides) -> Result<RunConfig, (u8, String)> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| (EXIT_USAGE, format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(|e| (EXIT_USAGE, format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.fading.seed = seed;
    }
    if let Some(n) = common.samples {
        cfg.fading.n_samples = n;
    }
    Ok(cfg)
}

/// Bad values reaching the solver are usage problems; everything else is a
/// runtime failure.
fn classify(e: twrn_core::Error) -> (u8, String) {
    let code = match &e {
        twrn_core::Error::Config { .. } => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    };
    (code, e.to_string())
}

fn run() -> Result<(), (u8, String)> {
    match Cli::parse().command {
        Command::Solve {
            common,
            strategy,
            lambda1,
            lambda2,
        } => {
            let cfg = load_config(&common)?;
            let choice: StrategyChoice = strategy.parse().map_err(|e: String| (EXIT_USAGE, e))?;
            let (_, text) = run_solve(&cfg, choice, lambda1, lambda2).map_err(classify)?;
            print!("{text}");
            Ok(())
        }
        Command::Sweep { common } => {
            if common.config.is_none() {
                return Err((EXIT_USAGE, "sweep requires --config".into()));
            }
            let cfg = load_config(&common)?;
            cfg.validate_for_sweep()
                .map_err(|e| (EXIT_USAGE, e.to_string()))?;
            let out = run_sweep(&cfg).map_err(|e| (EXIT_RUNTIME, e.to_string()))?;
            let path = cfg.output_path.as_ref().expect("validated");
            fs::write(path, out.render()).map_err(|e| {
                (
                    EXIT_RUNTIME,
                    format!("cannot write {}: {e}", path.display()),
                )
            })?;
            if out.all_converged {
                Ok(())
            } else {
                Err((EXIT_RUNTIME, "one or more solves did not converge".into()))
            }
        }
        Command::Verify {
            seed,
            trials_dominance,
            trials_oracle,
            grid_points,
        } => {
            let opts = VerifyOptions {
                seed,
                dominance_trials: trials_dominance,
                oracle_trials: trials_oracle,
                grid_points,
                static_points: grid_points,
            };
            opts.validate().map_err(|e| (EXIT_USAGE, e))?;
            let (report, all_passed) =
                run_verify(&opts).map_err(|e| (EXIT_RUNTIME, e.to_string()))?;
            print!("{report}");
            if all_passed {
                Ok(())
            } else {
                Err((EXIT_RUNTIME, "verification failures detected".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
