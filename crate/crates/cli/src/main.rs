use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ssreg_cli::commands::{cmd_gen_system, cmd_identify, cmd_track};
use ssreg_cli::config::{EtaSpec, ExperimentConfig};
use ssreg_cli::error::CliError;
use ssreg_cli::montecarlo::cmd_montecarlo_gain;

/// Data-driven steady-state gain identification and online gradient
/// control experiments.
#[derive(Parser)]
#[command(name = "ssreg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration as a JSON document.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Trial count override for Monte Carlo campaigns.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Absolute controller step size.
    #[arg(long, global = true, conflicts_with = "eta_frac")]
    eta: Option<f64>,

    /// Controller step size as a fraction of the certified eta_star.
    #[arg(long = "eta-frac", global = true)]
    eta_frac: Option<f64>,

    /// Closed-loop horizon override.
    #[arg(long, global = true)]
    horizon: Option<usize>,

    /// Output directory for all artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the steady-state gain from data.
    Identify,
    /// Aggregate the rolling estimation error over disturbance realizations.
    MontecarloGain,
    /// Identify the gain, certify a step size and run the closed loop.
    Track,
    /// Generate a random admissible system and store it as JSON.
    GenSystem,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            ExperimentConfig::from_json_str(&text).map_err(CliError::Config)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if let Some(eta) = cli.eta {
        cfg.eta = EtaSpec::Absolute { absolute: eta };
    }
    if let Some(frac) = cli.eta_frac {
        cfg.eta = EtaSpec::Fraction {
            fraction_of_eta_star: frac,
        };
    }
    if let Some(horizon) = cli.horizon {
        cfg.horizon = horizon;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate().map_err(CliError::Config)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    match cli.command {
        Command::GenSystem => {
            let path = cmd_gen_system(&cfg)?;
            println!("wrote {}", path.display());
        }
        Command::Identify => {
            let outcome = cmd_identify(&cfg)?;
            println!(
                "method {} window ({}, {}) residual_equality {:.3e} residual_identity {:.3e}",
                outcome.estimate.method.as_str(),
                outcome.estimate.window.0,
                outcome.estimate.window.1,
                outcome.estimate.residual_equality,
                outcome.estimate.residual_identity,
            );
            if outcome.windows > 1 {
                println!(
                    "windows {} skipped {}",
                    outcome.windows, outcome.skipped_windows
                );
            }
            if let Some(err) = outcome.err_fro {
                println!("error_vs_oracle_fro {err:.6e}");
            }
            println!("artifacts in {}", cfg.out_dir.display());
        }
        Command::MontecarloGain => {
            let summary = cmd_montecarlo_gain(&cfg)?;
            let last = summary.rows.last();
            println!(
                "trials {} windows {} final_mean_err {}",
                summary.trials,
                summary.rows.len(),
                last.map_or(f64::NAN, |r| r.mean_err)
            );
            println!("artifacts in {}", cfg.out_dir.display());
        }
        Command::Track => {
            let outcome = cmd_track(&cfg)?;
            println!(
                "eta {:.6e} (eta_star {:.6e}, eta_static {:.6e})",
                outcome.eta, outcome.certificate.eta_star, outcome.certificate.eta_static
            );
            println!(
                "steps {} terminal_tracking_error {:.6e} decrease_violations {}",
                outcome.steps, outcome.terminal_tracking_error, outcome.decrease_violations
            );
            println!("artifacts in {}", cfg.out_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
