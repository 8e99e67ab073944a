//! `migopt` — train a counter-profile-driven performance model for
//! partitionable, power-capped GPUs and pick co-location setups with it.
//!
//! Exit codes: 0 on success, 2 when a policy problem has no feasible
//! candidate, 1 on every other error (reported as one JSON object on
//! stderr).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod manifest;

use commands::Outcome;
use manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "migopt",
    version,
    about = "Partitioning, power-cap and job-allocation decisions for co-located GPU workloads"
)]
struct Cli {
    /// Manifest file supplying default paths and policy parameters.
    #[arg(long, global = true, env = "MIGOPT_MANIFEST")]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic profile/training datasets from the built-in oracle.
    Synth {
        /// Directory receiving profiles.jsonl and training.jsonl (must exist).
        #[arg(long)]
        out_dir: PathBuf,
        /// Oracle parameter file (defaults are built in).
        #[arg(long, env = "MIGOPT_ORACLE_CONFIG")]
        oracle_config: Option<PathBuf>,
        /// State-space config file (defaults are built in).
        #[arg(long, env = "MIGOPT_STATES")]
        states: Option<PathBuf>,
        /// Override the oracle's noise seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the oracle's measurement-noise sigma.
        #[arg(long)]
        noise_sigma: Option<f64>,
    },
    /// Fit model coefficients from a profile and a training dataset.
    Train {
        #[arg(long, env = "MIGOPT_PROFILES")]
        profiles: Option<PathBuf>,
        #[arg(long, env = "MIGOPT_TRAINING")]
        training: Option<PathBuf>,
        /// Where to write the coefficient file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "MIGOPT_STATES")]
        states: Option<PathBuf>,
    },
    /// Pick the best (state, power) for a set of profiled applications.
    Solve {
        #[arg(long, env = "MIGOPT_COEFFS")]
        coeffs: Option<PathBuf>,
        #[arg(long, env = "MIGOPT_PROFILES")]
        profiles: Option<PathBuf>,
        /// p1 (throughput at a fixed cap) or p2 (throughput per watt).
        #[arg(long)]
        problem: Option<String>,
        /// Fairness threshold.
        #[arg(long)]
        alpha: Option<f64>,
        /// Power cap in watts (p1 only).
        #[arg(long)]
        power_w: Option<u32>,
        /// Comma-separated app ids, in slot order.
        #[arg(long)]
        apps: Option<String>,
        #[arg(long, env = "MIGOPT_STATES")]
        states: Option<PathBuf>,
        /// Use greedy hill climbing instead of exhaustive search.
        #[arg(long)]
        hill_climb: bool,
        /// Also write the report to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score the solver against oracle ground truth (worst/proposal/best).
    Eval {
        #[arg(long, env = "MIGOPT_COEFFS")]
        coeffs: Option<PathBuf>,
        #[arg(long, env = "MIGOPT_ORACLE_CONFIG")]
        oracle_config: Option<PathBuf>,
        #[arg(long, env = "MIGOPT_STATES")]
        states: Option<PathBuf>,
        /// p1 or p2.
        #[arg(long)]
        problem: Option<String>,
        /// Fairness threshold(s); comma-separated values sweep alpha.
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,
        /// Power cap in watts (p1 only).
        #[arg(long)]
        power_w: Option<u32>,
        /// Also write the report to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify applications into TI/CI/MI/US behavior classes.
    Classify {
        #[arg(long, env = "MIGOPT_PROFILES")]
        profiles: Option<PathBuf>,
        /// Training dataset supplying the minimum-allocation observations.
        #[arg(long, env = "MIGOPT_TRAINING")]
        training: Option<PathBuf>,
        /// Classify the built-in oracle suite instead of profile files.
        #[arg(long)]
        use_oracle: bool,
        #[arg(long, env = "MIGOPT_ORACLE_CONFIG")]
        oracle_config: Option<PathBuf>,
        #[arg(long, env = "MIGOPT_STATES")]
        states: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let manifest = RunManifest::load(cli.manifest.as_deref())?;
    match cli.command {
        Command::Synth {
            out_dir,
            oracle_config,
            states,
            seed,
            noise_sigma,
        } => commands::synth(
            commands::SynthOptions {
                out_dir,
                oracle_config,
                states,
                seed,
                noise_sigma,
            },
            &manifest,
        ),
        Command::Train {
            profiles,
            training,
            out,
            states,
        } => commands::train(
            commands::TrainOptions {
                profiles,
                training,
                out,
                states,
            },
            &manifest,
        ),
        Command::Solve {
            coeffs,
            profiles,
            problem,
            alpha,
            power_w,
            apps,
            states,
            hill_climb,
            out,
        } => commands::solve_cmd(
            commands::SolveOptions {
                coeffs,
                profiles,
                problem,
                alpha,
                power_w,
                apps,
                states,
                hill_climb,
                out,
            },
            &manifest,
        ),
        Command::Eval {
            coeffs,
            oracle_config,
            states,
            problem,
            alpha,
            power_w,
            out,
        } => commands::eval_cmd(
            commands::EvalOptions {
                coeffs,
                oracle_config,
                states,
                problem,
                alphas: alpha,
                power_w,
                out,
            },
            &manifest,
        ),
        Command::Classify {
            profiles,
            training,
            use_oracle,
            oracle_config,
            states,
        } => commands::classify_cmd(
            commands::ClassifyOptions {
                profiles,
                training,
                use_oracle,
                oracle_config,
                states,
            },
            &manifest,
        ),
    }
}

fn main() -> ExitCode {
    // default SIGPIPE behavior so piping into `head` works
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(2),
        Err(err) => {
            eprintln!("{}", serde_json::json!({ "error": format!("{err:#}") }));
            ExitCode::from(1)
        }
    }
}
