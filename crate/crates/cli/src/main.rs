mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::BackwardArgs;
use crate::config::Sources;
use crate::error::CliError;

/// Backward time-fractional diffusion by spectral mollification.
#[derive(Debug, Parser)]
#[command(name = "subdiff", version)]
struct Cli {
    /// Configuration file with `key = value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Let SUBDIFF_<KEY> environment variables override the file.
    #[arg(long, global = true)]
    env_override: bool,

    #[command(flatten)]
    flags: ConfigFlags,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigFlags {
    #[arg(long, global = true)]
    gamma: Option<String>,
    /// Final time.
    #[arg(long = "T", global = true)]
    final_time: Option<String>,
    /// Half-width of the domain [-L, L]^2.
    #[arg(long = "L", global = true)]
    half_width: Option<String>,
    /// Points per axis (power of two).
    #[arg(long = "N", global = true)]
    points: Option<String>,
    #[arg(long, global = true)]
    tau: Option<String>,
    #[arg(long, global = true)]
    s: Option<String>,
    #[arg(long, global = true)]
    theta: Option<String>,
    #[arg(long, global = true)]
    q: Option<String>,
    #[arg(long, global = true)]
    alpha0: Option<String>,
    #[arg(long, global = true)]
    max_iters: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    output_dir: Option<String>,
    /// Perturbation level of the inversion evaluator, or `none`.
    #[arg(long, global = true)]
    h: Option<String>,
    /// Alpha used when the noise condition fails, or `none`.
    #[arg(long, global = true)]
    fallback_alpha: Option<String>,
    #[arg(long, global = true)]
    refined_synthesis: Option<String>,
    /// `parallel` or `sequential`.
    #[arg(long, global = true)]
    execution: Option<String>,
}

impl ConfigFlags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        [
            ("gamma", &self.gamma),
            ("T", &self.final_time),
            ("L", &self.half_width),
            ("N", &self.points),
            ("tau", &self.tau),
            ("s", &self.s),
            ("theta", &self.theta),
            ("q", &self.q),
            ("alpha0", &self.alpha0),
            ("max_iters", &self.max_iters),
            ("seed", &self.seed),
            ("output_dir", &self.output_dir),
            ("h", &self.h),
            ("fallback_alpha", &self.fallback_alpha),
            ("refined_synthesis", &self.refined_synthesis),
            ("execution", &self.execution),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect()
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Propagate a field file forward to time t.
    Forward {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        time: f64,
    },
    /// Reconstruct the state at time t from final-time data.
    Backward {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        /// Noise level; selects alpha by the discrepancy principle.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        time: f64,
        /// Use the spectral cut-off at this frequency instead of the mollifier.
        #[arg(long, value_name = "XI_MAX")]
        cutoff: Option<f64>,
    },
    /// One noisy reconstruction of a benchmark example.
    Example {
        #[arg(long)]
        id: u32,
        #[arg(long, default_value_t = 1.0)]
        perc_noise: f64,
    },
    /// Convergence order over several noise levels.
    Rates {
        #[arg(long)]
        id: u32,
        #[arg(long, value_delimiter = ',', default_value = "4,2,1,0.5,0.25")]
        levels: Vec<f64>,
        /// Seeds per level, starting at the configured seed.
        #[arg(long, default_value_t = 3)]
        seeds: usize,
    },
    /// Seeded replications at one or more noise levels.
    Montecarlo {
        #[arg(long)]
        id: u32,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        perc_noise: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        reps: usize,
    },
    /// Special-function oracles and bound diagnostics.
    Verify,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let sources = Sources {
        file: cli.config,
        env_override: cli.env_override,
        flags: cli.flags.pairs(),
    };
    let cfg = sources.load(|name| std::env::var(name).ok())?;
    let command_line = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    let cmd = command_line.as_str();
    match cli.command {
        Command::Forward { input, time } => commands::forward(&cfg, cmd, &input, time),
        Command::Backward {
            input,
            alpha,
            delta,
            time,
            cutoff,
        } => commands::backward(
            &cfg,
            cmd,
            BackwardArgs {
                input: &input,
                alpha,
                delta,
                time,
                cutoff,
            },
        ),
        Command::Example { id, perc_noise } => commands::example(&cfg, cmd, id, perc_noise),
        Command::Rates { id, levels, seeds } => commands::rates(&cfg, cmd, id, &levels, seeds),
        Command::Montecarlo {
            id,
            perc_noise,
            reps,
        } => commands::montecarlo(&cfg, cmd, id, &perc_noise, reps),
        Command::Verify => commands::verify(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
