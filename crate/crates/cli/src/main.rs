//! `gbs-page`: Page curves of Gaussian boson sampling from the command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 analytic series out
//! of range (use `limits` or `simulate`), 4 numerical failure.

mod commands;
mod config;
mod error;
mod figure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{
    AnalyticConfig, AsymptoticTag, FigureConfig, FigureName, Format, LimitsConfig, ModeSpec, RegimeArg, RunConfig,
    Scale, SimulateConfig, SqueezingSpec, Threads,
};
use error::CliError;

#[derive(Parser)]
#[command(name = "gbs-page", version, about = "Page curves of Gaussian boson sampling: analytic series and Haar Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Haar-averaged entropies from the closed-form series, one row per (r, alpha)
    Analytic(AnalyticArgs),
    /// Monte-Carlo entropies over Haar-random circuits
    Simulate(SimulateArgs),
    /// Small- and large-squeezing limiting values
    Limits(LimitsArgs),
    /// Analytic curves plus simulated points for a named figure
    Figure(FigureArgs),
    /// Runs a JSON config (or re-runs an emitted summary)
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("modes").required(true).args(["n", "asymptotic"]))]
struct AnalyticArgs {
    /// Entropy orders, comma separated (1 = von Neumann)
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<u32>,
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    #[arg(long)]
    n: Option<usize>,
    /// Per-mode values in the n → ∞ limit
    #[arg(long)]
    asymptotic: bool,
    /// start:stop:step, inclusive
    #[arg(long)]
    r_grid: String,
    /// Absolute truncation tolerance (nats)
    #[arg(long, default_value_t = gbs_page::pagecurve::DEFAULT_TOL)]
    tol: f64,
    /// Fixed number of series terms instead of the tolerance rule
    #[arg(long)]
    i_max: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("partition").required(true).args(["k", "r"]))]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    r: Option<f64>,
    /// One squeezing strength, or n comma-separated strengths
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    s: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    alphas: Vec<u32>,
    #[arg(long)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads or "auto"; GBS_PAGE_THREADS overrides
    #[arg(long, default_value = "auto")]
    threads: Threads,
    /// Also write Tr W^i, i = 1..=MOMENTS, per sample
    #[arg(long)]
    moments: Option<usize>,
    /// Writes <prefix>_samples.csv and <prefix>_summary.json; summary goes to stdout otherwise
    #[arg(long)]
    out_prefix: Option<PathBuf>,
}

#[derive(Args)]
struct LimitsArgs {
    #[arg(long)]
    alpha: u32,
    #[arg(long, value_enum)]
    regime: RegimeArg,
    #[arg(long)]
    r_grid: String,
    /// File of per-mode squeezing strengths (unequal small-squeezing limit)
    #[arg(long)]
    s_vector: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(value_enum)]
    name: FigureName,
    #[arg(long, value_enum, default_value = "desk")]
    scale: Scale,
    #[arg(long, default_value_t = 11)]
    seed: u64,
    /// Output directory (default: figure-<name>)
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value = "auto")]
    threads: Threads,
    /// Samples per Monte-Carlo point, overriding the scale default
    #[arg(long)]
    samples: Option<u64>,
    /// Skip the gnuplot script
    #[arg(long)]
    no_gnuplot: bool,
}

fn grid(s: &str) -> Result<config::Grid, CliError> {
    s.parse().map_err(CliError::Validation)
}

fn to_config(cmd: Command) -> Result<RunConfig, CliError> {
    Ok(match cmd {
        Command::Analytic(a) => RunConfig::Analytic(AnalyticConfig {
            alpha: a.alpha,
            s: a.s,
            n: match a.n {
                Some(n) => ModeSpec::Finite(n),
                None => ModeSpec::Asymptotic(AsymptoticTag::Asymptotic),
            },
            r_grid: grid(&a.r_grid)?,
            tol: a.tol,
            i_max: a.i_max,
            out: a.out,
            format: a.format,
        }),
        Command::Simulate(a) => RunConfig::Simulate(SimulateConfig {
            n: a.n,
            k: a.k,
            r: a.r,
            s: match a.s.as_slice() {
                [s] => SqueezingSpec::Equal(*s),
                many => SqueezingSpec::PerMode(many.to_vec()),
            },
            alphas: a.alphas,
            samples: a.samples,
            seed: a.seed,
            threads: a.threads,
            moments: a.moments,
            out_prefix: a.out_prefix,
        }),
        Command::Limits(a) => RunConfig::Limits(LimitsConfig {
            alpha: a.alpha,
            regime: a.regime,
            r_grid: grid(&a.r_grid)?,
            s_vector: a.s_vector,
            out: a.out,
        }),
        Command::Figure(a) => RunConfig::Figure(FigureConfig {
            out_dir: a.out_dir.unwrap_or_else(|| {
                let name = match a.name {
                    FigureName::Fig1 => "fig1",
                    FigureName::SmallS => "small-s",
                    FigureName::PageVsS => "page-vs-s",
                };
                PathBuf::from(format!("figure-{name}"))
            }),
            name: a.name,
            scale: a.scale,
            seed: a.seed,
            threads: a.threads,
            samples: a.samples,
            gnuplot: !a.no_gnuplot,
        }),
        Command::Run { config } => RunConfig::from_json_file(&config)?,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match to_config(cli.command).and_then(|cfg| commands::execute(&cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
