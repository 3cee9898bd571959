use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bvarx::commands;
use bvarx::config::RunConfig;
use bvarx::Error;

#[derive(Parser)]
#[command(name = "bvarx", version, about = "Bayesian VAR-X forecasting, evaluation, local projections and wavelet coherence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    config: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Grid-search the hyperparameters; writes leaderboard.csv and winner.json.
    Tune(Common),
    /// Fit and forecast; writes point.csv, intervals.csv and fan.svg.
    Forecast(Common),
    /// Compare forecast files; writes metrics.csv, tests.json and murphy.csv.
    Evaluate(Common),
    /// Regime-dependent impulse responses; writes irf.csv and irf.svg.
    Irf(Common),
    /// Wavelet coherence with FDR control; writes coherence.csv and heatmap.svg.
    Coherence(Common),
}

fn load(c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::load(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        // relative to the working directory, not the config file
        cfg.out = std::path::absolute(o)?;
    }
    if let Some(n) = cfg.threads {
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Tune(c) => commands::cmd_tune(&load(&c)?).map(|_| ()),
        Command::Forecast(c) => commands::cmd_forecast(&load(&c)?),
        Command::Evaluate(c) => commands::cmd_evaluate(&load(&c)?),
        Command::Irf(c) => commands::cmd_irf(&load(&c)?),
        Command::Coherence(c) => commands::cmd_coherence(&load(&c)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.category().exit_code();
            let report = serde_json::json!({ "code": code, "module": e.module(), "message": e.to_string() });
            eprintln!("{report}");
            ExitCode::from(code as u8)
        }
    }
}
