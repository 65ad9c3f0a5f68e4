use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Parser, Subcommand};

use deeparena_core::analysis::{param_growth_curve, write_growth_csv};
use deeparena_core::harness::{
    all_pass, bench_ticks, render_checks, report_tables, run_experiment, AgentKind, BenchOptions, ExperimentConfig,
    Overrides,
};
use deeparena_core::Registry;

#[derive(Parser)]
#[command(name = "deeparena", version, about = "Game environments for reinforcement learning research")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure ticks per second of a scenario.
    Bench {
        scenario: String,
        #[arg(long, default_value_t = 5)]
        seconds: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Encode an observation every tick.
        #[arg(long)]
        observe: bool,
        #[arg(long, default_value_t = 1000)]
        warmup_ms: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train an agent from a TOML config. Flags override keys in the file.
    Run {
        config: PathBuf,
        #[arg(long)]
        agent: Option<String>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Directory for metrics.csv, baseline.csv and summary.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the reference parameter counts and data sizes.
    ReportTables {
        #[arg(long)]
        csv: bool,
    },
    /// Capsule network parameter totals for square inputs, as CSV.
    GrowthCurve {
        #[arg(long, default_value_t = 1)]
        channels: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [28, 32, 48, 64, 84, 96, 128])]
        sizes: Vec<usize>,
    },
    ListScenarios,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let registry = Registry::with_defaults();
    match cli.command {
        Command::Bench { scenario, seconds, workers, observe, warmup_ms, seed } => {
            let opts = BenchOptions { seconds, workers, warmup: Duration::from_millis(warmup_ms), observe, seed };
            let report = bench_ticks(&registry, &scenario, &opts)?;
            print!("{}", report.render());
        }
        Command::Run { config, agent, episodes, seed, max_steps, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            let agent = agent.map(|a| a.parse::<AgentKind>()).transpose()?;
            cfg.apply(&Overrides { agent, episodes, seed, max_steps, output_dir: out })?;
            let summary = run_experiment(&registry, &cfg)?;
            print!("{}", summary.render());
            if let Some(dir) = &cfg.output_dir {
                println!("wrote {}", dir.display());
            }
        }
        Command::ReportTables { csv } => {
            let checks = report_tables()?;
            print!("{}", render_checks(&checks, csv)?);
            return Ok(all_pass(&checks));
        }
        Command::GrowthCurve { channels, sizes } => {
            let curve = param_growth_curve(channels, &sizes)?;
            write_growth_csv(std::io::stdout().lock(), &curve).context("writing csv")?;
        }
        Command::ListScenarios => {
            for id in registry.ids() {
                println!("{id}");
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
