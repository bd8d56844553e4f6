use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use uwajam::analysis::Preset;
use uwajam::config::{dump_config, ConfigFile};
use uwajam::montecarlo::Workers;
use uwajam::sweep::{run_sweep_to_file, Engine, ResultRow, SweepSpec};
use uwajam::validate::validate;
use uwajam::Result;

/// Coverage, rate and energy efficiency of an underwater acoustic link under
/// Poisson jamming.
///
/// The worker count defaults to the hardware parallelism and can be capped
/// with UWAJAM_THREADS.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic metrics as JSON lines.
    Analyze {
        config: PathBuf,
        #[arg(long, value_parser = parse_preset)]
        preset: Option<Preset>,
    },
    /// Monte Carlo metrics as JSON lines.
    Simulate {
        config: PathBuf,
        #[arg(long, value_parser = parse_preset)]
        preset: Option<Preset>,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Evaluates the `[sweep]` table of a config file and writes CSV.
    Sweep {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compares all engines; fails beyond 4 combined standard errors.
    Validate {
        config: PathBuf,
        #[arg(long, value_parser = parse_preset)]
        preset: Option<Preset>,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Prints the effective scenario as a config file.
    Config {
        config: PathBuf,
        #[arg(long, value_parser = parse_preset)]
        preset: Option<Preset>,
    },
}

fn parse_preset(s: &str) -> std::result::Result<Preset, String> {
    Preset::parse(s).ok_or_else(|| format!("expected shallow, mid or deep, got `{s}`"))
}

fn print_rows(rows: &[ResultRow]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    for r in rows {
        let line = serde_json::to_string(r).expect("rows serialize");
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Analyze { config, preset } => {
            let sc = ConfigFile::read(&config)?.scenario(preset)?;
            let workers = Workers::new(1)?;
            let metrics = Engine::Analytic.evaluate(&sc, 0, 0, &workers)?;
            print_rows(&ResultRow::from_metrics(&sc.label, Engine::Analytic, None, &metrics))?;
            Ok(true)
        }
        Command::Simulate {
            config,
            preset,
            trials,
            seed,
        } => {
            let sc = ConfigFile::read(&config)?.scenario(preset)?;
            let workers = Workers::from_env()?;
            let metrics = Engine::MonteCarlo.evaluate(&sc, trials, seed, &workers)?;
            print_rows(&ResultRow::from_metrics(&sc.label, Engine::MonteCarlo, None, &metrics))?;
            Ok(true)
        }
        Command::Sweep { spec, out } => {
            let spec = SweepSpec::from_config(&ConfigFile::read(&spec)?)?;
            let workers = Workers::from_env()?;
            let outcome = run_sweep_to_file(&spec, &out, &workers)?;
            for f in &outcome.failures {
                eprintln!(
                    "error: {} {} at {} = {}: {}",
                    f.scenario,
                    f.engine.name(),
                    spec.axis.name(),
                    f.axis_value,
                    f.message
                );
            }
            Ok(outcome.failures.is_empty())
        }
        Command::Validate {
            config,
            preset,
            trials,
            seed,
        } => {
            let sc = ConfigFile::read(&config)?.scenario(preset)?;
            let workers = Workers::from_env()?;
            let report = validate(&sc, trials, seed, &workers)?;
            print!("{}", report.table());
            Ok(report.passed())
        }
        Command::Config { config, preset } => {
            let sc = ConfigFile::read(&config)?.scenario(preset)?;
            print!("{}", dump_config(&sc));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
