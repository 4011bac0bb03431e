use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use flowmob::experiment::{
    parse_config, run_experiment, ExperimentConfig, ExperimentError, ExperimentKind,
};
use flowmob::scenario::ScenarioCase;
use flowmob::technique::Technique;

/// Flow-mobility experiment runner: analytical sweeps, Monte-Carlo campaigns
/// and scenario signaling traces, written as CSV.
#[derive(Parser, Debug)]
#[command(name = "flowmob", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment and write its CSV plus a `.meta` sidecar.
    Run {
        /// Experiment name (see `flowmob list`); optional with --config.
        experiment: Option<String>,
        /// Flat `key = value` config, e.g. a previous run's sidecar.
        #[arg(long)]
        config: Option<PathBuf>,
        /// single, multi or all.
        #[arg(long)]
        env: Option<String>,
        /// param:start:stop:steps
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override any config key; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// Print the signaling trace of a scenario case as CSV.
    Trace {
        case: String,
        /// Write the trace and a sidecar here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// List experiments, techniques and scenario cases.
    List,
}

fn set_pairs(sets: &[String]) -> Result<Vec<(String, String)>, ExperimentError> {
    sets.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| ExperimentError::InvalidConfig {
                    field: "--set".into(),
                    message: format!("expected key=value, got `{s}`"),
                })
        })
        .collect()
}

fn run(command: Command) -> Result<(), ExperimentError> {
    match command {
        Command::Run {
            experiment,
            config,
            env,
            sweep,
            seed,
            out,
            sets,
        } => {
            let mut pairs = match &config {
                Some(path) => {
                    let text =
                        std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
                            path: path.clone(),
                            source,
                        })?;
                    parse_config(&text)?
                }
                None => Vec::new(),
            };
            let mut push = |k: &str, v: Option<String>| {
                if let Some(v) = v {
                    pairs.push((k.to_string(), v));
                }
            };
            push("experiment", experiment);
            push("env", env);
            push("sweep", sweep);
            push("seed", seed.map(|s| s.to_string()));
            push("out", out.map(|p| p.display().to_string()));
            pairs.extend(set_pairs(&sets)?);
            let cfg = ExperimentConfig::from_pairs(pairs)?;
            let done = run_experiment(&cfg)?;
            println!(
                "{}: {} rows -> {} (metadata {})",
                cfg.experiment,
                done.rows,
                done.csv_path.display(),
                done.meta_path.display()
            );
        }
        Command::Trace { case, out, sets } => {
            let mut pairs = vec![
                (
                    "experiment".to_string(),
                    ExperimentKind::ScenarioTrace.name().to_string(),
                ),
                ("case".to_string(), case),
            ];
            pairs.extend(set_pairs(&sets)?);
            match out {
                Some(path) => {
                    pairs.push(("out".to_string(), path.display().to_string()));
                    let cfg = ExperimentConfig::from_pairs(pairs)?;
                    run_experiment(&cfg)?;
                }
                None => {
                    let cfg = ExperimentConfig::from_pairs(pairs)?;
                    let (csv, _) = flowmob::experiment::render_experiment(&cfg)?;
                    print!("{csv}");
                }
            }
        }
        Command::List => {
            println!("experiments:");
            for k in ExperimentKind::ALL {
                let sweep = k
                    .default_sweep()
                    .map(|s| format!(" [default sweep {s}]"))
                    .unwrap_or_default();
                println!("  {:<34}{}{}", k.name(), k.description(), sweep);
            }
            println!("techniques:");
            for t in Technique::ALL {
                println!("  {:<34}{}", t.name(), t.environment());
            }
            println!("scenario cases:");
            for c in ScenarioCase::ALL {
                println!("  {:<34}{}", c.name(), c.environment());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
