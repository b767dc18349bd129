use std::path::PathBuf;
use std::process::ExitCode;

use boundedrenew::scenario::{self, Scenario, ScenarioError};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "boundedrenew", version, about = "Bounded renewal functions for critical / non-critical component pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every estimator of a scenario and write CSV
    Run {
        /// Scenario JSON file
        file: Option<PathBuf>,
        /// Use a built-in scenario instead of a file
        #[arg(long, conflicts_with = "file")]
        preset: Option<String>,
        /// Write CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print pairwise differences between the estimators of a scenario
    Compare {
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file")]
        preset: Option<String>,
    },
    /// List the built-in scenarios, or print one as JSON
    Presets { name: Option<String> },
}

fn load(file: Option<PathBuf>, preset: Option<String>) -> Result<Scenario, ScenarioError> {
    match (file, preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| ScenarioError::Input(format!("{}: {e}", path.display())))?;
            Scenario::from_json(&text).map_err(|e| ScenarioError::Input(format!("{}: {e}", path.display())))
        }
        (None, Some(name)) => scenario::preset(&name),
        _ => Err(ScenarioError::Input("give a scenario file or --preset NAME".into())),
    }
}

fn configure_threads() -> Result<(), ScenarioError> {
    let Ok(raw) = std::env::var("BOUNDEDRENEW_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| ScenarioError::Input(format!("BOUNDEDRENEW_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ScenarioError::Input(format!("thread pool: {e}")))
}

fn execute(cli: Cli) -> Result<(), ScenarioError> {
    configure_threads()?;
    match cli.command {
        Command::Run { file, preset, out } => {
            let s = load(file, preset)?;
            let csv = scenario::to_csv(&scenario::run(&s)?);
            match out {
                Some(path) => std::fs::write(&path, csv)
                    .map_err(|e| ScenarioError::Input(format!("{}: {e}", path.display())))?,
                None => print!("{csv}"),
            }
        }
        Command::Compare { file, preset } => {
            let s = load(file, preset)?;
            let outputs = scenario::run(&s)?;
            print!("{}", scenario::compare(&outputs)?.render());
        }
        Command::Presets { name: None } => {
            for name in scenario::PRESET_NAMES {
                println!("{name}");
            }
        }
        Command::Presets { name: Some(name) } => println!("{}", scenario::preset(&name)?.to_json()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
