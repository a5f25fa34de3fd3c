use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use condor_cli::{parse_config, report, run_matrix, ConfigError};
use condor_core::{write_csv_stream, Preset, SyntheticStream};

#[derive(Parser)]
#[command(name = "condor", version, about = "Concept-drift experiments with model reuse")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (dataset, config, seed) cell of a manifest.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the manifest.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Export a built-in synthetic stream as CSV.
    Gen {
        dataset: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Truncate to this many items.
        #[arg(long)]
        length: Option<usize>,
    },
    /// Recompute summary.csv from the step and weight logs of a run directory.
    Report { dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn execute(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run { config, out, threads } => {
            let mut manifest = parse_config(&config)?;
            if let Some(out) = out {
                manifest.output_dir = out;
            }
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .context("cannot configure worker threads")?;
            }
            let outcome = run_matrix(&manifest)?;
            let failed = outcome.failures();
            for cell in outcome.cells.iter().filter(|c| c.outcome.is_err()) {
                if let Err(e) = &cell.outcome {
                    eprintln!("{} / {} / seed {}: {e}", cell.dataset, cell.config, cell.seed);
                }
            }
            eprintln!(
                "{} runs, {failed} failed; summary in {}",
                outcome.cells.len(),
                outcome.summary_path.display()
            );
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Gen { dataset, out, seed, length } => {
            let preset = Preset::from_name(&dataset)
                .ok_or_else(|| ConfigError::Invalid(format!("unknown dataset `{dataset}`")))?;
            let stream = SyntheticStream::new(preset.spec(seed))?;
            let items: Vec<_> = stream.iter().take(length.unwrap_or(usize::MAX)).collect();
            write_csv_stream(&out, &items)?;
            eprintln!("wrote {} items to {}", items.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { dir } => {
            let rows = report(&dir)?;
            let text = std::fs::read_to_string(dir.join("summary.csv"))?;
            print!("{text}");
            eprintln!("{} summary rows", rows.len());
            Ok(ExitCode::SUCCESS)
        }
    }
}
