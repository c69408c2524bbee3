//! Config-driven front end for the ludus simulator: run games to
//! transcripts, replay and audit transcripts, verify datasets against task
//! oracles, classify tasks and games, probe datasets for modality bias,
//! compare capability sets, and score environment rubrics.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ludus_cli::commands::{self, Format};

#[derive(Parser)]
#[command(name = "ludus", version, about = "Simulator for language tasks, micro-worlds, and interaction games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a game per a run config; write transcripts and a verdict summary.
    Run {
        /// Path to a run document.
        config: PathBuf,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's step cap.
        #[arg(long)]
        max_steps: Option<u32>,
        /// Write transcripts to this path instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for multi-run configs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Re-audit a transcript against its game; exit 2 on any violation.
    Replay {
        /// Path to a transcript (NDJSON).
        transcript: PathBuf,
        /// Game: a built-in name, or a path to a game or run document. A
        /// run document enables byte-level re-execution comparison.
        #[arg(long)]
        game: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Check every dataset pair against the task's oracle.
    Verify {
        task_config: PathBuf,
        /// Dataset in NDJSON pair format.
        dataset: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Taxonomy flags for a task, or game/setting for a game.
    Classify {
        /// Task/game/run document path, or a built-in name.
        config: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Dataset diagnostics.
    Diagnose {
        #[command(subcommand)]
        what: DiagnoseCommand,
    },
    /// Relate two capability sets over a shared inventory.
    Compare {
        caps_a: PathBuf,
        caps_b: PathBuf,
        /// Inventory document (defaults to whichever input is an inventory).
        #[arg(long)]
        inventory: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Score an eight-criterion environment rubric.
    Rubric {
        rubric_file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Subcommand)]
enum DiagnoseCommand {
    /// Deprivation test: can the dataset be solved without these fields?
    /// Exit 3 when the bias flag is raised.
    Bias {
        task_config: PathBuf,
        dataset: PathBuf,
        /// Input fields to withhold (comma-separated).
        #[arg(long, value_delimiter = ',', required = true)]
        deprive: Vec<String>,
        /// Flag when deprived accuracy beats the majority baseline by more
        /// than this.
        #[arg(long, default_value_t = ludus_core::diagnostics::DEFAULT_BIAS_MARGIN)]
        margin: f64,
        /// Split seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn dispatch(cli: Cli) -> Result<u8, commands::CliFailure> {
    match cli.command {
        Command::Run {
            config,
            seed,
            max_steps,
            out,
            jobs,
            format,
        } => commands::run(&config, seed, max_steps, out, jobs, format),
        Command::Replay {
            transcript,
            game,
            format,
        } => commands::replay(&transcript, &game, format),
        Command::Verify {
            task_config,
            dataset,
            format,
        } => commands::verify(&task_config, &dataset, format),
        Command::Classify { config, format } => commands::classify(&config, format),
        Command::Diagnose {
            what:
                DiagnoseCommand::Bias {
                    task_config,
                    dataset,
                    deprive,
                    margin,
                    seed,
                    format,
                },
        } => commands::diagnose_bias(&task_config, &dataset, &deprive, margin, seed, format),
        Command::Compare {
            caps_a,
            caps_b,
            inventory,
            format,
        } => commands::compare(&caps_a, &caps_b, inventory.as_deref(), format),
        Command::Rubric {
            rubric_file,
            format,
        } => commands::rubric(&rubric_file, format),
    }
}

fn main() -> ExitCode {
    // die quietly when the read end of a pipe closes (e.g. `ludus ... | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
