use std::path::PathBuf;
use std::process::ExitCode;

use born_dispersion::exec::with_threads;
use born_dispersion::experiments::{exit_code, run_file};
use clap::{Parser, Subcommand};
use log::debug;

#[derive(Parser)]
#[command(name = "born-dispersion", version, about = "Runs JSON-configured dispersion experiments")]
struct Cli {
    /// Maximum number of worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let Command::Run { config } = cli.command;
    let result = match cli.threads {
        Some(t) => with_threads(t, || run_file(&config)),
        None => run_file(&config),
    };
    match &result {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            debug!("outputs: {:?}", outcome.outputs);
            println!("outputs in {}", outcome.out_dir.display());
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
