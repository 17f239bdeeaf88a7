use std::path::PathBuf;
use std::process::ExitCode;

use bipartite_cli::{load_config, run_command, Command};
use clap::Parser;

/// Bipartite wave-function simulator.
#[derive(Debug, Parser)]
#[command(name = "bipartite", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Generator seed, overriding `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load_config(&args.config, args.out, args.seed).and_then(|cfg| run_command(args.command, &cfg));
    match result {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            for (k, v) in &report.outcome.checks {
                println!("{k} = {v}");
            }
            println!("wrote {}", report.manifest_path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
