use clap::Parser;
use plastokit_cli::{run_file, Command, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

/// Constraint-preserving neural hardening laws: data generation, training,
/// evaluation and finite-element benchmarks.
#[derive(Parser)]
#[command(name = "plastokit", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: `out` or the configured one).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions { seed: cli.seed, out: cli.out, jobs: cli.jobs };
    match run_file(cli.command, &cli.config, &opts) {
        Ok(outcome) => {
            println!("{}", outcome.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let report = serde_json::json!({
                "status": "error",
                "command": cli.command,
                "error": e.to_string(),
                "causes": e.chain().skip(1).map(|c| c.to_string()).collect::<Vec<_>>(),
            });
            eprintln!("{report}");
            ExitCode::FAILURE
        }
    }
}
