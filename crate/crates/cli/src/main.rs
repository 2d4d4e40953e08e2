use clap::Parser;
use lspec_cli::{persist, run, CliError, Command, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Numerics for complex powers and spectral actions of Lorentzian wave operators.
#[derive(Parser, Debug)]
#[command(name = "lspec", version)]
struct Cli {
    /// TOML run configuration; replaces the subcommand and global flags.
    #[arg(long, conflicts_with_all = ["threads", "seed", "out"])]
    config: Option<PathBuf>,
    /// Worker threads (LSPEC_THREADS overrides).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for sampled operations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for JSON/CSV artifacts and the manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    match (cli.config, cli.command) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            RunConfig::from_toml(&text)
        }
        (Some(_), Some(_)) => Err(CliError::Config("give either --config or a subcommand".into())),
        (None, Some(command)) => Ok(RunConfig { threads: cli.threads, seed: cli.seed.unwrap_or(7), out: cli.out, command }),
        (None, None) => Err(CliError::Config("no subcommand given (see --help)".into())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(cli).and_then(|config| {
        let report = run(&config, true)?;
        persist(&config, &report)?;
        Ok(report)
    });
    match result {
        Ok(report) => {
            print!("{}", report.stdout);
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            print!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
