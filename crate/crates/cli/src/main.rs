use std::path::PathBuf;
use std::process::ExitCode;

use bgc_cli::{parse_config_with, run_command, CliError, Command};
use clap::Parser;

/// Exact and approximate dephasing dynamics of a free particle.
#[derive(Debug, Parser)]
#[command(name = "bgc", version)]
struct Args {
    command: Command,

    /// JSON run configuration; all fields optional.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Directory for the emitted tables.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Dotted `--a.b=value` flags are config overrides; everything else is
/// ordinary command-line syntax for clap.
fn is_override(arg: &str) -> bool {
    arg.strip_prefix("--").is_some_and(|rest| rest.split('=').next().is_some_and(|key| key.contains('.')))
}

fn run(args: &Args, overrides: &[String]) -> Result<Vec<PathBuf>, CliError> {
    let source = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?,
        None => "{}".to_string(),
    };
    let cfg = parse_config_with(&source, overrides)?;
    run_command(args.command, &cfg, &args.out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (overrides, rest): (Vec<String>, Vec<String>) = std::env::args().partition(|a| is_override(a));
    let args = Args::parse_from(rest);
    match run(&args, &overrides) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.report()).expect("report serializes"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
