use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod run;
mod scenario;

use scenario::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure in {op}: {source}")]
    Numerical {
        op: &'static str,
        #[source]
        source: smectic::Error,
    },
    #[error("cannot write {path}: {source}", path = .0.display(), source = .1)]
    Io(PathBuf, std::io::Error),
    #[error("{0} of {1} criteria failed")]
    Verification(usize, usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } | CliError::Io(..) => 3,
            CliError::Verification(..) => 4,
        }
    }
}

/// Smectic-A elasticity: analytic and spectral dislocation fields, layer
/// geometry, nonlinear energies and layer flow.
#[derive(Debug, Parser)]
#[command(name = "smectic", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory that output paths are relative to.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    /// Suppress progress and report lines.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file and write its outputs and manifest.
    Run { config: PathBuf },
    /// Run the acceptance checks (`all`, or a check name or id).
    Verify {
        #[arg(default_value = "all")]
        suite: String,
    },
    /// Print a complete default scenario.
    ExportDefaults,
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Run { config } => {
            let s = Scenario::load(config)?;
            for w in s.warnings() {
                eprintln!("warning: {w}");
            }
            if !cli.quiet {
                eprintln!("lambda = {}", s.material.lambda());
            }
            let m = run::run(&s, &cli.output_dir)?;
            if !cli.quiet {
                for a in &m.artifacts {
                    println!("{}  {} bytes  {}", a.sha256, a.bytes, a.path);
                }
            }
            Ok(())
        }
        Command::Verify { suite } => {
            let quiet = cli.quiet;
            let reports = smectic::verify::verify_with(suite, |r| {
                if !quiet {
                    println!("{}", r.line());
                }
            })
            .map_err(|e| CliError::Config(e.to_string()))?;
            let failed = reports.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(CliError::Verification(failed, reports.len()));
            }
            Ok(())
        }
        Command::ExportDefaults => {
            let text = serde_json::to_string_pretty(&Scenario::defaults()).expect("plain data serializes");
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
