//! `talbot-lab`: batch runs of near-field interferometry simulations.

// negated comparisons deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Accuracy(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Accuracy(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "invalid configuration: {m}"),
            CliError::Accuracy(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<talbot_core::Error> for CliError {
    fn from(e: talbot_core::Error) -> Self {
        use talbot_core::Error::*;
        match e {
            Domain(_) | Configuration(_) | DegenerateParticle(_) => CliError::Schema(e.to_string()),
            Accuracy(_) | Truncation { .. } | DegenerateSignal(_) | ResonancePole(_) | NonIdentifiable(_) => {
                CliError::Accuracy(e.to_string())
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "talbot-lab",
    version,
    about = "Near-field matter-wave interferometry scans, carpets and fits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write CSV output.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write SVG line plots.
        #[arg(long)]
        svg: bool,
    },
    /// Check a configuration without running it.
    Validate { config: PathBuf },
    /// Print the tool version.
    Version,
}

fn load(path: &Path) -> Result<(RunConfig, String), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let config = RunConfig::parse(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    config.validate(base)?;
    let hash = format!("{:x}", Sha256::digest(text.as_bytes()));
    Ok((config, hash))
}

fn run(path: &Path, out: Option<PathBuf>, svg: bool) -> Result<(), CliError> {
    let (config, hash) = load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let tables = run::execute(&config, base)?;
    let dir = out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let metadata = vec![
        format!("talbot-lab {}", env!("CARGO_PKG_VERSION")),
        format!("config_sha256: {hash}"),
        run::talbot_note(&config)?,
    ];
    for table in &tables {
        let written = output::write_csv(&dir, table, &metadata)?;
        println!("{}", written.display());
        if svg {
            println!("{}", output::write_svg(&dir, table)?.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, svg } => run(&config, out, svg),
        Command::Validate { config } => load(&config).map(|_| println!("ok")),
        Command::Version => {
            println!("talbot-lab {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
