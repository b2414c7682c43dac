//! Command-line front end: `mdfc <command> --config <path> [--out <dir>]
//! [--seed <n>] [key=value ...]`.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use log::info;

use crate::config::Config;
use crate::output::{emit, RunManifest};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{stage} failed: {source}")]
    Solver {
        stage: String,
        #[source]
        source: mdfc_core::Error,
    },
    #[error("validation failed: {}", .0.join(", "))]
    ValidationFailed(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ValidationFailed(_) => 1,
            CliError::Usage(_) | CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Solver { .. } => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Prepare,
    Purity,
    ProtectPair,
    ProtectUnknown,
    ProtectMixed,
    Sweep,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Prepare => "prepare",
            Command::Purity => "purity",
            Command::ProtectPair => "protect-pair",
            Command::ProtectUnknown => "protect-unknown",
            Command::ProtectMixed => "protect-mixed",
            Command::Sweep => "sweep",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mdfc", version, about = "Feedback control of a qubit in an Ohmic dephasing bath")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON configuration, or a manifest written by an earlier run.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dotted overrides such as `scheme.R=2` or `bath.beta=5e0`.
    pub overrides: Vec<String>,
}

#[derive(Debug)]
pub struct RunSummary {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub rows: usize,
}

fn load(cli: &Cli) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut doc: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("malformed JSON: {e}")))?;
    // A manifest carries the resolved configuration under "config".
    if doc.get("command").is_some() && doc.get("config").is_some() {
        doc = doc["config"].take();
    }
    for o in &cli.overrides {
        config::apply_override(&mut doc, o)?;
    }
    Config::from_value(doc)
}

/// Runs one command, writing its CSV and manifest. Failed validation checks
/// still write both files before returning [`CliError::ValidationFailed`].
pub fn run(cli: &Cli) -> Result<RunSummary, CliError> {
    let cfg = load(cli)?;
    info!("running {} with {}", cli.command.name(), cli.config.display());
    let outcome = match cli.command {
        Command::Prepare => commands::prepare(&cfg),
        Command::Purity => commands::purity_curve(&cfg),
        Command::ProtectPair => commands::protect_pair(&cfg),
        Command::ProtectUnknown => commands::protect_unknown(&cfg),
        Command::ProtectMixed => commands::protect_mixed(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Validate => commands::validate(&cfg, cli.seed),
    }?;
    let name = cli.command.name();
    let manifest = RunManifest {
        command: name,
        version: env!("CARGO_PKG_VERSION"),
        seed: cli.seed,
        config: &cfg,
        outputs: vec![format!("{name}.csv")],
        optima: outcome.optima.clone(),
    };
    let (csv, manifest) = emit(&cli.out, &outcome.table, &manifest)?;
    info!("wrote {} and {}", csv.display(), manifest.display());
    if !outcome.failed.is_empty() {
        return Err(CliError::ValidationFailed(outcome.failed));
    }
    Ok(RunSummary { csv, manifest, rows: outcome.table.rows.len() })
}
