//! Experiment driver for the vectorized quantum transformer simulator.
//!
//! Each subcommand resolves a flat configuration, runs one experiment and
//! writes CSV tables (plus optional SVG charts), the resolved configuration
//! and a `manifest.json` into its output directory.

pub mod commands;
pub mod corpus;
pub mod error;
pub mod output;
pub mod settings;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, CliResult};
pub use settings::Settings;

#[derive(Debug, Parser)]
#[command(name = "vqt", version, about = "Shot-sampled quantum attention experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate pair products with the product circuit and compare to x·y.
    ProductAccuracy(CommonArgs),
    /// Compare quantum and classical attention scores on random tensors.
    AttentionCompare(CommonArgs),
    /// Train the toy transformer and log loss and perplexity per epoch.
    Train(CommonArgs),
    /// Tabulate qubits, CX count, CX depth and shots per batch size.
    Resources(CommonArgs),
    /// Report tokenizer and vocabulary statistics of the corpus.
    IngestCheck(CommonArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Flat `key = value` configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "N")]
    pub shots: Option<u64>,
    #[arg(long, value_parser = ["exact", "sampled"])]
    pub mode: Option<String>,
    #[arg(long = "noise-p2q", value_name = "F")]
    pub noise_p2q: Option<f64>,
    #[arg(long = "noise-ro", value_name = "F")]
    pub noise_ro: Option<f64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also draw SVG charts.
    #[arg(long)]
    pub svg: bool,
    /// Fan independent circuit jobs out over worker threads.
    #[arg(long)]
    pub parallel: bool,
    /// Override any configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Command {
    fn parts(&self) -> (Settings, &CommonArgs) {
        match self {
            Command::ProductAccuracy(a) => (commands::product::defaults(), a),
            Command::AttentionCompare(a) => (commands::attention::defaults(), a),
            Command::Train(a) => (commands::train::defaults(), a),
            Command::Resources(a) => (commands::resources::defaults(), a),
            Command::IngestCheck(a) => (commands::ingest::defaults(), a),
        }
    }
}

/// Defaults, then the config file, then `--set`, then dedicated flags.
pub fn resolve(command: &Command) -> CliResult<Settings> {
    let (mut settings, args) = command.parts();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        settings.apply_file(&text, &path.display().to_string())?;
    }
    for assignment in &args.set {
        settings.assign(assignment)?;
    }
    let flag = |s: &mut Settings, name: &str, key: &str, value: Option<String>| -> CliResult<()> {
        match value {
            None => Ok(()),
            Some(v) => s
                .set(key, &v)
                .map_err(|_| CliError::Config(format!("--{name} does not apply to {}", s.command()))),
        }
    };
    flag(&mut settings, "seed", "seed", args.seed.map(|v| v.to_string()))?;
    flag(&mut settings, "shots", "shots", args.shots.map(|v| v.to_string()))?;
    flag(&mut settings, "mode", "mode", args.mode.clone())?;
    flag(
        &mut settings,
        "noise-p2q",
        "noise_p2q",
        args.noise_p2q.map(|v| v.to_string()),
    )?;
    flag(
        &mut settings,
        "noise-ro",
        "noise_ro",
        args.noise_ro.map(|v| v.to_string()),
    )?;
    flag(
        &mut settings,
        "out",
        "out",
        args.out.as_ref().map(|p| p.display().to_string()),
    )?;
    if args.svg {
        settings.set("svg", "true")?;
    }
    if args.parallel {
        flag(&mut settings, "parallel", "parallel", Some("true".into()))?;
    }
    Ok(settings)
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> CliResult<()> {
    let settings = resolve(&cli.command)?;
    match cli.command {
        Command::ProductAccuracy(_) => commands::product::run(&settings).map(drop),
        Command::AttentionCompare(_) => commands::attention::run(&settings).map(drop),
        Command::Train(_) => commands::train::run(&settings).map(drop),
        Command::Resources(_) => commands::resources::run(&settings).map(drop),
        Command::IngestCheck(_) => commands::ingest::run(&settings).map(drop),
    }
}
