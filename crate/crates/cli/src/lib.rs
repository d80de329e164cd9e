//! `sarcasm` command-line driver: prepare, augment, train-eval, stats and
//! reproduce-tables.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub mod augment;
pub mod config;
pub mod error;
pub mod manifest;
pub mod prepare;
pub mod reproduce;
pub mod stats;
pub mod train_eval;

use config::{ExperimentConfig, DEFAULT_SEED};
pub use error::CliError;

pub const PREPARED_DIR: &str = "prepared";
pub const AUGMENTED_DIR: &str = "augmented";
pub const REPORTS_DIR: &str = "reports";

#[derive(Debug, Parser)]
#[command(name = "sarcasm", version, about = "Sarcasm detection experiments on tweet corpora")]
pub struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Only errors are printed.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split the train release into train/val and write dataset stats.
    Prepare,
    /// Build the augmented training sets.
    Augment,
    /// Train on each augmented set (or sweep value) and write reports.
    TrainEval,
    /// Print statistics of a CSV or JSON-lines dataset.
    Stats {
        input: PathBuf,
        #[arg(long, default_value = "en")]
        language: String,
    },
    /// Run the desk-scale reconstruction checks and write their tables.
    ReproduceTables,
}

/// Resolved config plus command-line overrides.
pub struct Context {
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub quiet: bool,
}

impl Context {
    pub fn from_cli(cli: &Cli) -> Result<Context, CliError> {
        let path = cli
            .config
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs --config".into()))?;
        Context::load(path, cli.seed, cli.output_dir.clone(), cli.quiet)
    }

    pub fn load(path: &Path, seed: Option<u64>, output_dir: Option<PathBuf>, quiet: bool) -> Result<Context, CliError> {
        let (config, bytes) = ExperimentConfig::load(path)?;
        Ok(Context {
            seed: seed.or(config.seed).unwrap_or(DEFAULT_SEED),
            output_dir: output_dir.unwrap_or_else(|| config.output_dir.clone()),
            config_sha256: manifest::sha256_hex(&bytes),
            config,
            quiet,
        })
    }

    pub fn dir(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }

    /// Digest with the path shown relative to the output dir when inside it.
    pub fn digest(&self, path: &Path) -> Result<manifest::FileDigest, CliError> {
        let mut d = manifest::file_digest(path)?;
        if let Ok(rel) = path.strip_prefix(&self.output_dir) {
            d.path = rel.display().to_string();
        }
        Ok(d)
    }

    pub fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Prepare => prepare::run(&Context::from_cli(cli)?),
        Command::Augment => augment::run(&Context::from_cli(cli)?),
        Command::TrainEval => train_eval::run(&Context::from_cli(cli)?),
        Command::Stats { input, language } => stats::run(input, language, cli.output_dir.as_deref(), cli.quiet),
        Command::ReproduceTables => reproduce::run(
            cli.seed.unwrap_or(DEFAULT_SEED),
            cli.output_dir.as_deref().unwrap_or(Path::new("reproduce")),
            cli.quiet,
        ),
    }
}
