//! Command-line front end: configuration, subcommands and CSV output.

pub mod commands;
pub mod config;
pub mod output;
pub mod table;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser};

use commands::Command;
use config::{Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "nlsdelta", version, about = "Solitary waves of NLS with an attractive delta potential")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Global {
    /// TOML run configuration; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output path (standard output when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, short, global = true)]
    pub verbose: bool,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,
}

/// Merges the file, the flags and the subcommand into one validated record.
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(&cli.overrides);
    if let Some(c) = &cli.command {
        cfg.command = Some(c.clone());
    }
    if cli.global.out.is_some() {
        cfg.output.out = cli.global.out.clone();
    }
    if cli.global.threads.is_some() {
        cfg.output.threads = cli.global.threads;
    }
    cfg.output.verbose |= cli.global.verbose;
    cfg.validate()?;
    Ok(cfg)
}
