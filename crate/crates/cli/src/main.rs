use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use nlsdelta_cli::{commands, resolve, Cli};

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    let cfg = resolve(&cli)?;
    if cli.global.dump_config {
        print!("{}", cfg.to_toml()?);
        return Ok(true);
    }
    if let Some(n) = cfg.output.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    if cfg.output.verbose {
        eprintln!("{}", cfg.to_toml()?);
    }
    commands::run(&cfg)
}
