use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use qdopt::config::{self, Command, RunConfig};
use qdopt::{pipeline, Error};

/// Environment variable overriding the worker thread count.
const THREADS_ENV: &str = "QDOPT_THREADS";

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Optimize,
    Sample,
    Scan,
    Chain,
    Validate,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Optimize => Command::Optimize,
            Cmd::Sample => Command::Sample,
            Cmd::Scan => Command::Scan,
            Cmd::Chain => Command::Chain,
            Cmd::Validate => Command::Validate,
        }
    }
}

/// Imaginary-time grid quantum dynamics: structure optimization, sampling,
/// potential-energy scans and chain zero-point scaling.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    command: Cmd,
    /// Run configuration (TOML). Optional for `validate` and `chain`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `[output] directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sampling seed, overriding `[sampling] seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(cli: &Cli) -> Result<bool, Error> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| Error::Config(vec![format!("{THREADS_ENV} must be a positive integer, got `{v}`")]))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(vec![format!("{THREADS_ENV}: {e}")]))?;
    }
    let raw = match &cli.config {
        Some(path) => config::load(path)?,
        None => config::RawConfig::default(),
    };
    let mut cfg = RunConfig::from_raw(raw, Some(cli.command.into()))?;
    if let Some(dir) = &cli.out {
        cfg.set_output_dir(dir.clone());
    }
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    let summary = pipeline::run(&cfg)?;
    for line in &summary.lines {
        println!("{line}");
    }
    for path in &summary.artifacts {
        println!("wrote {}", path.display());
    }
    Ok(summary.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let cat = e.category();
            eprintln!("error[{}]: {e}", cat.as_str());
            ExitCode::from(cat.exit_code() as u8)
        }
    }
}
