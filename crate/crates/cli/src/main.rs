use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use swlab_cli::commands::{self, Outcome};
use swlab_cli::config::RunConfig;
use swlab_cli::CliError;

/// Log verbosity, in `env_logger` syntax (`info`, `swlab=debug`, ...).
const LOG_ENV: &str = "SWLAB_LOG";

#[derive(Debug, Parser)]
#[command(name = "swlab", version, about = "Numerical checks of weighted half-space integral inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Write the JSON result here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads; all available cores by default.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Seed for every random stream; overrides `seed` in the config.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the exponent tuple against the admissibility conditions.
    Validate(Common),
    /// Closed-form lower and upper bounds and the Hardy constants.
    Bounds(Common),
    /// Power iteration for the sharp constant, with a CSV trace.
    Estimate(Common),
    /// Run verification suites and emit a pass/fail ledger.
    Check {
        #[command(flatten)]
        common: Common,
        /// duality, kelvin, scaling, symmetry, representation, hardy,
        /// hyperbolic or all; comma-separated lists are accepted.
        #[arg(long, value_name = "NAME")]
        suite: Option<String>,
    },
    /// Weighted Sobolev ratios against the certified bound.
    Sobolev(Common),
}

fn emit(doc: &serde_json::Value, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (common, suite) = match &cli.command {
        Command::Validate(c) | Command::Bounds(c) | Command::Estimate(c) | Command::Sobolev(c) => (c, None),
        Command::Check { common, suite } => (common, suite.as_deref()),
    };
    if let Some(w) = common.workers {
        if w == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
    }
    let config = RunConfig::load(&common.config)?;
    let seed = common.seed.or(config.seed).unwrap_or(0);
    let out = common.out.clone().or_else(|| config.output.clone());
    log::info!("{:?} with seed {seed}", cli.command);
    let Outcome { document, passed } = match &cli.command {
        Command::Validate(_) => commands::validate(&config)?,
        Command::Bounds(_) => commands::bounds(&config)?,
        Command::Estimate(_) => commands::estimate(&config, seed, out.as_deref())?,
        Command::Check { .. } => commands::check(&config, seed, suite)?,
        Command::Sobolev(_) => commands::sobolev(&config)?,
    };
    emit(&document, out.as_deref())?;
    Ok(passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("swlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
