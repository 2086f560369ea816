use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::Parser;

use collab_avg::commands::{CliError, CommandRegistry};
use collab_avg::config::{Overrides, RunConfig, SEED_ENV};

/// Optimal weighted model averaging: closed-form profiles, reference table,
/// figure data, Monte Carlo validation and federation analysis.
#[derive(Debug, Parser)]
#[command(name = "collab-avg", version)]
struct Cli {
    /// Command to run.
    #[arg(value_parser = PossibleValuesParser::new(CommandRegistry::builtin().names()))]
    command: String,
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; falls back to the scenario file, then COLLAB_AVG_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per scenario.
    #[arg(long)]
    trials: Option<u64>,
    /// Grid resolution (curve points, or contour points per axis).
    #[arg(long)]
    grid: Option<usize>,
    /// Acceptance threshold in standard errors.
    #[arg(long)]
    k: Option<f64>,
    /// Scale e0 of the closed form before validating (harness sensitivity check).
    #[arg(long, hide = true)]
    oracle_e0_scale: Option<f64>,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let registry = CommandRegistry::builtin();
    let command = registry
        .get(&cli.command)
        .ok_or_else(|| CliError::Invalid(format!("unknown command `{}`", cli.command)))?;
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = RunConfig::resolve(
        Overrides {
            scenario: cli.scenario,
            out: cli.out,
            seed: cli.seed,
            trials: cli.trials,
            grid: cli.grid,
            k: cli.k,
            oracle_e0_scale: cli.oracle_e0_scale,
        },
        env_seed.as_deref(),
    )?;
    let mut out: Box<dyn Write> = match &cfg.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let outcome = command.run(&cfg, &mut out, &mut io::stderr())?;
    out.flush()?;
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
