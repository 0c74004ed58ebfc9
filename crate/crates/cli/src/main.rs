//! `hamens`: CSV time series and checks for averaged qubit dynamics.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliResult;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "hamens", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (`key = value` lines under `[section]` headers).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write CSV here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Overrides `[mc] seed`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Overrides `[mc] samples`.
    #[arg(long, global = true, value_name = "N")]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Directional moments, analytic against quadrature.
    Moments,
    /// Bloch vector and purity along the time grid.
    Simulate,
    /// Time-local rates, level spacing and Kossakowski minimum eigenvalue.
    Rates,
    /// Cross-check suites; all built-in pairs when no config is given.
    Validate,
    /// Rates of the kneaded cardioid over a list of asymmetries.
    Scan {
        #[arg(long, value_name = "NAME")]
        param: String,
        #[arg(long, value_name = "LIST", value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
}

fn load(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.samples {
        if n < 2 {
            return Err(config::ConfigError::general("--samples must be at least 2").into());
        }
        cfg.samples = n;
    }
    if cli.out.is_some() {
        cfg.out.clone_from(&cli.out);
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult<bool> {
    let cfg = load(cli)?;
    let out = cfg.out.as_deref();
    match &cli.command {
        Command::Moments => print!("{}", commands::moments(&cfg, out)?),
        Command::Simulate => commands::simulate(&cfg)?.emit(out)?,
        Command::Rates => commands::rates(&cfg)?.emit(out)?,
        Command::Validate => {
            let explicit = cli.config.as_ref().map(|_| &cfg);
            let (csv, ok) = commands::validate(explicit, cfg.seed, cfg.samples)?;
            csv.emit(out)?;
            if !ok {
                eprintln!("validation failed");
            }
            return Ok(ok);
        }
        Command::Scan { param, values } => {
            let rows = commands::scan(&cfg, param, values)?;
            if let Some(p) = out {
                for r in &rows {
                    r.table.emit(Some(&commands::per_value_path(p, r.value)))?;
                }
            }
            commands::scan_summary(&cfg, &rows).emit(out)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
