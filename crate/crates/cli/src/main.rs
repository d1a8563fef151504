//! `quartdiv`: batch front end for the divisor-sum experiments.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use config::ExperimentConfig;

const AFTER_HELP: &str = "\
Exit status: 0 on success, 1 when `verify` finds a violated property,
2 on a configuration error (malformed JSON is reported as path:line:column).

CSV columns of `sum --format csv`, one row per (kind, X):
  kind            T, S, S_dD, S_star, Tg_star or Tg_prime
  X, Y            the scale parameters (Y empty unless Tg_prime)
  exact_sum       exact value, an integer or num/den
  predicted_main  main-term prediction (empty when main terms are off)
  ratio           exact_sum / predicted_main
  nu_cutoff       exponent truncation of the Euler-product constant
  prime_cutoff    prime cutoff of the Euler-product constant
  wall_time_ms    elapsed time, 0 unless --timing

The environment variable QUARTDIV_SIEVE_BOUND overrides the sieve size.";

#[derive(Parser)]
#[command(name = "quartdiv", version, about = "Divisor sums over reducible binary quartic forms", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment description; omitted means `{}`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Comma-separated X values, overriding `x_list`.
    #[arg(long, global = true, value_delimiter = ',')]
    x_list: Option<Vec<u64>>,
    /// Worker threads for the enumerations.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall-clock times (makes output run-dependent).
    #[arg(long, global = true)]
    timing: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// rho(d) and rho*(d) for each modulus triple.
    Rho,
    /// delta(D) with its lower bound and related factors.
    Delta,
    /// Local densities sigma_p(d, D) and their Euler products.
    Sigma,
    /// C, C*, L(1, chi), region metrics and the archimedean density.
    Constants,
    /// Exact divisor sums with their predicted main terms.
    Sum,
    /// The invariant suite.
    Verify,
    /// Level-of-distribution discrepancy and M(X; V).
    Discrepancy,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Rho => "rho",
            Command::Delta => "delta",
            Command::Sigma => "sigma",
            Command::Constants => "constants",
            Command::Sum => "sum",
            Command::Verify => "verify",
            Command::Discrepancy => "discrepancy",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    /// Only for `sum`.
    Csv,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(xs) = &cli.x_list {
        cfg.x_list = Some(xs.clone());
    }
    if let Some(w) = cli.workers {
        cfg.workers = Some(w);
    }
    if cli.format == Format::Csv && !matches!(cli.command, Command::Sum) {
        return Err(CliError::Config("--format csv is only available for `sum`".into()));
    }
    let outcome = match cli.command {
        Command::Rho => commands::rho(&cfg),
        Command::Delta => commands::delta(&cfg),
        Command::Sigma => commands::sigma(&cfg),
        Command::Constants => commands::constants(&cfg),
        Command::Sum => commands::sum(&cfg, cli.timing),
        Command::Verify => commands::verify(&cfg),
        Command::Discrepancy => commands::discrepancy(&cfg),
    }?;
    let text = match (cli.format, &outcome.csv) {
        (Format::Csv, Some(csv)) => csv.clone(),
        _ => {
            let doc = json!({
                "command": cli.command.name(),
                "config_hash": cfg.hash(),
                "truncation": {
                    "prime_cutoff": cfg.prime_cutoff(),
                    "nu_max": cfg.nu_max(),
                    "accelerate": cfg.accelerate(),
                    "x_budget": cfg.x_budget(),
                    "samples": cfg.samples(),
                    "seed": cfg.seed(),
                },
                "result": outcome.result,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
            s.push('\n');
            s
        }
    };
    match &cli.out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string()))?,
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(CliError::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Io(m)) => {
            eprintln!("i/o error: {m}");
            ExitCode::from(2)
        }
    }
}
