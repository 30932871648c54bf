use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qss_cli::config::OneOrMany;
use qss_cli::{execute, exit, write_report, CliError, ExperimentSpec, Mode, RawConfig};

#[derive(Parser)]
#[command(
    name = "qss",
    version,
    about = "Noise experiments for sequential quantum secret sharing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo error rate for one configuration.
    Simulate(Flags),
    /// Closed-form and exhaustive-oracle error rates.
    Analytic(Flags),
    /// Grid over players and channel parameters.
    Sweep(Flags),
    /// Final states of the two-player round under bit-flip noise.
    Table1(Flags),
    /// Admissible channel and gate noise for a tolerance budget.
    Bound(Flags),
    /// Run the invariant battery; exits 3 if any check fails.
    OracleCheck(Flags),
}

/// Every flag overrides the matching key of `--config`.
#[derive(Args)]
struct Flags {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rounds: Option<u64>,
    /// Number of players; a comma-separated list for sweep and bound.
    #[arg(long, value_delimiter = ',')]
    players: Vec<usize>,
    /// noiseless, dephasing, depolarizing, bit-flip, phase-flip or amplitude-damping.
    #[arg(long)]
    channel: Option<String>,
    /// Channel parameter; a comma-separated list for sweep and oracle-check.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    p: Vec<f64>,
    /// Amplitude-damping parameter.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gamma: Vec<f64>,
    /// One channel per link, e.g. "noiseless;dephasing(1);noiseless".
    #[arg(long, value_delimiter = ';')]
    links: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps_mean: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    eps_sigma: Option<f64>,
    /// Tolerance budgets for bound columns (default 0.05).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    delta: Vec<f64>,
    /// Sweep: run Monte Carlo for every cell.
    #[arg(long)]
    empirical: bool,
    /// Sweep: maximum total Monte Carlo rounds.
    #[arg(long)]
    budget: Option<u64>,
    /// Oracle-check: largest number of players enumerated.
    #[arg(long)]
    max_players: Option<usize>,
    /// Oracle-check: corrupt a channel on purpose (completeness).
    #[arg(long)]
    inject_fault: Option<String>,
    /// Worker threads; output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or tsv.
    #[arg(long)]
    format: Option<String>,
}

fn non_empty<T>(v: Vec<T>) -> Option<OneOrMany<T>> {
    (!v.is_empty()).then(|| v.into())
}

impl Flags {
    fn into_raw(self) -> (Option<PathBuf>, RawConfig) {
        let raw = RawConfig {
            mode: None,
            players: non_empty(self.players),
            channel: self.channel,
            p: non_empty(self.p),
            gamma: non_empty(self.gamma),
            links: (!self.links.is_empty()).then_some(self.links),
            eps_mean: self.eps_mean,
            eps_sigma: self.eps_sigma,
            rounds: self.rounds,
            seed: self.seed,
            delta: non_empty(self.delta),
            empirical: self.empirical.then_some(true),
            budget: self.budget,
            max_players: self.max_players,
            inject_fault: self.inject_fault,
            threads: self.threads,
            out: self.out,
            format: self.format,
        };
        (self.config, raw)
    }
}

fn resolve(mode: Mode, flags: Flags) -> Result<ExperimentSpec, CliError> {
    let (path, flags) = flags.into_raw();
    let doc = match path {
        Some(path) => RawConfig::from_json(&fs::read_to_string(&path).map_err(|e| {
            CliError::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?)?,
        None => RawConfig::default(),
    };
    ExperimentSpec::resolve(doc.overlay(flags), Some(mode))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (mode, flags) = match cli.command {
        Command::Simulate(f) => (Mode::Simulate, f),
        Command::Analytic(f) => (Mode::Analytic, f),
        Command::Sweep(f) => (Mode::Sweep, f),
        Command::Table1(f) => (Mode::Table1, f),
        Command::Bound(f) => (Mode::Bound, f),
        Command::OracleCheck(f) => (Mode::OracleCheck, f),
    };
    let spec = resolve(mode, flags)?;
    let report = execute(&spec)?;
    write_report(&spec, &report)?;
    match report.failure {
        Some(names) => Err(CliError::OracleFailed(names)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::SUCCESS as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
