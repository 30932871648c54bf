//! Experiment configuration: the JSON document, command-line overrides and
//! the validated [`ExperimentSpec`].
//!
//! Every key is optional in the document and unknown keys are rejected.
//!
//! | key            | type                 | meaning                                              |
//! |----------------|----------------------|------------------------------------------------------|
//! | `mode`         | string               | `simulate`, `analytic`, `sweep`, `table1`, `bound`, `oracle-check` |
//! | `players`      | int or [int]         | number of players `N` (a list for `sweep`/`bound`)   |
//! | `channel`      | string               | link channel name, default `noiseless`               |
//! |                |                      | (`bit-flip` for `table1`, `dephasing` for `bound`)   |
//! | `p`            | real or [real]       | channel parameter (a list for `sweep`/`oracle-check`)|
//! | `gamma`        | real or [real]       | parameter of `amplitude-damping`, used instead of `p`|
//! | `links`        | [string]             | one channel per link, e.g. `"dephasing(0.1)"`        |
//! | `eps_mean`     | real                 | mean gate phase error, default 0                     |
//! | `eps_sigma`    | real                 | Gaussian jitter of the gate phase error, default 0   |
//! | `rounds`       | int                  | Monte Carlo rounds per cell, default 100000          |
//! | `seed`         | int                  | master seed, default 0                               |
//! | `delta`        | real or [real]       | tolerance budgets for bound columns, default 0.05    |
//! | `empirical`    | bool                 | `sweep`: also run Monte Carlo per cell               |
//! | `budget`       | int                  | `sweep`: cap on total Monte Carlo rounds             |
//! | `max_players`  | int                  | `oracle-check`: largest `N` enumerated, default 6    |
//! | `inject_fault` | string               | `oracle-check`: `completeness` corrupts one channel  |
//! | `threads`      | int                  | worker threads, default all cores                    |
//! | `out`          | string               | output path, default stdout                          |
//! | `format`       | string               | `csv` or `tsv`                                       |

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use qss_core::{ChannelKind, GateErrorSpec, ProtocolConfig, ToleranceBudget};
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::format::Format;

pub const DEFAULT_ROUNDS: u64 = 100_000;
pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_BUDGET: u64 = 50_000_000;
pub const DEFAULT_ORACLE_PLAYERS: usize = 6;
pub const MAX_ORACLE_CHECK_PLAYERS: usize = 8;
pub const DEFAULT_ORACLE_GRID: [f64; 5] = [0.0, 0.01, 0.05, 0.1, 0.3];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Analytic,
    Sweep,
    Table1,
    Bound,
    OracleCheck,
}

impl FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "simulate" => Mode::Simulate,
            "analytic" => Mode::Analytic,
            "sweep" => Mode::Sweep,
            "table1" => Mode::Table1,
            "bound" => Mode::Bound,
            "oracle-check" => Mode::OracleCheck,
            other => {
                return Err(CliError::config(format!(
                    "mode = {other:?}, expected one of simulate, analytic, sweep, table1, bound, oracle-check"
                )))
            }
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Simulate => "simulate",
            Mode::Analytic => "analytic",
            Mode::Sweep => "sweep",
            Mode::Table1 => "table1",
            Mode::Bound => "bound",
            Mode::OracleCheck => "oracle-check",
        })
    }
}

/// Deliberate corruption for exercising the oracle battery.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// A bit-flip channel whose Kraus operators sum to `(1 + 10⁻³)·I`.
    Completeness,
}

impl FromStr for Fault {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "completeness" => Ok(Fault::Completeness),
            other => Err(CliError::config(format!(
                "inject_fault = {other:?}, expected completeness"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(xs) => xs.clone(),
        }
    }
}

impl<T> From<Vec<T>> for OneOrMany<T> {
    fn from(mut v: Vec<T>) -> Self {
        if v.len() == 1 {
            OneOrMany::One(v.remove(0))
        } else {
            OneOrMany::Many(v)
        }
    }
}

/// The config document as written, before validation. Command-line flags are
/// collected into the same shape and laid over it.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub mode: Option<String>,
    pub players: Option<OneOrMany<usize>>,
    pub channel: Option<String>,
    pub p: Option<OneOrMany<f64>>,
    pub gamma: Option<OneOrMany<f64>>,
    pub links: Option<Vec<String>>,
    pub eps_mean: Option<f64>,
    pub eps_sigma: Option<f64>,
    pub rounds: Option<u64>,
    pub seed: Option<u64>,
    pub delta: Option<OneOrMany<f64>>,
    pub empirical: Option<bool>,
    pub budget: Option<u64>,
    pub max_players: Option<usize>,
    pub inject_fault: Option<String>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

impl RawConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| CliError::config(format!("invalid config document: {e}")))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: RawConfig) -> RawConfig {
        RawConfig {
            mode: top.mode.or(self.mode),
            players: top.players.or(self.players),
            channel: top.channel.or(self.channel),
            p: top.p.or(self.p),
            gamma: top.gamma.or(self.gamma),
            links: top.links.or(self.links),
            eps_mean: top.eps_mean.or(self.eps_mean),
            eps_sigma: top.eps_sigma.or(self.eps_sigma),
            rounds: top.rounds.or(self.rounds),
            seed: top.seed.or(self.seed),
            delta: top.delta.or(self.delta),
            empirical: top.empirical.or(self.empirical),
            budget: top.budget.or(self.budget),
            max_players: top.max_players.or(self.max_players),
            inject_fault: top.inject_fault.or(self.inject_fault),
            threads: top.threads.or(self.threads),
            out: top.out.or(self.out),
            format: top.format.or(self.format),
        }
    }
}

/// A fully validated experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub mode: Mode,
    /// One entry for `simulate` and `analytic`, the sweep axis otherwise.
    pub players: Vec<usize>,
    /// Canonical channel name.
    pub channel: String,
    /// Channel parameters (`p`, or `γ` for amplitude damping).
    pub params: Vec<f64>,
    /// Explicit per-link channels, replacing `channel` and `params`.
    pub links: Option<Vec<ChannelKind>>,
    pub gate_error: GateErrorSpec,
    pub rounds: u64,
    pub seed: u64,
    pub deltas: Vec<ToleranceBudget>,
    pub empirical: bool,
    pub budget: u64,
    pub max_players: usize,
    pub fault: Option<Fault>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// Parses and validates a config document. The document must name its mode.
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    ExperimentSpec::resolve(RawConfig::from_json(text)?, None)
}

impl ExperimentSpec {
    /// Validates `raw`. A mode given by the caller (the subcommand) must agree
    /// with the document's mode when both are present.
    pub fn resolve(raw: RawConfig, mode: Option<Mode>) -> Result<Self> {
        let doc_mode = raw.mode.as_deref().map(Mode::from_str).transpose()?;
        let mode = match (mode, doc_mode) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::config(format!(
                    "config declares mode {b} but the {a} command was run"
                )))
            }
            (Some(m), _) | (None, Some(m)) => m,
            (None, None) => return Err(CliError::config("mode is required")),
        };

        let deltas = raw
            .delta
            .as_ref()
            .map_or_else(|| vec![DEFAULT_DELTA], OneOrMany::to_vec)
            .into_iter()
            .map(ToleranceBudget::new)
            .collect::<qss_core::Result<Vec<_>>>()?;
        if deltas.is_empty() {
            return Err(CliError::config("delta list is empty"));
        }
        let format = raw
            .format
            .as_deref()
            .map_or(Ok(Format::Csv), Format::from_str)?;
        let fault = raw
            .inject_fault
            .as_deref()
            .map(Fault::from_str)
            .transpose()?;
        if fault.is_some() && mode != Mode::OracleCheck {
            return Err(CliError::config(
                "inject_fault only applies to oracle-check",
            ));
        }
        if raw.threads == Some(0) {
            return Err(CliError::config("threads = 0, expected at least 1"));
        }
        let gate_error =
            GateErrorSpec::new(raw.eps_mean.unwrap_or(0.0), raw.eps_sigma.unwrap_or(0.0))?;
        let rounds = raw.rounds.unwrap_or(DEFAULT_ROUNDS);
        if rounds == 0 {
            return Err(CliError::config("rounds = 0, expected at least 1"));
        }

        let links = raw
            .links
            .as_ref()
            .map(|ls| {
                ls.iter()
                    .map(|s| s.parse::<ChannelKind>().map_err(CliError::from))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        if links.is_some() && (raw.channel.is_some() || raw.p.is_some() || raw.gamma.is_some()) {
            return Err(CliError::config(
                "links replaces channel, p and gamma; give one or the other",
            ));
        }
        let default_channel = match mode {
            Mode::Table1 => "bit-flip",
            Mode::Bound => "dephasing",
            _ => "noiseless",
        };
        let channel =
            ChannelKind::from_name(raw.channel.as_deref().unwrap_or(default_channel), 0.0)?
                .name()
                .to_string();
        let params = channel_params(&channel, &raw, mode)?;

        let mut players = match (&raw.players, &links) {
            (Some(ns), _) => ns.to_vec(),
            (None, Some(ls)) => vec![ls.len()],
            (None, None) => Vec::new(),
        };
        let max_players = raw.max_players.unwrap_or(DEFAULT_ORACLE_PLAYERS);

        match mode {
            Mode::Simulate | Mode::Analytic => {
                if players.len() != 1 {
                    return Err(CliError::config(format!(
                        "{mode} needs exactly one players value, got {}",
                        players.len()
                    )));
                }
                if links.is_none() && params.len() != 1 {
                    return Err(CliError::config(format!(
                        "{mode} needs exactly one channel parameter, got {}",
                        params.len()
                    )));
                }
                if let Some(ls) = &links {
                    if ls.len() != players[0] {
                        return Err(CliError::config(format!(
                            "{} links given for players = {}",
                            ls.len(),
                            players[0]
                        )));
                    }
                }
                require_min_players(&players, 2)?;
            }
            Mode::Sweep => {
                if links.is_some() {
                    return Err(CliError::config(
                        "sweep takes channel and p lists, not links",
                    ));
                }
                if players.is_empty() || params.is_empty() {
                    return Err(CliError::config(
                        "sweep grid is empty: players and p lists must be nonempty",
                    ));
                }
                require_min_players(&players, 2)?;
            }
            Mode::Table1 => {
                if channel != "bit-flip" || links.is_some() {
                    return Err(CliError::config(
                        "table1 is defined for bit-flip links only",
                    ));
                }
                if params.len() != 1 {
                    return Err(CliError::config("table1 needs exactly one p"));
                }
            }
            Mode::Bound => {
                if players.is_empty() {
                    return Err(CliError::config("bound needs at least one players value"));
                }
                require_min_players(&players, 1)?;
            }
            Mode::OracleCheck => {
                if !(2..=MAX_ORACLE_CHECK_PLAYERS).contains(&max_players) {
                    return Err(CliError::config(format!(
                        "max_players = {max_players} is out of range, expected 2 ≤ max_players ≤ {MAX_ORACLE_CHECK_PLAYERS}"
                    )));
                }
                players = (2..=max_players).collect();
            }
        }

        let spec = ExperimentSpec {
            mode,
            players,
            channel,
            params,
            links,
            gate_error,
            rounds,
            seed: raw.seed.unwrap_or(0),
            deltas,
            empirical: raw.empirical.unwrap_or(false),
            budget: raw.budget.unwrap_or(DEFAULT_BUDGET),
            max_players,
            fault,
            threads: raw.threads,
            out: raw.out,
            format,
        };
        if mode == Mode::Sweep && spec.empirical {
            let needed = (spec.cell_count() as u64).saturating_mul(spec.rounds);
            if needed > spec.budget {
                return Err(CliError::config(format!(
                    "sweep needs {needed} Monte Carlo rounds ({} cells × {} rounds) but the budget is {}",
                    spec.cell_count(),
                    spec.rounds,
                    spec.budget
                )));
            }
        }
        Ok(spec)
    }

    /// Number of (N, parameter) cells.
    pub fn cell_count(&self) -> usize {
        match self.mode {
            Mode::Simulate | Mode::Analytic | Mode::Table1 => 1,
            _ => self.players.len() * self.params.len(),
        }
    }

    /// Link channels for `n` players at parameter `param`.
    pub fn links_for(&self, n: usize, param: f64) -> Result<Vec<ChannelKind>> {
        match &self.links {
            Some(ls) => Ok(ls.clone()),
            None => Ok(vec![ChannelKind::from_name(&self.channel, param)?; n]),
        }
    }

    /// Protocol configs in row order: players outer, parameters inner.
    pub fn protocol_configs(&self) -> Result<Vec<ProtocolConfig>> {
        let mut out = Vec::with_capacity(self.cell_count());
        for &n in &self.players {
            let params: &[f64] = if self.links.is_some() {
                &[0.0]
            } else {
                &self.params
            };
            for &param in params {
                let cfg = ProtocolConfig {
                    n_players: n,
                    links: self.links_for(n, param)?,
                    gate_error: self.gate_error,
                    n_rounds: self.rounds,
                    master_seed: self.seed,
                };
                cfg.validate()?;
                out.push(cfg);
            }
        }
        Ok(out)
    }
}

fn require_min_players(players: &[usize], min: usize) -> Result<()> {
    match players.iter().find(|&&n| n < min) {
        Some(n) => Err(CliError::config(format!(
            "players = {n}, expected at least {min}"
        ))),
        None => Ok(()),
    }
}

/// Reads the parameter list for `channel` from `p` or `gamma` and range-checks it.
fn channel_params(channel: &str, raw: &RawConfig, mode: Mode) -> Result<Vec<f64>> {
    let amplitude = channel == "amplitude-damping";
    let (given, other, name) = if amplitude {
        (&raw.gamma, &raw.p, "gamma")
    } else {
        (&raw.p, &raw.gamma, "p")
    };
    if other.is_some() && mode != Mode::OracleCheck {
        return Err(CliError::config(if amplitude {
            "amplitude-damping takes gamma, not p".to_string()
        } else {
            format!("gamma only applies to amplitude-damping, not {channel}")
        }));
    }
    let values = match (given, mode) {
        (Some(v), _) => v.to_vec(),
        (None, Mode::OracleCheck) => DEFAULT_ORACLE_GRID.to_vec(),
        (None, _) if channel == "noiseless" => vec![0.0],
        (None, _) if raw.links.is_some() => Vec::new(),
        (None, Mode::Bound) => Vec::new(),
        (None, _) => {
            return Err(CliError::config(format!(
                "{name} is required for channel {channel}"
            )))
        }
    };
    for &v in &values {
        // Noiseless ignores its parameter, so range-check as a dephasing p.
        let probe = if channel == "noiseless" {
            "dephasing"
        } else {
            channel
        };
        ChannelKind::from_name(probe, v)?;
    }
    if mode == Mode::OracleCheck {
        if let Some(g) = &raw.gamma {
            for v in g.to_vec() {
                ChannelKind::from_name("amplitude-damping", v)?;
            }
        }
    }
    Ok(values)
}
