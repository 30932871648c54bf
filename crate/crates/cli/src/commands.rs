//! Subcommand implementations. Each returns the data table plus a short
//! human-readable summary; nothing here touches stdout or the filesystem.

use std::fmt::Write as _;

use qss_core::analytics::{closed_form_rate, ORACLE_MAX_PLAYERS};
use qss_core::{
    exhaustive_error_prob, gate_error_bound, noise_bound, table1, ChannelKind, Engine,
    Error as CoreError, ErrorEstimate, ProtocolConfig, ToleranceBudget,
};

use crate::config::{ExperimentSpec, Mode};
use crate::error::{CliError, Result};
use crate::format::{fmt_g, fmt_opt, write_table};
use crate::oracle_check;

pub const SIMULATE_HEADER: [&str; 11] = [
    "N",
    "channel",
    "param",
    "eps_mean",
    "rounds",
    "n_valid",
    "n_errors",
    "empirical_rate",
    "ci_half_width",
    "analytic_rate",
    "within_3sigma",
];

/// A command's output before it is written anywhere.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// For stderr.
    pub summary: String,
    /// Set when an oracle check exceeded its tolerance.
    pub failure: Option<String>,
}

impl Report {
    fn new(header: Vec<String>, rows: Vec<Vec<String>>) -> Self {
        Report {
            header,
            rows,
            summary: String::new(),
            failure: None,
        }
    }

    /// Renders the table in the spec's format.
    pub fn to_bytes(&self, spec: &ExperimentSpec) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_table(&mut buf, spec.format, &self.header, &self.rows)?;
        Ok(buf)
    }
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

/// Runs the command for `spec.mode`, on a dedicated pool when `spec.threads` is set.
pub fn execute(spec: &ExperimentSpec) -> Result<Report> {
    match spec.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config(format!("cannot start {n} threads: {e}")))?
            .install(|| dispatch(spec)),
        None => dispatch(spec),
    }
}

fn dispatch(spec: &ExperimentSpec) -> Result<Report> {
    match spec.mode {
        Mode::Simulate => cmd_simulate(spec),
        Mode::Analytic => cmd_analytic(spec),
        Mode::Sweep => cmd_sweep(spec),
        Mode::Table1 => cmd_table1(spec.params[0]),
        Mode::Bound => cmd_bound(spec),
        Mode::OracleCheck => oracle_check::cmd_oracle_check(spec),
    }
}

/// Channel name and parameter columns. Links that differ are summarised as a
/// `;`-separated list.
fn describe_links(links: &[ChannelKind]) -> (String, String) {
    let first = links[0];
    if links.iter().all(|k| k.name() == first.name()) {
        let param = if links.iter().all(|k| k.param() == first.param()) {
            fmt_g(first.param())
        } else {
            links
                .iter()
                .map(|k| fmt_g(k.param()))
                .collect::<Vec<_>>()
                .join(";")
        };
        (first.name().to_string(), param)
    } else {
        let digest = links
            .iter()
            .map(|k| match k {
                ChannelKind::Noiseless => "noiseless".to_string(),
                k => format!("{}({})", k.name(), fmt_g(k.param())),
            })
            .collect::<Vec<_>>()
            .join(";");
        ("mixed".to_string(), digest)
    }
}

/// Monte Carlo counts for one cell. `estimate` is `None` when no round was valid.
struct Cell {
    n_valid: u64,
    n_errors: u64,
    estimate: Option<ErrorEstimate>,
    analytic: Option<f64>,
}

fn run_cell(cfg: &ProtocolConfig) -> Result<Cell> {
    let engine = Engine::new(cfg.clone())?;
    let analytic = engine.analytic_rate();
    match engine.estimate() {
        Ok(est) => Ok(Cell {
            n_valid: est.n_valid,
            n_errors: est.n_errors,
            estimate: Some(est),
            analytic,
        }),
        Err(CoreError::NoValidRounds { .. }) => Ok(Cell {
            n_valid: 0,
            n_errors: 0,
            estimate: None,
            analytic,
        }),
        Err(e) => Err(e.into()),
    }
}

fn simulate_row(cfg: &ProtocolConfig, cell: Option<&Cell>) -> Vec<String> {
    let (channel, param) = describe_links(&cfg.links);
    let mut row = vec![
        cfg.n_players.to_string(),
        channel,
        param,
        fmt_g(cfg.gate_error.mean()),
    ];
    match cell {
        Some(c) => {
            let est = c.estimate.as_ref();
            row.extend([
                cfg.n_rounds.to_string(),
                c.n_valid.to_string(),
                c.n_errors.to_string(),
                fmt_opt(est.map(|e| e.empirical_rate)),
                fmt_opt(est.map(|e| e.ci_half_width)),
                fmt_opt(c.analytic),
                est.and_then(ErrorEstimate::within_3sigma)
                    .map(|b| b.to_string())
                    .unwrap_or_default(),
            ]);
        }
        None => {
            let analytic = closed_form_rate(&cfg.links, &cfg.gate_error);
            // No Monte Carlo: rounds through ci_half_width stay empty.
            row.extend(std::iter::repeat_n(String::new(), 5));
            row.push(fmt_opt(analytic));
            row.push(String::new());
        }
    }
    row
}

pub fn cmd_simulate(spec: &ExperimentSpec) -> Result<Report> {
    let mut rows = Vec::new();
    let mut summary = String::new();
    for cfg in spec.protocol_configs()? {
        let cell = run_cell(&cfg)?;
        if let Some(false) = cell
            .estimate
            .as_ref()
            .and_then(ErrorEstimate::within_3sigma)
        {
            let _ = writeln!(
                summary,
                "N={}: empirical rate is outside 3σ of the closed form",
                cfg.n_players
            );
        }
        if cell.estimate.is_none() {
            let _ = writeln!(
                summary,
                "N={}: no valid rounds, rate columns left empty",
                cfg.n_players
            );
        }
        rows.push(simulate_row(&cfg, Some(&cell)));
    }
    let mut report = Report::new(header(&SIMULATE_HEADER), rows);
    report.summary = summary;
    Ok(report)
}

/// Admissible channel parameter at budget `δ`, when the channel has a proven bound.
///
/// Bit-flip uses `N−1` links' worth of noise; a noiseless channel reports the
/// admissible gate offset instead.
pub fn admissible_param(channel: &str, n: usize, budget: ToleranceBudget) -> Option<f64> {
    match channel {
        "dephasing" | "depolarizing" => Some(noise_bound(n, budget).exact),
        "bit-flip" if n >= 2 => Some(noise_bound(n - 1, budget).exact),
        "noiseless" => Some(gate_error_bound(n, budget).exact),
        _ => None,
    }
}

fn delta_label(budget: ToleranceBudget) -> String {
    format!("bound_delta_{}", fmt_g(budget.delta()))
}

pub fn cmd_sweep(spec: &ExperimentSpec) -> Result<Report> {
    let mut cols = header(&SIMULATE_HEADER);
    cols.extend(spec.deltas.iter().map(|&d| delta_label(d)));
    let mut rows = Vec::new();
    for cfg in spec.protocol_configs()? {
        let cell = if spec.empirical {
            Some(run_cell(&cfg)?)
        } else {
            None
        };
        let mut row = simulate_row(&cfg, cell.as_ref());
        row.extend(
            spec.deltas
                .iter()
                .map(|&d| fmt_opt(admissible_param(&spec.channel, cfg.n_players, d))),
        );
        rows.push(row);
    }
    let mut report = Report::new(cols, rows);
    report.summary = format!(
        "{} cells, {}",
        spec.cell_count(),
        if spec.empirical {
            "analytic and Monte Carlo"
        } else {
            "analytic only"
        }
    );
    Ok(report)
}

pub fn cmd_analytic(spec: &ExperimentSpec) -> Result<Report> {
    let cols = header(&[
        "N",
        "channel",
        "param",
        "eps_mean",
        "eps_sigma",
        "analytic_rate",
        "oracle_rate",
    ]);
    let mut rows = Vec::new();
    for cfg in spec.protocol_configs()? {
        let (channel, param) = describe_links(&cfg.links);
        let oracle = if cfg.n_players <= ORACLE_MAX_PLAYERS {
            Some(exhaustive_error_prob(
                cfg.n_players,
                &cfg.links,
                &cfg.gate_error,
            )?)
        } else {
            None
        };
        rows.push(vec![
            cfg.n_players.to_string(),
            channel,
            param,
            fmt_g(cfg.gate_error.mean()),
            fmt_g(cfg.gate_error.jitter_sigma()),
            fmt_opt(closed_form_rate(&cfg.links, &cfg.gate_error)),
            fmt_opt(oracle),
        ]);
    }
    Ok(Report::new(cols, rows))
}

pub fn cmd_table1(p: f64) -> Result<Report> {
    let rows = table1(p)?;
    let cols = header(&["phi1", "phi2", "a", "p_plus", "p_minus", "p_error"]);
    let mut summary = format!("bit-flip p = {}\n", fmt_g(p));
    let _ = writeln!(
        summary,
        "{:>5} {:>5} {:>15} {:>15} {:>15} {:>15}",
        "φ1", "φ2", "a", "P(+)", "P(−)", "P_error"
    );
    let data = rows
        .iter()
        .map(|r| {
            let cells = vec![
                r.phi1.to_string(),
                r.phi2.to_string(),
                fmt_g(r.a),
                fmt_g(r.p_plus),
                fmt_g(r.p_minus),
                fmt_g(r.p_error),
            ];
            let _ = writeln!(
                summary,
                "{:>5} {:>5} {:>15} {:>15} {:>15} {:>15}",
                cells[0], cells[1], cells[2], cells[3], cells[4], cells[5]
            );
            cells
        })
        .collect();
    let mut report = Report::new(cols, data);
    report.summary = summary;
    Ok(report)
}

pub fn cmd_bound(spec: &ExperimentSpec) -> Result<Report> {
    let cols = header(&[
        "N",
        "delta",
        "channel",
        "noise_bound",
        "noise_bound_approx",
        "gate_bound",
        "gate_bound_approx",
    ]);
    let mut rows = Vec::new();
    for &n in &spec.players {
        for &budget in &spec.deltas {
            // The channel's effective number of noisy links.
            let noisy_links = match spec.channel.as_str() {
                "dephasing" | "depolarizing" => Some(n),
                "bit-flip" => n.checked_sub(1).filter(|&m| m >= 1),
                _ => None,
            };
            let noise = noisy_links.map(|m| noise_bound(m, budget));
            let gate = gate_error_bound(n, budget);
            rows.push(vec![
                n.to_string(),
                fmt_g(budget.delta()),
                spec.channel.clone(),
                fmt_opt(noise.map(|b| b.exact)),
                fmt_opt(noise.map(|b| b.approx)),
                fmt_g(gate.exact),
                fmt_g(gate.approx),
            ]);
        }
    }
    Ok(Report::new(cols, rows))
}
