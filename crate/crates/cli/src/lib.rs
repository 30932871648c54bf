//! Batch experiment runner: JSON configs in, deterministic CSV out.
//!
//! A run is resolved into an [`ExperimentSpec`], handed to [`execute`], and the
//! resulting [`Report`] is written with [`write_report`]. Monte Carlo output is
//! byte-identical for a fixed seed regardless of the thread count.

pub mod commands;
pub mod config;
mod error;
pub mod format;
pub mod oracle_check;

use std::fs::File;
use std::io::{self, BufWriter, Write};

pub use commands::{execute, Report};
pub use config::{parse_config, ExperimentSpec, Mode, RawConfig};
pub use error::{exit, CliError, Result};

/// Writes the table to `spec.out` (or `stdout`) and the summary to `stderr`.
pub fn write_report(spec: &ExperimentSpec, report: &Report) -> Result<()> {
    let bytes = report.to_bytes(spec)?;
    match &spec.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(&bytes)?;
            w.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()?;
        }
    }
    if !report.summary.is_empty() {
        eprintln!("{}", report.summary.trim_end());
    }
    Ok(())
}
