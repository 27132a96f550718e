use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::tail::TailEstimate;
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 11] = [
    "t", "trials", "hits", "p_hat", "ci_low", "ci_high", "n", "statistic", "dist", "shift",
    "master_seed",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// Format implied by the file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::invalid(format!("unknown output format '{s}'"))),
        }
    }
}

/// 17 significant digits.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(estimate: &TailEstimate, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    let c = &estimate.config;
    for p in &estimate.points {
        w.write_record([
            real(p.t),
            p.trials.to_string(),
            p.hits.to_string(),
            real(p.p_hat),
            real(p.ci_low),
            real(p.ci_high),
            c.n.to_string(),
            c.statistic.label(),
            c.dist.name().to_string(),
            c.shift.label(),
            c.master_seed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Reals are written in shortest round-trip form, which re-parses exactly.
pub fn write_json<W: Write>(estimate: &TailEstimate, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, estimate)?;
    writeln!(out).map_err(|e| Error::io("<json output>", e))?;
    Ok(())
}

pub fn emit_results(estimate: &TailEstimate, path: &Path, format: OutputFormat) -> Result<()> {
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => write_csv(estimate, &mut buf)?,
        OutputFormat::Json => write_json(estimate, &mut buf)?,
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}
