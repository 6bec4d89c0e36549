use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const METRICS_HEADER: &str = "round,exploitability,episodes,mean_dkl,elbo,ms";

/// One evaluation point of an experiment. `elbo` holds the training loss
/// (negative evidence lower bound) of the last model update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub round: u64,
    pub exploitability: f64,
    pub episodes: u64,
    pub mean_dkl: f64,
    pub elbo: f64,
    pub ms: f64,
}

pub fn format_metrics(rows: &[MetricsRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.round, r.exploitability, r.episodes, r.mean_dkl, r.elbo, r.ms
        ));
    }
    out
}

pub fn emit_metrics(rows: &[MetricsRow], path: impl AsRef<Path>) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Empty("metrics rows"));
    }
    fs::write(path, format_metrics(rows))?;
    Ok(())
}

pub fn parse_metrics(text: &str) -> Result<Vec<MetricsRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(METRICS_HEADER) => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header {METRICS_HEADER:?}"),
            })
        }
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let err = |msg: String| Error::Parse { line: i + 2, msg };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(err(format!("expected 6 columns, got {}", f.len())));
            }
            let float = |s: &str| s.parse::<f64>().map_err(|e| err(format!("{s:?}: {e}")));
            let int = |s: &str| s.parse::<u64>().map_err(|e| err(format!("{s:?}: {e}")));
            Ok(MetricsRow {
                round: int(f[0])?,
                exploitability: float(f[1])?,
                episodes: int(f[2])?,
                mean_dkl: float(f[3])?,
                elbo: float(f[4])?,
                ms: float(f[5])?,
            })
        })
        .collect()
}
