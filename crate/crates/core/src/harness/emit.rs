//! CSV emission: the per-run detail file, the per-(target, algorithm)
//! aggregate file, and convergence traces. All writers produce byte-identical
//! output for identical inputs; floats are written in shortest round-trip
//! form.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Error;
use crate::result::AlgoResult;

use super::ResultRecord;

/// One aggregate row: feasible-only statistics of a (target, algorithm) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub sinr_db: f64,
    pub algo: String,
    pub n_feasible: usize,
    pub mean_power_w: f64,
    pub std_power_w: f64,
    pub mean_active: f64,
}

/// Aggregate sorted detail records by (sinr_db, algo). Only rows with a
/// feasible status enter the statistics; the standard deviation uses the
/// n − 1 denominator and is 0 for a single sample.
pub fn summarize(records: &[ResultRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let head = &records[i];
        let mut j = i;
        while j < records.len()
            && records[j].sinr_db.to_bits() == head.sinr_db.to_bits()
            && records[j].algo == head.algo
        {
            j += 1;
        }
        let group = &records[i..j];
        let feasible: Vec<&ResultRecord> = group.iter().filter(|r| r.is_feasible()).collect();
        let n = feasible.len();
        let (mean_power_w, std_power_w, mean_active) = if n == 0 {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            let mean = feasible.iter().map(|r| r.power_w).sum::<f64>() / n as f64;
            let std = if n <= 1 {
                0.0
            } else {
                let ss = feasible
                    .iter()
                    .map(|r| (r.power_w - mean) * (r.power_w - mean))
                    .sum::<f64>();
                (ss / (n - 1) as f64).sqrt()
            };
            let active =
                feasible.iter().map(|r| r.active_count as f64).sum::<f64>() / n as f64;
            (mean, std, active)
        };
        rows.push(SummaryRow {
            sinr_db: head.sinr_db,
            algo: head.algo.clone(),
            n_feasible: n,
            mean_power_w,
            std_power_w,
            mean_active,
        });
        i = j;
    }
    rows
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), Error> {
    let mut writer = csv::Writer::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    for row in rows {
        writer.serialize(row).map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write `results.csv` (detail) and `summary.csv` (aggregates) into
/// `out_dir`, creating it if needed. Records must already be sorted; both
/// paths are returned.
pub fn emit_results(
    records: &[ResultRecord],
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf), Error> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to emit".into()));
    }
    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let detail_path = out_dir.join("results.csv");
    let summary_path = out_dir.join("summary.csv");
    write_csv(&detail_path, records)?;
    write_csv(&summary_path, &summarize(records))?;
    Ok((detail_path, summary_path))
}

/// Write a convergence trace (`t,lambda,residual,tol1,tol2,lagrangian`).
pub fn emit_trace(result: &AlgoResult, path: &Path) -> Result<(), Error> {
    if result.trace.is_empty() {
        return Err(Error::InvalidArgument(
            "result carries no convergence trace".into(),
        ));
    }
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|source| Error::Io {
                path: dir.to_path_buf(),
                source,
            })?;
        }
    }
    write_csv(path, &result.trace)
}
