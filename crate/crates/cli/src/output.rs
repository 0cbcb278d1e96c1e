//! File emission: atomic writes and the CSV formats.

use dvq_core::selection::SweepResult;
use dvq_core::{ForecastEnsemble, TrendSummary};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

/// Writes via a temp file in the same directory plus a rename, so readers
/// never observe a half-written file.
pub fn atomic_write(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let mut tmp = path.to_path_buf();
    tmp.set_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

/// One row per path, `horizon * d` columns, shortest round-trip rendering.
pub fn ensemble_csv(ens: &ForecastEnsemble) -> String {
    let mut out = String::new();
    for path in ens.paths() {
        for (i, v) in path.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Columns `step,mean,variance,lower,upper`, step 1-based.
pub fn summary_csv(summary: &TrendSummary) -> String {
    let mut out = String::from("step,mean,variance,lower,upper\n");
    for s in 0..summary.steps() {
        writeln!(
            out,
            "{},{},{},{},{}",
            s + 1,
            summary.mean[s],
            summary.variance[s],
            summary.lower[s],
            summary.upper[s]
        )
        .unwrap();
    }
    out
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Columns `n1,n2,sse,status`, one row per grid cell.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from("n1,n2,sse,status\n");
    for cell in &result.cells {
        writeln!(
            out,
            "{},{},{},{}",
            cell.n1,
            cell.n2,
            cell.sse,
            csv_escape(&cell.status)
        )
        .unwrap();
    }
    out
}
