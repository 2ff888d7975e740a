use std::fmt::Write as _;
use std::path::Path;

use super::{HarnessError, MetricsTable};

pub const CSV_HEADER: &str =
    "round,client_count,verification_rate,authentication_rate,non_repudiation_incidents,accuracy,duration_ms";

/// Marker written where a rate has an empty denominator.
pub const NOT_APPLICABLE: &str = "NA";

fn rate(r: Option<f64>) -> String {
    r.map_or_else(|| NOT_APPLICABLE.to_string(), |v| format!("{v:.2}"))
}

/// One row per round, then a summary row labelled `summary` (or `partial`
/// for an aborted run) holding pooled rates, total incidents, the final
/// accuracy and the total duration. With `timing` off durations are 0.
pub fn to_csv(table: &MetricsTable, timing: bool) -> Result<String, HarnessError> {
    if table.is_empty() {
        return Err(HarnessError::EmptyTable);
    }
    let ms = |d: std::time::Duration| if timing { d.as_secs_f64() * 1e3 } else { 0.0 };
    let mut out = String::new();
    writeln!(out, "{CSV_HEADER}").unwrap();
    for r in &table.reports {
        writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.3}",
            r.round,
            r.client_count,
            rate(r.verification_rate()),
            rate(r.authentication_rate()),
            r.non_repudiation_incidents(),
            r.accuracy,
            ms(r.duration),
        )
        .unwrap();
    }
    let s = table.summary();
    writeln!(
        out,
        "{},{},{},{},{},{},{:.3}",
        if table.aborted.is_some() {
            "partial"
        } else {
            "summary"
        },
        s.submissions,
        rate(s.metrics.verification_rate()),
        rate(s.metrics.authentication_rate()),
        s.metrics.incidents,
        s.final_accuracy
            .map_or_else(|| NOT_APPLICABLE.to_string(), |a| format!("{a:.6}")),
        ms(s.duration),
    )
    .unwrap();
    Ok(out)
}

pub fn emit_csv(table: &MetricsTable, path: &Path, timing: bool) -> Result<(), HarnessError> {
    let text = to_csv(table, timing)?;
    std::fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}
