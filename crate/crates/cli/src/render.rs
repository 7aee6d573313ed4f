//! Table-mode rendering. Numbers carry two decimals.

use std::fmt::Write as _;

use roadkernel::stress::StressReport;
use roadkernel::{FacilityReport, ValidationReport};

/// Left-aligns the first column, right-aligns the rest.
pub fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0; cols];
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (i, (cell, w)) in row.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(line, "{cell:<w$}");
            } else {
                let _ = write!(line, "  {cell:>w$}");
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn f2(x: f64) -> String {
    format!("{x:.2}")
}

pub fn facility(result: &FacilityReport) -> String {
    let mut rows = vec![["Segment", "Flow (pc/h)", "FFS (mph)", "AS (mph)", "PF (%)", "FD (fol/mi)", "LOS"]
        .map(String::from)
        .to_vec()];
    for s in &result.segments {
        rows.push(vec![
            (s.index + 1).to_string(),
            f2(s.flow_pc_h),
            f2(s.ffs_mph),
            f2(s.as_mph),
            f2(s.pf_pct),
            f2(s.fd_fol_per_mi),
            s.los.to_string(),
        ]);
    }
    let mut out = table(&rows);
    let _ = writeln!(
        out,
        "Overall: FD {} fol/mi, LOS {}",
        f2(result.overall_fd),
        result.overall_los
    );
    out
}

pub fn validation(report: &ValidationReport, timing: bool) -> String {
    let mut out = format!(
        "status: {}\nchecks: {}\n",
        match report.status {
            roadkernel::validator::Status::Pass => "pass",
            roadkernel::validator::Status::Reject => "reject",
        },
        report.checks_performed
    );
    if timing {
        let _ = writeln!(out, "elapsed: {} us", f2(report.elapsed_us));
    }
    if !report.violations.is_empty() {
        let mut rows = vec![["Rule", "Parameter", "Observed", "Severity", "Constraint", "Citation"]
            .map(String::from)
            .to_vec()];
        for v in &report.violations {
            rows.push(vec![
                v.rule_id.clone(),
                v.parameter.clone(),
                v.observed.as_number().map_or_else(|| v.observed.to_string(), f2),
                v.severity.to_string(),
                v.constraint.clone(),
                v.citation.clone(),
            ]);
        }
        out.push_str(&table(&rows));
    }
    if !report.unknown_keys.is_empty() {
        let _ = writeln!(out, "unknown parameters: {}", report.unknown_keys.join(", "));
    }
    out
}

pub fn stress(report: &StressReport, timing: bool) -> String {
    let m = &report.matrix;
    let opt = |x: Option<f64>| x.map_or_else(|| "n/a".into(), f2);
    let mut rows = vec![
        vec!["Metric".to_string(), "Value".to_string()],
        vec!["Vectors".into(), report.n.to_string()],
        vec!["True Positives".into(), m.tp.to_string()],
        vec!["True Negatives".into(), m.tn.to_string()],
        vec!["False Positives".into(), m.fp.to_string()],
        vec!["False Negatives".into(), m.fn_.to_string()],
        vec!["Precision".into(), opt(report.precision)],
        vec!["Recall".into(), opt(report.recall)],
        vec!["F1 Score".into(), opt(report.f1)],
    ];
    if let Some(seed) = report.seed {
        rows.insert(1, vec!["Seed".into(), seed.to_string()]);
    }
    if timing {
        rows.push(vec!["Median latency (us)".into(), f2(report.latency_us.median)]);
        rows.push(vec!["p99 latency (us)".into(), f2(report.latency_us.p99)]);
    }
    table(&rows)
}
