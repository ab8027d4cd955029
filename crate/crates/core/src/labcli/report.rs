//! CSV and plain-text rendering. All output is LF-terminated and fully
//! determined by the rows passed in.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::sweep::{ReportRow, RowMetrics};
use crate::error::{LabError, Result};
use crate::paperform::SuspectExpression;
use crate::protocol::{DtChoice, ProtocolReport};

/// Scientific notation with `digits` significant digits.
pub fn format_number(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), x)
}

fn opt_number(x: Option<f64>, digits: usize) -> String {
    x.map(|v| format_number(v, digits)).unwrap_or_default()
}

fn opt_bool(x: Option<bool>) -> String {
    x.map(|b| b.to_string()).unwrap_or_default()
}

/// Serializes a header and records as LF-terminated CSV.
pub fn csv_table(header: &str, records: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut write = |rec: &[String]| w.write_record(rec).expect("writing to memory cannot fail");
    write(&header.split(',').map(String::from).collect::<Vec<_>>());
    for rec in records {
        write(&rec);
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("fields are UTF-8")
}

pub const SWEEP_HEADER: &str = "amplitude_input,b,a,delta,dt_mode,dt,k,xi,e0,e1,\
total_exact,total_paper,baseline_exact,baseline_paper,baseline_paper_expansion,\
paper_new_cost,original_cost,baseline_ratio,final_overlap_exact,overlap_exponent,\
overlap_fit_indeterminate,overlap_k_paper,survival_exact_k,survival_k_paper,\
survival_discrepancy,exact_minus_baseline_exact,paper_minus_baseline_exact,\
paper_minus_baseline_paper,paper_claim_vs_paper_baseline,paper_claim_vs_exact_baseline,\
exact_sanity,pruned_branches,flag_overlap_k_dt_power,flag_survival_k_coefficient,error";

fn dt_mode(dt: DtChoice) -> &'static str {
    match dt {
        DtChoice::Auto => "auto",
        DtChoice::Fixed(_) => "fixed",
    }
}

fn metric_fields(m: &RowMetrics, d: usize) -> Vec<String> {
    let n = |x: f64| format_number(x, d);
    let diff = |t: Option<f64>, base: f64| opt_number(t.map(|t| t - base), d);
    vec![
        opt_number(m.total_exact, d),
        opt_number(m.total_paper, d),
        n(m.baseline_exact),
        n(m.baseline_paper),
        n(m.baseline_paper_expansion),
        n(m.paper_new_cost),
        opt_number(m.original_cost, d),
        n(m.baseline_ratio()),
        n(m.final_overlap),
        opt_number(m.overlap_exponent, d),
        m.overlap_fit_indeterminate.to_string(),
        n(m.overlap_k_paper),
        n(m.survival_exact),
        n(m.survival_paper),
        n(m.survival_discrepancy()),
        diff(m.total_exact, m.baseline_exact),
        diff(m.total_paper, m.baseline_exact),
        diff(m.total_paper, m.baseline_paper),
        opt_bool(m.paper_claim_vs_paper_baseline()),
        opt_bool(m.paper_claim_vs_exact_baseline()),
        opt_bool(m.exact_sanity_holds()),
        m.pruned_branches.to_string(),
    ]
}

/// One header line plus one line per row.
pub fn render_csv(rows: &[ReportRow], digits: usize) -> String {
    csv_table(
        SWEEP_HEADER,
        rows.iter().map(|row| {
            let p = &row.point;
            let mut fields = vec![
                p.amplitude.label().to_string(),
                opt_number(p.amplitude.b_at(p.delta).ok(), digits),
                String::new(),
                format_number(p.delta, digits),
                dt_mode(p.dt).to_string(),
                String::new(),
                p.k.to_string(),
                format_number(p.prior, digits),
                format_number(p.e0, digits),
                format_number(p.e1, digits),
            ];
            if let DtChoice::Fixed(dt) = p.dt {
                fields[5] = format_number(dt, digits);
            }
            if let super::sweep::AmplitudeValue::A(a) = p.amplitude {
                fields[2] = format_number(a, digits);
            }
            let error = match &row.outcome {
                Ok(m) => {
                    fields[2] = format_number(m.a, digits);
                    fields[5] = format_number(m.dt, digits);
                    fields.extend(metric_fields(m, digits));
                    String::new()
                }
                Err(e) => {
                    fields.extend(std::iter::repeat_n(String::new(), 22));
                    e.clone()
                }
            };
            fields.push("true".into());
            fields.push("true".into());
            fields.push(error);
            fields
        }),
    )
}

fn verdict(holds: Option<bool>, yes: &str, no: &str) -> String {
    match holds {
        Some(true) => yes.into(),
        Some(false) => no.into(),
        None => "not evaluated".into(),
    }
}

/// Human-readable per-row verdicts.
pub fn render_summary(rows: &[ReportRow]) -> String {
    let g = |x: f64| format_number(x, super::config::DEFAULT_DIGITS);
    let mut out = String::new();
    for row in rows {
        let p = &row.point;
        let _ = write!(
            out,
            "{}={} delta={} k={} xi={} dt=",
            p.amplitude.label(),
            p.amplitude.value(),
            p.delta,
            p.k,
            p.prior
        );
        let m = match &row.outcome {
            Ok(m) => m,
            Err(e) => {
                let _ = writeln!(
                    out,
                    "{}\n  error: {e}\n",
                    match p.dt {
                        DtChoice::Auto => "auto".to_string(),
                        DtChoice::Fixed(x) => x.to_string(),
                    }
                );
                continue;
            }
        };
        let _ = writeln!(
            out,
            "{}{}",
            m.dt,
            if p.dt == DtChoice::Auto {
                " (auto)"
            } else {
                ""
            }
        );
        if let Some(t) = m.total_paper {
            let _ = writeln!(out, "  total cost, paper accounting: {}", g(t));
        }
        if let Some(t) = m.total_exact {
            let _ = writeln!(out, "  total cost, exact accounting: {}", g(t));
        }
        let _ = writeln!(
            out,
            "  closed-form new cost:          {}",
            g(m.paper_new_cost)
        );
        if let Some(c) = m.original_cost {
            let _ = writeln!(
                out,
                "  closed-form original cost:     {} (ratio {})",
                g(c),
                g(c / m.paper_new_cost)
            );
        }
        let _ = writeln!(
            out,
            "  baselines: exact {}  paper-convention {}  ratio {}",
            g(m.baseline_exact),
            g(m.baseline_paper),
            g(m.baseline_ratio())
        );
        let _ = writeln!(
            out,
            "  final overlap |<psi0|psi1>|: {}  fitted delta exponent {}{}",
            g(m.final_overlap),
            m.overlap_exponent.map(g).unwrap_or_else(|| "n/a".into()),
            if m.overlap_fit_indeterminate {
                " (indeterminate)"
            } else {
                ""
            }
        );
        let _ = writeln!(
            out,
            "  paper-mode claim vs paper-convention baseline: {}",
            verdict(m.paper_claim_vs_paper_baseline(), "holds", "fails")
        );
        let _ = writeln!(
            out,
            "  paper-mode claim vs exact Helstrom baseline:   {}",
            verdict(m.paper_claim_vs_exact_baseline(), "holds", "fails")
        );
        let _ = writeln!(
            out,
            "  exact-mode Helstrom sanity: {}",
            verdict(m.exact_sanity_holds(), "holds", "VIOLATED")
        );
        if m.pruned_branches > 0 {
            let _ = writeln!(out, "  pruned branches: {}", m.pruned_branches);
        }
        for s in SuspectExpression::ALL {
            let _ = writeln!(out, "  flag {}: {}", s.key(), s.description());
        }
        out.push('\n');
    }
    out
}

pub const BASELINE_HEADER: &str =
    "amplitude_input,b,a,delta,xi,baseline_exact,baseline_paper,baseline_paper_expansion,baseline_ratio,error";

/// Baseline-only table; the protocol columns are left out.
pub fn render_baseline_csv(rows: &[ReportRow], digits: usize) -> String {
    let n = |x: f64| format_number(x, digits);
    csv_table(
        BASELINE_HEADER,
        rows.iter().map(|row| {
            let p = &row.point;
            let b = opt_number(p.amplitude.b_at(p.delta).ok(), digits);
            match &row.outcome {
                Ok(m) => vec![
                    p.amplitude.label().into(),
                    b,
                    n(m.a),
                    n(p.delta),
                    n(p.prior),
                    n(m.baseline_exact),
                    n(m.baseline_paper),
                    n(m.baseline_paper_expansion),
                    n(m.baseline_ratio()),
                    String::new(),
                ],
                Err(e) => {
                    let mut rec = vec![
                        p.amplitude.label().into(),
                        b,
                        String::new(),
                        n(p.delta),
                        n(p.prior),
                    ];
                    rec.extend(std::iter::repeat_n(String::new(), 4));
                    rec.push(e.clone());
                    rec
                }
            }
        }),
    )
}

pub const LEAF_HEADER: &str =
    "mode,leaf,p_given_h0,p_given_h1,marginal,posterior,leaf_cost,weighted_cost";

/// The outcome tree of one or more single-point runs.
pub fn render_leaves_csv(reports: &[ProtocolReport], digits: usize) -> String {
    let n = |x: f64| format_number(x, digits);
    csv_table(
        LEAF_HEADER,
        reports.iter().flat_map(|r| {
            let leaves = r.leaves.iter().map(move |leaf| {
                vec![
                    r.mode.to_string(),
                    leaf.kind.to_string(),
                    n(leaf.p_given_h0),
                    n(leaf.p_given_h1),
                    n(leaf.marginal),
                    n(leaf.posterior),
                    n(leaf.leaf_cost.value()),
                    n(leaf.marginal * leaf.leaf_cost.value()),
                ]
            });
            let total = vec![
                r.mode.to_string(),
                "total".into(),
                String::new(),
                String::new(),
                n(r.leaves.iter().map(|l| l.marginal).sum()),
                String::new(),
                String::new(),
                n(r.total_cost.value()),
            ];
            leaves.chain(std::iter::once(total))
        }),
    )
}

/// `<stem>.summary.txt` next to `csv_path`.
pub fn summary_path(csv_path: &Path) -> PathBuf {
    let stem = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    csv_path.with_file_name(format!("{stem}.summary.txt"))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: std::io::Error) -> LabError {
    LabError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Writes the CSV to `path` and the summary alongside it.
pub fn write_report(rows: &[ReportRow], path: &Path, digits: usize) -> Result<PathBuf> {
    if rows.is_empty() {
        return Err(LabError::validation("refusing to write an empty report"));
    }
    write_file(path, &render_csv(rows, digits))?;
    let summary = summary_path(path);
    write_file(&summary, &render_summary(rows))?;
    Ok(summary)
}
