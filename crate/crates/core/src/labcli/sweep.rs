use std::cmp::Ordering;

use rayon::prelude::*;

use super::config::{AmplitudeGrid, ModeSelection, SweepConfig};
use crate::error::{LabError, Result};
use crate::paperform::{self, fit_scaling, ScalingQuantity};
use crate::protocol::{self, AccountingMode, DtChoice, ProtocolParams, ProtocolTemplate};
use crate::qcore::MeasurementDirection;

/// Tolerance of the Helstrom sanity bound on exact-mode totals.
pub const SANITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplitudeValue {
    B(f64),
    A(f64),
}

impl AmplitudeValue {
    pub fn value(self) -> f64 {
        match self {
            AmplitudeValue::B(x) | AmplitudeValue::A(x) => x,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AmplitudeValue::B(_) => "b",
            AmplitudeValue::A(_) => "a",
        }
    }

    /// Resolves `b` at a given coupling.
    pub fn b_at(self, delta: f64) -> Result<f64> {
        match self {
            AmplitudeValue::B(b) => Ok(b),
            AmplitudeValue::A(a) if delta > 0.0 => Ok((1.0 - a * a).max(0.0).sqrt() / delta),
            AmplitudeValue::A(1.0) => Ok(0.0),
            AmplitudeValue::A(a) => Err(LabError::validation(format!(
                "a = {a} with delta = 0 violates a^2 + (b delta)^2 = 1"
            ))),
        }
    }
}

/// One parameter tuple of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub amplitude: AmplitudeValue,
    pub delta: f64,
    pub dt: DtChoice,
    pub k: usize,
    pub prior: f64,
    pub e0: f64,
    pub e1: f64,
    pub direction: MeasurementDirection,
}

impl SweepPoint {
    pub fn template(&self) -> Result<ProtocolTemplate> {
        Ok(ProtocolTemplate {
            b: self.amplitude.b_at(self.delta)?,
            k: self.k,
            dt: self.dt,
            prior: self.prior,
            e0: self.e0,
            e1: self.e1,
            direction: self.direction.clone(),
            mode: AccountingMode::Exact,
        })
    }

    pub fn params(&self) -> Result<ProtocolParams> {
        self.template()?.at_delta(self.delta)
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        let dt_key = |d: DtChoice| match d {
            DtChoice::Auto => f64::NEG_INFINITY,
            DtChoice::Fixed(x) => x,
        };
        self.amplitude
            .value()
            .total_cmp(&other.amplitude.value())
            .then(self.delta.total_cmp(&other.delta))
            .then(dt_key(self.dt).total_cmp(&dt_key(other.dt)))
            .then(self.k.cmp(&other.k))
            .then(self.prior.total_cmp(&other.prior))
    }
}

/// Everything computed for one parameter tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct RowMetrics {
    pub a: f64,
    pub b: f64,
    pub dt: f64,
    pub total_exact: Option<f64>,
    pub total_paper: Option<f64>,
    pub baseline_exact: f64,
    pub baseline_paper: f64,
    pub baseline_paper_expansion: f64,
    pub paper_new_cost: f64,
    /// Only defined on the orthogonality line `2 k a dt = b`.
    pub original_cost: Option<f64>,
    pub final_overlap: f64,
    pub overlap_exponent: Option<f64>,
    pub overlap_fit_indeterminate: bool,
    pub overlap_k_paper: f64,
    pub survival_exact: f64,
    pub survival_paper: f64,
    pub pruned_branches: usize,
}

impl RowMetrics {
    /// `baseline_paper / baseline_exact`; infinite when the exact baseline is 0.
    pub fn baseline_ratio(&self) -> f64 {
        if self.baseline_exact > 0.0 {
            self.baseline_paper / self.baseline_exact
        } else if self.baseline_paper > 0.0 {
            f64::INFINITY
        } else {
            f64::NAN
        }
    }

    pub fn survival_discrepancy(&self) -> f64 {
        self.survival_exact - self.survival_paper
    }

    /// The protocol's paper-mode total beats the paper-convention baseline.
    pub fn paper_claim_vs_paper_baseline(&self) -> Option<bool> {
        self.total_paper.map(|t| t < self.baseline_paper)
    }

    /// The protocol's paper-mode total beats the standard Helstrom baseline.
    pub fn paper_claim_vs_exact_baseline(&self) -> Option<bool> {
        self.total_paper.map(|t| t < self.baseline_exact)
    }

    /// Exact-mode total respects the Helstrom bound.
    pub fn exact_sanity_holds(&self) -> Option<bool> {
        self.total_exact
            .map(|t| t >= self.baseline_exact - SANITY_TOL)
    }
}

/// One output row. Failures keep their parameter tuple and carry the error.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub point: SweepPoint,
    pub outcome: std::result::Result<RowMetrics, String>,
}

impl ReportRow {
    pub fn metrics(&self) -> Option<&RowMetrics> {
        self.outcome.as_ref().ok()
    }
}

/// All parameter tuples of `config`, in sorted order.
pub fn sweep_points(config: &SweepConfig) -> Vec<SweepPoint> {
    let amplitudes: Vec<AmplitudeValue> = match &config.amplitude {
        AmplitudeGrid::B(v) => v.iter().map(|&b| AmplitudeValue::B(b)).collect(),
        AmplitudeGrid::A(v) => v.iter().map(|&a| AmplitudeValue::A(a)).collect(),
    };
    let mut points = Vec::with_capacity(config.grid_size());
    for &amplitude in &amplitudes {
        for &delta in &config.deltas {
            for dt in config.dt_choices() {
                for &k in &config.ks {
                    for &prior in &config.priors {
                        points.push(SweepPoint {
                            amplitude,
                            delta,
                            dt,
                            k,
                            prior,
                            e0: config.e0,
                            e1: config.e1,
                            direction: config.direction.clone(),
                        });
                    }
                }
            }
        }
    }
    points.sort_by(|x, y| x.cmp_key(y));
    points
}

/// The three-point `δ` grid used for per-row overlap exponents.
pub fn row_delta_grid(delta: f64) -> Vec<f64> {
    vec![delta, delta * 10f64.powf(-0.5), delta * 0.1]
}

/// Evaluates one tuple under the selected accounting modes.
pub fn evaluate_point(point: &SweepPoint, modes: ModeSelection) -> Result<RowMetrics> {
    let params = point.params()?;
    let exact = if modes.includes(AccountingMode::Exact) {
        Some(protocol::run(
            &params.clone().with_mode(AccountingMode::Exact),
        )?)
    } else {
        None
    };
    let paper = if modes.includes(AccountingMode::Paper) {
        Some(protocol::run(
            &params.clone().with_mode(AccountingMode::Paper),
        )?)
    } else {
        None
    };
    let any = exact
        .as_ref()
        .or(paper.as_ref())
        .expect("at least one mode is selected");

    let (overlap_exponent, overlap_fit_indeterminate) = if point.delta > 0.0 {
        let fit = fit_scaling(
            ScalingQuantity::FinalOverlap,
            &row_delta_grid(point.delta),
            &point.template()?,
        )?;
        (Some(fit.exponent), fit.indeterminate)
    } else {
        (None, true)
    };

    Ok(RowMetrics {
        a: params.a,
        b: params.b,
        dt: params.dt,
        total_exact: exact.as_ref().map(|r| r.total_cost.value()),
        total_paper: paper.as_ref().map(|r| r.total_cost.value()),
        baseline_exact: any.baseline_exact.value(),
        baseline_paper: any.baseline_paper.value(),
        baseline_paper_expansion: paperform::baseline_paper_expansion(&params),
        paper_new_cost: any.paper_new_cost.value(),
        original_cost: paperform::original_cost(&params).ok().map(|c| c.value()),
        final_overlap: any.final_overlap(),
        overlap_exponent,
        overlap_fit_indeterminate,
        overlap_k_paper: paperform::overlap_k_paper(&params),
        survival_exact: *any.survival_trajectory[0]
            .last()
            .expect("non-empty trajectory"),
        survival_paper: paperform::survival_k_paper(&params),
        pruned_branches: any.pruned.len(),
    })
}

/// Evaluates the full Cartesian product in parallel. Row order depends only
/// on the parameter tuples.
pub fn run_sweep(config: &SweepConfig) -> Vec<ReportRow> {
    sweep_points(config)
        .into_par_iter()
        .map(|point| {
            let outcome = evaluate_point(&point, config.mode).map_err(|e| e.to_string());
            ReportRow { point, outcome }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labcli::config::parse_config;

    #[test]
    fn paper_fixture_row() {
        let cfg = parse_config("b=10\ndelta=0.001\nk=5\nxi=0.5\ndt=auto\nmode=both").unwrap();
        let rows = run_sweep(&cfg);
        assert_eq!(rows.len(), 1);
        let m = rows[0].metrics().unwrap();
        let ratio = m.original_cost.unwrap() / m.paper_new_cost;
        assert!((ratio - 20.0).abs() < 1e-12);
        assert!((m.total_paper.unwrap() - m.paper_new_cost).abs() < 1e-8);
        assert_eq!(m.exact_sanity_holds(), Some(true));
        assert_eq!(m.paper_claim_vs_exact_baseline(), Some(false));
        assert_eq!(m.paper_claim_vs_paper_baseline(), Some(true));
    }

    #[test]
    fn failures_become_rows() {
        let cfg = parse_config("b=10,200\ndelta=0.01\nk=1").unwrap();
        let rows = run_sweep(&cfg);
        assert_eq!(rows.len(), 2);
        assert!(rows[0].outcome.is_ok());
        assert!(rows[1].outcome.as_ref().unwrap_err().contains("exceeds 1"));
    }

    #[test]
    fn rows_are_sorted_by_tuple() {
        let cfg = parse_config("b=3,1\ndelta=0.01,0.001\nk=4,2\nxi=0.7,0.5\nmode=exact").unwrap();
        let rows = run_sweep(&cfg);
        assert_eq!(rows.len(), cfg.grid_size());
        for w in rows.windows(2) {
            assert_ne!(w[0].point.cmp_key(&w[1].point), Ordering::Greater);
        }
        assert!(rows
            .iter()
            .all(|r| r.metrics().unwrap().total_paper.is_none()));
    }

    #[test]
    fn amplitude_input_resolves_b() {
        assert!((AmplitudeValue::A(0.6).b_at(0.1).unwrap() - 8.0).abs() < 1e-12);
        assert_eq!(AmplitudeValue::A(1.0).b_at(0.0).unwrap(), 0.0);
        assert!(AmplitudeValue::A(0.5).b_at(0.0).is_err());
    }
}
