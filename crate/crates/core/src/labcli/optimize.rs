//! Protocol parameter search: integer grid over `k`, coarse grid plus
//! golden-section refinement over `dt`.

use super::config::{AmplitudeGrid, DtGrid, ModeSelection, SweepConfig};
use super::sweep::{evaluate_point, AmplitudeValue, ReportRow, SweepPoint};
use crate::error::{LabError, Result};
use crate::protocol::{self, AccountingMode, DtChoice, ProtocolParams};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Minimizes `f` on `[lo, hi]` by golden-section search. Returns the best
/// point evaluated and its value.
pub fn golden_section(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..max_iter {
        if (b - a).abs() <= tol * (1.0 + c.abs().max(d.abs())) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// What to optimize and where.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeRequest {
    /// Fixed coordinates; `k` and `dt` are used when not free.
    pub point: SweepPoint,
    pub free_k: Option<(usize, usize)>,
    pub free_dt: Option<(f64, f64)>,
    pub mode: AccountingMode,
    pub dt_grid_points: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub params: ProtocolParams,
    pub cost: f64,
    pub row: ReportRow,
    pub evaluations: usize,
}

struct Best {
    k: usize,
    dt: f64,
    cost: f64,
}

impl Best {
    /// Strict improvement only, so earlier (smaller k, smaller dt) candidates
    /// win ties.
    fn offer(slot: &mut Option<Best>, k: usize, dt: f64, cost: f64) {
        let better = match slot {
            None => cost.is_finite(),
            Some(b) => cost < b.cost,
        };
        if better {
            *slot = Some(Best { k, dt, cost });
        }
    }
}

pub fn optimize(req: &OptimizeRequest) -> Result<OptimizeOutcome> {
    if req.free_k.is_none() && req.free_dt.is_none() {
        return Err(LabError::validation(
            "optimize needs at least one free variable (k or dt)",
        ));
    }
    if let Some((lo, hi)) = req.free_k {
        if lo == 0 || lo > hi {
            return Err(LabError::validation(format!("empty k range {lo}..{hi}")));
        }
    }
    if let Some((lo, hi)) = req.free_dt {
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(LabError::validation(format!("empty dt range {lo}..{hi}")));
        }
    }
    let template = req.point.template()?;
    let delta = req.point.delta;
    let mut evaluations = 0usize;
    let mut cost_at = |k: usize, dt: DtChoice| -> (f64, f64) {
        evaluations += 1;
        let mut t = template.clone();
        t.k = k;
        t.dt = dt;
        t.mode = req.mode;
        t.at_delta(delta)
            .and_then(|p| protocol::run(&p).map(|r| (p.dt, r.total_cost.value())))
            .unwrap_or((f64::NAN, f64::INFINITY))
    };

    let ks: Vec<usize> = match req.free_k {
        Some((lo, hi)) => (lo..=hi).collect(),
        None => vec![req.point.k],
    };
    let mut best: Option<Best> = None;
    for &k in &ks {
        match req.free_dt {
            None => {
                let (dt, cost) = cost_at(k, req.point.dt);
                Best::offer(&mut best, k, dt, cost);
            }
            Some((lo, hi)) if lo == hi => {
                let (dt, cost) = cost_at(k, DtChoice::Fixed(lo));
                Best::offer(&mut best, k, dt, cost);
            }
            Some((lo, hi)) => {
                let n = req.dt_grid_points.max(2);
                let grid: Vec<f64> = (0..n)
                    .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                    .collect();
                let values: Vec<f64> = grid
                    .iter()
                    .map(|&dt| cost_at(k, DtChoice::Fixed(dt)).1)
                    .collect();
                let (arg, &grid_best) =
                    values
                        .iter()
                        .enumerate()
                        .fold(
                            (0, &f64::INFINITY),
                            |acc, (i, v)| if *v < *acc.1 { (i, v) } else { acc },
                        );
                Best::offer(&mut best, k, grid[arg], grid_best);
                let left = grid[arg.saturating_sub(1)];
                let right = grid[(arg + 1).min(n - 1)];
                let (dt, cost) = golden_section(
                    |dt| cost_at(k, DtChoice::Fixed(dt)).1,
                    left,
                    right,
                    req.tolerance,
                    200,
                );
                Best::offer(&mut best, k, dt, cost);
            }
        }
    }
    let best = best
        .ok_or_else(|| LabError::validation("no feasible parameter point in the search range"))?;

    let point = SweepPoint {
        k: best.k,
        dt: DtChoice::Fixed(best.dt),
        ..req.point.clone()
    };
    let mode_sel = match req.mode {
        AccountingMode::Exact => ModeSelection::Exact,
        AccountingMode::Paper => ModeSelection::Paper,
    };
    let row = ReportRow {
        outcome: evaluate_point(&point, mode_sel).map_err(|e| e.to_string()),
        point: point.clone(),
    };
    let params = point.params()?.with_mode(req.mode);
    Ok(OptimizeOutcome {
        params,
        cost: best.cost,
        row,
        evaluations,
    })
}

fn single<T: Copy>(name: &str, values: &[T]) -> Result<T> {
    match values {
        [v] => Ok(*v),
        _ => Err(LabError::validation(format!(
            "optimize needs a single value for '{name}', got {}",
            values.len()
        ))),
    }
}

/// Builds an [`OptimizeRequest`] from a config whose non-free grids are single-valued.
pub fn request_from_config(config: &SweepConfig, mode: AccountingMode) -> Result<OptimizeRequest> {
    let amplitude = match &config.amplitude {
        AmplitudeGrid::B(v) => AmplitudeValue::B(single("b", v)?),
        AmplitudeGrid::A(v) => AmplitudeValue::A(single("a", v)?),
    };
    let k = match config.optimize.k {
        Some((lo, _)) => lo,
        None => single("k", &config.ks)?,
    };
    let dt = match (&config.dt, config.optimize.dt) {
        (_, Some((lo, _))) => DtChoice::Fixed(lo),
        (DtGrid::Auto, None) => DtChoice::Auto,
        (DtGrid::Explicit(v), None) => DtChoice::Fixed(single("dt", v)?),
    };
    Ok(OptimizeRequest {
        point: SweepPoint {
            amplitude,
            delta: single("delta", &config.deltas)?,
            dt,
            k,
            prior: single("xi", &config.priors)?,
            e0: config.e0,
            e1: config.e1,
            direction: config.direction.clone(),
        },
        free_k: config.optimize.k,
        free_dt: config.optimize.dt,
        mode,
        dt_grid_points: config.optimize.dt_points,
        tolerance: 1e-10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labcli::config::parse_config;

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section(|x| (x - 1.3).powi(2) + 2.0, 0.0, 4.0, 1e-12, 500);
        assert!((x - 1.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn paper_mode_prefers_most_iterations() {
        let cfg = parse_config("b=10\ndelta=0.001\nk=1\ndt=auto\noptimize_k=1..20").unwrap();
        let req = request_from_config(&cfg, AccountingMode::Paper).unwrap();
        let out = optimize(&req).unwrap();
        assert_eq!(out.params.k, 20);
        assert_eq!(out.evaluations, 20);
    }

    #[test]
    fn single_point_range() {
        let cfg =
            parse_config("b=10\ndelta=0.01\nk=3\noptimize_k=3..3\noptimize_dt=0.7..0.7").unwrap();
        let out = optimize(&request_from_config(&cfg, AccountingMode::Exact).unwrap()).unwrap();
        assert_eq!(out.params.k, 3);
        assert_eq!(out.params.dt, 0.7);
    }

    #[test]
    fn refinement_never_loses_to_grid() {
        let cfg =
            parse_config("b=4\ndelta=0.05\nk=2\noptimize_dt=0.1..6\noptimize_dt_points=7").unwrap();
        let req = request_from_config(&cfg, AccountingMode::Exact).unwrap();
        let out = optimize(&req).unwrap();
        for i in 0..7 {
            let dt = 0.1 + (6.0 - 0.1) * i as f64 / 6.0;
            let p = ProtocolParams::new(4.0, 0.05, dt, 2).unwrap();
            assert!(out.cost <= protocol::run(&p).unwrap().total_cost.value());
        }
        assert!(out.cost >= out.row.metrics().unwrap().baseline_exact - 1e-10);
    }

    #[test]
    fn needs_a_free_variable() {
        let cfg = parse_config("b=10\ndelta=0.01\nk=3").unwrap();
        let req = request_from_config(&cfg, AccountingMode::Exact).unwrap();
        assert!(optimize(&req).is_err());
        let cfg = parse_config("b=10\ndelta=0.01,0.001\nk=3\noptimize_k=1..2").unwrap();
        assert!(request_from_config(&cfg, AccountingMode::Exact).is_err());
    }
}
