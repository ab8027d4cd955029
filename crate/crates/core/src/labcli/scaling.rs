//! Log-log scaling studies of perturbative residuals over a `δ` grid.

use super::config::{AmplitudeGrid, SweepConfig};
use super::report::{csv_table, format_number};
use crate::error::{LabError, Result};
use crate::paperform::{fit_scaling, ScalingFit, ScalingQuantity};
use crate::protocol::{AccountingMode, DtChoice, ProtocolTemplate};

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub quantity: ScalingQuantity,
    pub b: f64,
    pub k: usize,
    pub dt: DtChoice,
    pub prior: f64,
    pub fit: std::result::Result<ScalingFit, String>,
}

/// Fits every requested quantity for every `(b, dt, k, ξ)` tuple over the
/// config's `δ` grid. Quantities default to all of them.
pub fn scaling_study(config: &SweepConfig) -> Result<Vec<ScalingRow>> {
    let bs = match &config.amplitude {
        AmplitudeGrid::B(v) => v,
        AmplitudeGrid::A(_) => {
            return Err(LabError::validation(
                "scaling studies hold b fixed across delta; give 'b', not 'a'",
            ))
        }
    };
    let mut deltas = config.deltas.clone();
    deltas.sort_by(|x, y| y.total_cmp(x));
    deltas.dedup();
    if deltas.len() < 3 {
        return Err(LabError::validation(
            "scaling studies need at least 3 distinct delta values",
        ));
    }
    let quantities = if config.quantities.is_empty() {
        ScalingQuantity::ALL.to_vec()
    } else {
        config.quantities.clone()
    };

    let mut rows = Vec::new();
    for &quantity in &quantities {
        for &b in bs {
            for dt in config.dt_choices() {
                for &k in &config.ks {
                    for &prior in &config.priors {
                        let template = ProtocolTemplate {
                            b,
                            k,
                            dt,
                            prior,
                            e0: config.e0,
                            e1: config.e1,
                            direction: config.direction.clone(),
                            mode: AccountingMode::Exact,
                        };
                        let fit =
                            fit_scaling(quantity, &deltas, &template).map_err(|e| e.to_string());
                        rows.push(ScalingRow {
                            quantity,
                            b,
                            k,
                            dt,
                            prior,
                            fit,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

pub const SCALING_HEADER: &str =
    "quantity,b,dt_mode,dt,k,xi,exponent,intercept,indeterminate,deltas,residuals,suspect_flag,error";

fn join(values: &[f64], digits: usize) -> String {
    values
        .iter()
        .map(|&v| format_number(v, digits))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn render_scaling_csv(rows: &[ScalingRow], digits: usize) -> String {
    csv_table(
        SCALING_HEADER,
        rows.iter().map(|row| {
            let (dt_mode, dt) = match row.dt {
                DtChoice::Auto => ("auto", String::new()),
                DtChoice::Fixed(x) => ("fixed", format_number(x, digits)),
            };
            let suspect = row.quantity.suspect().map(|s| s.key()).unwrap_or("");
            let fields: Vec<String> = match &row.fit {
                Ok(fit) => vec![
                    format_number(fit.exponent, digits),
                    format_number(fit.intercept, digits),
                    fit.indeterminate.to_string(),
                    join(&fit.sample_deltas, digits),
                    join(&fit.residuals, digits),
                    suspect.to_string(),
                    String::new(),
                ],
                Err(e) => vec![
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    suspect.to_string(),
                    e.clone(),
                ],
            };
            let mut rec = vec![
                row.quantity.key().to_string(),
                format_number(row.b, digits),
                dt_mode.to_string(),
                dt,
                row.k.to_string(),
                format_number(row.prior, digits),
            ];
            rec.extend(fields);
            rec
        }),
    )
}
