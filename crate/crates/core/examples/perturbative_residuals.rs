//! Power-law fits of each truncated series against the exact simulation.

use helstrom_lab::paperform::{default_delta_grid, fit_scaling, ScalingQuantity};
use helstrom_lab::protocol::{DtChoice, ProtocolTemplate};

fn main() -> helstrom_lab::Result<()> {
    let template = ProtocolTemplate::new(10.0, 5, DtChoice::Auto);
    for q in ScalingQuantity::ALL {
        let fit = fit_scaling(q, &default_delta_grid(), &template)?;
        println!(
            "{:<30} exponent {:>7.4}{}{}",
            q.key(),
            fit.exponent,
            if fit.indeterminate {
                "  (at noise floor)"
            } else {
                ""
            },
            q.suspect()
                .map(|s| format!("  [{}]", s.key()))
                .unwrap_or_default()
        );
    }
    Ok(())
}
