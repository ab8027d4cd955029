//! Every leaf of one protocol run under both accountings.

use helstrom_lab::protocol::{run, AccountingMode, ProtocolParams};

fn main() -> helstrom_lab::Result<()> {
    let base = ProtocolParams::with_orthogonality_dt(10.0, 0.01, 4)?.with_prior(0.3)?;
    for mode in [AccountingMode::Exact, AccountingMode::Paper] {
        let report = run(&base.clone().with_mode(mode))?;
        println!("{mode} accounting, dt = {:.6}", base.dt);
        for leaf in &report.leaves {
            println!(
                "  {:<10} P(.|H0) {:.6e}  P(.|H1) {:.6e}  posterior {:.4}  cost {:.6e}",
                leaf.kind.to_string(),
                leaf.p_given_h0,
                leaf.p_given_h1,
                leaf.posterior,
                leaf.leaf_cost.value()
            );
        }
        println!(
            "  total {:.9e}  vs exact baseline {:+.3e}  vs paper-convention baseline {:+.3e}",
            report.total_cost.value(),
            report.verdict.vs_baseline_exact,
            report.verdict.vs_baseline_paper
        );
        println!("  overlap trajectory {:.4?}", report.overlap_trajectory);
    }
    Ok(())
}
