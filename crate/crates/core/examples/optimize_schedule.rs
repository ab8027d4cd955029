//! Searches the cycle count and cycle length for the cheapest protocol.

use helstrom_lab::labcli::{optimize, parse_config, request_from_config};
use helstrom_lab::protocol::AccountingMode;

fn main() -> helstrom_lab::Result<()> {
    let config = parse_config(
        "b=10\ndelta=0.01\nk=1\noptimize_k=1..12\noptimize_dt=0.05..6\noptimize_dt_points=25",
    )?;
    for mode in [AccountingMode::Paper, AccountingMode::Exact] {
        let best = optimize(&request_from_config(&config, mode)?)?;
        let m = best.row.metrics().expect("optimum evaluates");
        println!(
            "{mode}: k = {}, dt = {:.9}, cost = {:.9e} ({} evaluations); exact baseline {:.9e}",
            best.params.k, best.params.dt, best.cost, best.evaluations, m.baseline_exact
        );
    }

    // With dt tied to the orthogonality condition only k is free.
    let tied = parse_config("b=10\ndelta=0.01\nk=1\ndt=auto\noptimize_k=1..12")?;
    let best = optimize(&request_from_config(&tied, AccountingMode::Paper)?)?;
    println!(
        "paper, dt = b/(2ka): k = {}, cost = {:.9e}",
        best.params.k, best.cost
    );
    Ok(())
}
