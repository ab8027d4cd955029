//! Runs the bundled reference sweep and prints the adjudication summary.

use helstrom_lab::labcli::{parse_config, render_csv, render_summary, run_sweep};

fn main() -> helstrom_lab::Result<()> {
    let text = include_str!("../configs/paper_fixture.cfg");
    let rows = run_sweep(&parse_config(text)?);
    print!("{}", render_summary(&rows));
    eprintln!("{} CSV bytes", render_csv(&rows, 17).len());
    Ok(())
}
