//! The two baselines side by side: the Helstrom cost of the actual pair and
//! the cost obtained by feeding the overlap amplitude in as a probability.

use helstrom_lab::helstrom::{helstrom_mixed, helstrom_pure, DiscriminationInstance};
use helstrom_lab::paperform::{baseline_paper_convention, baseline_paper_expansion};
use helstrom_lab::protocol::{initial_states, ProtocolParams};

fn main() -> helstrom_lab::Result<()> {
    println!(
        "{:>8} {:>24} {:>24} {:>24} {:>10}",
        "delta", "exact", "paper-convention", "leading order", "ratio"
    );
    for delta in [1e-2, 3e-3, 1e-3] {
        let p = ProtocolParams::new(10.0, delta, 1.0, 1)?;
        let (psi0, psi1) = initial_states(&p)?;
        let exact = helstrom_pure(&DiscriminationInstance::new(
            psi0.clone(),
            psi1.clone(),
            p.prior,
        )?);
        let mixed = helstrom_mixed(&psi0.density(), &psi1.density(), p.prior)?;
        assert!((exact.value() - mixed.value()).abs() < 1e-12);
        let paper = baseline_paper_convention(&p);
        println!(
            "{delta:>8.0e} {:>24.17e} {:>24.17e} {:>24.17e} {:>10.1}",
            exact.value(),
            paper.value(),
            baseline_paper_expansion(&p),
            paper.value() / exact.value()
        );
    }
    Ok(())
}
