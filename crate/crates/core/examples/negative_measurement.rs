//! A detector that stays silent still changes the state.

use helstrom_lab::qcore::{
    evolve, measure_binary, HamiltonianSpec, MeasurementDirection, PureState,
};

fn main() -> helstrom_lab::Result<()> {
    let spec = HamiltonianSpec::new(0.0, 0.0, 0.05)?;
    let detector = MeasurementDirection::protocol_default();
    let mut psi = PureState::from_real(&[0.8, 0.0, 0.0, 0.0, 0.6])?;
    let mut alive = 1.0;
    for cycle in 1..=5 {
        let out = measure_binary(&detector, &evolve(&spec, 2.0, &psi)?)?;
        alive *= out.survive_prob;
        psi = out.post_survive_state;
        println!(
            "cycle {cycle}: click {:.3e}  survival so far {:.9}  |psi| = {:.4?}",
            out.click_prob,
            alive,
            psi.magnitudes()
        );
    }
    Ok(())
}
