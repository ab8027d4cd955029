//! Closed-form spectrum of the five-level Hamiltonian and a short evolution.

use helstrom_lab::qcore::{eigendecompose, evolve, HamiltonianSpec, PureState};

fn main() -> helstrom_lab::Result<()> {
    let spec = HamiltonianSpec::new(0.3, -0.2, 0.1)?;
    for pair in eigendecompose(&spec)? {
        let v: Vec<String> = pair
            .vector
            .amplitudes()
            .iter()
            .map(|z| format!("{:+.4}", z.re))
            .collect();
        println!("E = {:+.4}  v = [{}]", pair.energy, v.join(" "));
    }

    let psi = PureState::basis(5, 0)?;
    for t in [0.0, 5.0, 10.0, 15.707963267948966] {
        let p = evolve(&spec, t, &psi)?
            .magnitudes()
            .iter()
            .map(|m| m * m)
            .collect::<Vec<_>>();
        println!("t = {t:>8.4}  populations {:.6?}", p);
    }
    Ok(())
}
