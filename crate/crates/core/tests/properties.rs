use helstrom_lab::helstrom::{
    guess_only_cost, helstrom_from_transition, helstrom_mixed, helstrom_pure,
    DiscriminationInstance,
};
use helstrom_lab::protocol::{
    self, run_from_states, total_cost_paper_mode, AccountingMode, ProtocolParams,
};
use helstrom_lab::qcore::{
    eigendecompose, evolve, inner_product, measure_binary, normalize, HamiltonianSpec,
    MeasurementDirection, PureState,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn state(dim: usize) -> impl Strategy<Value = PureState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_filter_map("zero vector", |raw| {
        let v: Vec<Complex64> = raw
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        normalize(&v)
            .ok()
            .filter(|_| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
    })
}

fn spec() -> impl Strategy<Value = HamiltonianSpec> {
    (-2.0f64..2.0, -2.0f64..2.0, 0.0f64..2.0)
        .prop_map(|(e0, e1, d)| HamiltonianSpec::new(e0, e1, d).unwrap())
}

/// Valid protocol parameters with `bδ` bounded away from 1.
fn params() -> impl Strategy<Value = ProtocolParams> {
    (
        0.0f64..20.0,
        1e-3f64..0.2,
        0.05f64..4.0,
        1usize..8,
        0.05f64..0.95,
    )
        .prop_filter("b delta < 0.9", |(b, d, ..)| b * d < 0.9)
        .prop_map(|(b, d, dt, k, xi)| {
            ProtocolParams::new(b, d, dt, k)
                .unwrap()
                .with_prior(xi)
                .unwrap()
        })
}

fn dist(x: &PureState, y: &PureState) -> f64 {
    x.amplitudes()
        .iter()
        .zip(y.amplitudes())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_is_unitary(h in spec(), t in -10.0f64..10.0, psi in state(5), phi in state(5)) {
        let (ep, et) = (evolve(&h, t, &psi).unwrap(), evolve(&h, t, &phi).unwrap());
        prop_assert!((ep.norm_sqr() - 1.0).abs() < 1e-12);
        let before = inner_product(&phi, &psi).unwrap();
        let after = inner_product(&et, &ep).unwrap();
        prop_assert!((before - after).norm() < 1e-12);
    }

    #[test]
    fn evolution_composes(h in spec(), t1 in -3.0f64..3.0, t2 in -3.0f64..3.0, psi in state(5)) {
        let two = evolve(&h, t2, &evolve(&h, t1, &psi).unwrap()).unwrap();
        let one = evolve(&h, t1 + t2, &psi).unwrap();
        prop_assert!(dist(&one, &two) < 1e-12);
    }

    #[test]
    fn spectral_reconstruction(h in spec()) {
        let pairs = eigendecompose(&h).unwrap();
        let dense = helstrom_lab::qcore::build_hamiltonian(&h).unwrap();
        let mut rebuilt = DMatrix::<Complex64>::zeros(5, 5);
        for p in &pairs {
            rebuilt += p.vector.density() * Complex64::new(p.energy, 0.0);
        }
        prop_assert!((rebuilt - dense.entries()).norm() < 1e-12);
    }

    #[test]
    fn measurement_is_complete(psi in state(5), m in state(5)) {
        let dir = MeasurementDirection::new(m.amplitudes()).unwrap();
        let Ok(out) = measure_binary(&dir, &psi) else { return Ok(()) };
        prop_assert!((out.click_prob + out.survive_prob - 1.0).abs() < 1e-12);
        // Amplitude-level reassembly of the pre-measurement state.
        let rebuilt: Vec<Complex64> = out.post_click_state.amplitudes().iter()
            .zip(out.post_survive_state.amplitudes())
            .map(|(c, s)| c * out.click_amplitude + s * out.survive_prob.sqrt())
            .collect();
        let err: f64 = rebuilt.iter().zip(psi.amplitudes()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(err < 1e-12);
        // The branch mixture is the dephased state P rho P + Q rho Q.
        let rho = psi.density();
        let p = m.density();
        let q = DMatrix::<Complex64>::identity(5, 5) - &p;
        let mix = out.post_click_state.density() * Complex64::new(out.click_prob, 0.0)
            + out.post_survive_state.density() * Complex64::new(out.survive_prob, 0.0);
        prop_assert!((mix - (&p * &rho * &p + &q * &rho * &q)).norm() < 1e-12);
    }

    #[test]
    fn survive_branch_is_idempotent(psi in state(5)) {
        let dir = MeasurementDirection::protocol_default();
        let Ok(first) = measure_binary(&dir, &psi) else { return Ok(()) };
        let second = measure_binary(&dir, &first.post_survive_state).unwrap();
        prop_assert!(second.click_prob <= 1e-24);
        prop_assert!(dist(&second.post_survive_state, &first.post_survive_state) < 1e-12);
    }

    #[test]
    fn global_phase_is_invisible(p in params(), phase in -6.3f64..6.3) {
        let (psi0, psi1) = protocol::initial_states(&p).unwrap();
        let plain = run_from_states(&p, &psi0, &psi1).unwrap();
        let phased = run_from_states(&p, &psi0.with_global_phase(phase), &psi1.with_global_phase(-0.5 * phase)).unwrap();
        prop_assert!((plain.total_cost.value() - phased.total_cost.value()).abs() <= 1e-14);
    }

    #[test]
    fn helstrom_is_monotone_and_symmetric(xi in 0.0f64..1.0, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(helstrom_from_transition(xi, lo).value() <= helstrom_from_transition(xi, hi).value() + 1e-16);
        prop_assert!((helstrom_from_transition(xi, t1).value() - helstrom_from_transition(1.0 - xi, t1).value()).abs() < 1e-15);
        let c = helstrom_from_transition(xi, t1).value();
        prop_assert!(c >= 0.0 && c <= guess_only_cost(xi).value());
    }

    #[test]
    fn pure_and_mixed_costs_agree(psi0 in state(4), psi1 in state(4), xi in 0.01f64..0.99) {
        let inst = DiscriminationInstance::new(psi0.clone(), psi1.clone(), xi).unwrap();
        let mixed = helstrom_mixed(&psi0.density(), &psi1.density(), xi).unwrap();
        prop_assert!((mixed.value() - helstrom_pure(&inst).value()).abs() < 1e-12);
    }

    #[test]
    fn information_never_hurts(p in params()) {
        let report = protocol::run(&p.clone().with_mode(AccountingMode::Exact)).unwrap();
        prop_assert!(report.total_cost.value() >= report.baseline_exact.value() - 1e-10);
        prop_assert!(report.total_cost.value() <= guess_only_cost(p.prior).value() + 1e-12);
    }

    #[test]
    fn probability_is_conserved(p in params()) {
        let report = protocol::run(&p).unwrap();
        let t0: f64 = report.leaves.iter().map(|l| l.p_given_h0).sum();
        let t1: f64 = report.leaves.iter().map(|l| l.p_given_h1).sum();
        prop_assert!((t0 - 1.0).abs() < 1e-10 && (t1 - 1.0).abs() < 1e-10, "{t0} {t1}");
        let weighted: f64 = report.leaves.iter().map(|l| l.marginal * l.leaf_cost.value()).sum();
        prop_assert!((weighted - report.total_cost.value()).abs() < 1e-12);
        for w in report.survival_trajectory[0].windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-15);
        }
    }

    #[test]
    fn orthogonality_identity(b in 0.1f64..20.0, delta in 1e-4f64..0.04, k in 1usize..30) {
        prop_assume!(b * delta < 0.9);
        let p = ProtocolParams::with_orthogonality_dt(b, delta, k).unwrap();
        let original = helstrom_lab::paperform::original_cost(&p).unwrap().value();
        let new = total_cost_paper_mode(&p).value();
        prop_assert!((original / new / (4.0 * k as f64) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hypothesis_swap_at_even_prior(p in params()) {
        let p = p.with_prior(0.5).unwrap();
        let (psi0, psi1) = protocol::initial_states(&p).unwrap();
        let forward = run_from_states(&p, &psi0, &psi1).unwrap().total_cost.value();
        let swapped = run_from_states(&p, &psi1, &psi0).unwrap().total_cost.value();
        prop_assert!((forward - swapped).abs() <= 1e-12);
    }
}
