//! Bayes 0-1 cost for binary discrimination.
//!
//! Cost 0 for a correct guess, 1 for a wrong one, averaged over the prior
//! `ξ` on hypothesis 0. The optimal (Helstrom) cost for pure states with
//! transition probability `T = |<ψ0|ψ1>|²` is `½(1 - √(1 - 4ξ(1-ξ)T))`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::qcore::{inner_product, PureState};

/// Tolerance on Hermiticity, trace and positivity of density matrices.
pub const DENSITY_TOL: f64 = 1e-10;

/// An expected 0-1 loss. Always within `[0, min(ξ, 1-ξ)]` for the prior it
/// was computed under.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CostValue(f64);

impl CostValue {
    pub const ZERO: CostValue = CostValue(0.0);

    /// Clamps roundoff excursions outside `[0, min(ξ, 1-ξ)]`.
    fn bounded(cost: f64, prior: f64) -> Self {
        CostValue(cost.clamp(0.0, prior.min(1.0 - prior)))
    }

    /// A closed-form value reported as-is.
    pub(crate) fn unchecked(cost: f64) -> Self {
        CostValue(cost)
    }

    /// A weighted sum of leaf costs; only bounded by `[0, ½]`.
    pub(crate) fn from_total(cost: f64) -> Self {
        CostValue(cost.clamp(0.0, 0.5))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::fmt::Display for CostValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Two candidate states and the prior on the first.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationInstance {
    pub psi0: PureState,
    pub psi1: PureState,
    pub prior: f64,
}

impl DiscriminationInstance {
    pub fn new(psi0: PureState, psi1: PureState, prior: f64) -> Result<Self> {
        check_prior(prior)?;
        if psi0.dim() != psi1.dim() {
            return Err(LabError::validation(format!(
                "candidate dimensions differ: {} vs {}",
                psi0.dim(),
                psi1.dim()
            )));
        }
        Ok(DiscriminationInstance { psi0, psi1, prior })
    }

    /// `|<ψ0|ψ1>|²`.
    pub fn transition_probability(&self) -> f64 {
        inner_product(&self.psi0, &self.psi1)
            .expect("dimensions checked at construction")
            .norm_sqr()
    }
}

pub(crate) fn check_prior(prior: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&prior) {
        return Err(LabError::validation(format!(
            "prior must lie in [0, 1], got {prior}"
        )));
    }
    Ok(())
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(LabError::validation(format!(
            "{name} must lie in [0, 1], got {p}"
        )));
    }
    Ok(())
}

/// Helstrom cost for a given transition probability. Uses the cancellation-free
/// form `x / (2 (1 + √(1 - x)))` with `x = 4ξ(1-ξ)T`, so tiny `T` keeps full
/// relative precision.
pub fn helstrom_from_transition(prior: f64, transition: f64) -> CostValue {
    let x = (4.0 * prior * (1.0 - prior) * transition).clamp(0.0, 1.0);
    CostValue::bounded(x / (2.0 * (1.0 + (1.0 - x).sqrt())), prior)
}

pub fn helstrom_pure(instance: &DiscriminationInstance) -> CostValue {
    helstrom_from_transition(instance.prior, instance.transition_probability())
}

/// Trace-norm Helstrom cost `½(1 - ‖ξρ0 - (1-ξ)ρ1‖₁)`.
pub fn helstrom_mixed(
    rho0: &DMatrix<Complex64>,
    rho1: &DMatrix<Complex64>,
    prior: f64,
) -> Result<CostValue> {
    check_prior(prior)?;
    if rho0.shape() != rho1.shape() {
        return Err(LabError::validation(
            "density matrices have different shapes",
        ));
    }
    let rho0 = checked_density(rho0, "rho0")?;
    let rho1 = checked_density(rho1, "rho1")?;
    let diff = rho0 * Complex64::new(prior, 0.0) - rho1 * Complex64::new(1.0 - prior, 0.0);
    let trace_norm: f64 = SymmetricEigen::new(diff)
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .sum();
    Ok(CostValue::bounded(0.5 * (1.0 - trace_norm), prior))
}

/// Validates a density matrix and clamps roundoff-negative eigenvalues.
fn checked_density(rho: &DMatrix<Complex64>, name: &str) -> Result<DMatrix<Complex64>> {
    if !rho.is_square() || rho.nrows() == 0 {
        return Err(LabError::validation(format!(
            "{name} must be a non-empty square matrix"
        )));
    }
    let d = rho.nrows();
    for i in 0..d {
        for j in 0..=i {
            let gap = (rho[(i, j)] - rho[(j, i)].conj()).norm();
            if !gap.is_finite() || gap > DENSITY_TOL {
                return Err(LabError::validation(format!(
                    "{name} is not Hermitian at ({i}, {j})"
                )));
            }
        }
    }
    let trace = rho.trace();
    if (trace - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOL {
        return Err(LabError::validation(format!(
            "{name} has trace {trace}, expected 1"
        )));
    }
    let eig = SymmetricEigen::new(rho.clone());
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min < -DENSITY_TOL {
        return Err(LabError::validation(format!(
            "{name} is not positive semidefinite (eigenvalue {min:e})"
        )));
    }
    if min >= 0.0 {
        return Ok(rho.clone());
    }
    let mut eig = eig;
    eig.eigenvalues.iter_mut().for_each(|l| *l = l.max(0.0));
    Ok(eig.recompose())
}

/// Bayes rule for the prior on hypothesis 0 after an event.
pub fn posterior_update(prior: f64, p_event_given_h0: f64, p_event_given_h1: f64) -> Result<f64> {
    check_prior(prior)?;
    check_probability("p_event_given_h0", p_event_given_h0)?;
    check_probability("p_event_given_h1", p_event_given_h1)?;
    let joint0 = prior * p_event_given_h0;
    let marginal = joint0 + (1.0 - prior) * p_event_given_h1;
    if marginal <= 0.0 {
        return Err(LabError::DegenerateBranch {
            survive_prob: 0.0,
            click_prob: 0.0,
        });
    }
    Ok((joint0 / marginal).clamp(0.0, 1.0))
}

/// Cost of guessing the more likely hypothesis without any data.
pub fn guess_only_cost(prior: f64) -> CostValue {
    CostValue::bounded(prior.min(1.0 - prior), prior)
}
