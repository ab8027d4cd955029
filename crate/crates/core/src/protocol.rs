//! The evolve-and-watch discrimination protocol.
//!
//! Each hypothesis state is evolved for `dt` under the five-level Hamiltonian
//! and then watched by a click/no-click detector along the measurement
//! direction. A click ends the run (the detector state carries no hypothesis
//! information); a no-click renormalizes the state and the cycle repeats.
//! After `k` silent cycles the surviving pair is handed to an optimal
//! (Helstrom) terminal measurement.
//!
//! [`run`] enumerates the whole outcome tree exactly: `k` click leaves plus
//! one survival leaf, each with per-hypothesis probabilities, the posterior
//! prior and the Bayes cost of the terminal decision.

use std::fmt;

use crate::error::{LabError, Result};
use crate::helstrom::{
    check_prior, guess_only_cost, helstrom_pure, posterior_update, CostValue,
    DiscriminationInstance,
};
use crate::paperform;
use crate::qcore::{
    evolve, inner_product, measure_binary, normalize, HamiltonianSpec, MeasurementDirection,
    PureState, MODEL_DIM,
};

/// Allowed slack in `a² + (bδ)² = 1` for explicitly supplied amplitudes.
pub const AMPLITUDE_TOL: f64 = 1e-9;

/// How click leaves are charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AccountingMode {
    /// Every leaf pays its true Bayes cost under the posterior prior.
    Exact,
    /// Click leaves pay a flat ½ ("no information"); the survival leaf pays
    /// its Helstrom cost.
    Paper,
}

impl AccountingMode {
    pub fn label(self) -> &'static str {
        match self {
            AccountingMode::Exact => "exact",
            AccountingMode::Paper => "paper",
        }
    }
}

impl fmt::Display for AccountingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One full experiment definition.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolParams {
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub dt: f64,
    pub k: usize,
    pub e0: f64,
    pub e1: f64,
    pub prior: f64,
    pub direction: MeasurementDirection,
    pub mode: AccountingMode,
}

impl ProtocolParams {
    /// Builds params with `a = √(1 - (bδ)²)`, zero energies, prior ½, the
    /// default detector direction and exact accounting.
    pub fn new(b: f64, delta: f64, dt: f64, k: usize) -> Result<Self> {
        let a = auto_amplitude(b, delta)?;
        Self::from_amplitudes(a, b, delta, dt, k)
    }

    /// Like [`ProtocolParams::new`] with `dt` solved from `2 k a dt = b`.
    pub fn with_orthogonality_dt(b: f64, delta: f64, k: usize) -> Result<Self> {
        let a = auto_amplitude(b, delta)?;
        let dt = solve_orthogonality(a, b, k)?;
        Self::from_amplitudes(a, b, delta, dt, k)
    }

    pub fn from_amplitudes(a: f64, b: f64, delta: f64, dt: f64, k: usize) -> Result<Self> {
        let params = ProtocolParams {
            a,
            b,
            delta,
            dt,
            k,
            e0: 0.0,
            e1: 0.0,
            prior: 0.5,
            direction: MeasurementDirection::protocol_default(),
            mode: AccountingMode::Exact,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_prior(mut self, prior: f64) -> Result<Self> {
        self.prior = prior;
        self.validate()?;
        Ok(self)
    }

    pub fn with_energies(mut self, e0: f64, e1: f64) -> Result<Self> {
        self.e0 = e0;
        self.e1 = e1;
        self.validate()?;
        Ok(self)
    }

    pub fn with_direction(mut self, direction: MeasurementDirection) -> Result<Self> {
        self.direction = direction;
        self.validate()?;
        Ok(self)
    }

    pub fn with_mode(mut self, mode: AccountingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let scalars = [
            self.a, self.b, self.delta, self.dt, self.e0, self.e1, self.prior,
        ];
        if scalars.iter().any(|x| !x.is_finite()) {
            return Err(LabError::validation(format!(
                "protocol parameters must be finite: {self:?}"
            )));
        }
        if self.k == 0 {
            return Err(LabError::validation("iteration count k must be at least 1"));
        }
        if self.dt <= 0.0 {
            return Err(LabError::validation(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.delta < 0.0 {
            return Err(LabError::validation(format!(
                "delta must be non-negative, got {}",
                self.delta
            )));
        }
        check_prior(self.prior)?;
        let norm = self.a * self.a + (self.b * self.delta).powi(2);
        if (norm - 1.0).abs() > AMPLITUDE_TOL {
            return Err(LabError::validation(format!(
                "a^2 + (b delta)^2 = {norm}, expected 1 within {AMPLITUDE_TOL:e}"
            )));
        }
        if self.direction.dim() != MODEL_DIM {
            return Err(LabError::validation(format!(
                "measurement direction must have dimension {MODEL_DIM}"
            )));
        }
        Ok(())
    }

    pub fn hamiltonian(&self) -> HamiltonianSpec {
        HamiltonianSpec {
            e0: self.e0,
            e1: self.e1,
            delta: self.delta,
        }
    }
}

fn auto_amplitude(b: f64, delta: f64) -> Result<f64> {
    let tail = (b * delta).powi(2);
    if !tail.is_finite() || tail > 1.0 {
        return Err(LabError::validation(format!(
            "(b delta)^2 = {tail} exceeds 1; no real amplitude a exists"
        )));
    }
    Ok((1.0 - tail).sqrt())
}

/// How a parameter template picks `dt` once `δ` is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtChoice {
    /// Solve `2 k a dt = b`.
    Auto,
    Fixed(f64),
}

/// Everything but `δ`: the unit that scaling fits and sweeps vary over.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTemplate {
    pub b: f64,
    pub k: usize,
    pub dt: DtChoice,
    pub prior: f64,
    pub e0: f64,
    pub e1: f64,
    pub direction: MeasurementDirection,
    pub mode: AccountingMode,
}

impl ProtocolTemplate {
    pub fn new(b: f64, k: usize, dt: DtChoice) -> Self {
        ProtocolTemplate {
            b,
            k,
            dt,
            prior: 0.5,
            e0: 0.0,
            e1: 0.0,
            direction: MeasurementDirection::protocol_default(),
            mode: AccountingMode::Exact,
        }
    }

    pub fn at_delta(&self, delta: f64) -> Result<ProtocolParams> {
        let a = auto_amplitude(self.b, delta)?;
        let dt = match self.dt {
            DtChoice::Auto => solve_orthogonality(a, self.b, self.k)?,
            DtChoice::Fixed(dt) => dt,
        };
        let params = ProtocolParams {
            a,
            b: self.b,
            delta,
            dt,
            k: self.k,
            e0: self.e0,
            e1: self.e1,
            prior: self.prior,
            direction: self.direction.clone(),
            mode: self.mode,
        };
        params.validate()?;
        Ok(params)
    }
}

/// `(a,0,0,0,bδ)` and `(0,0,0,a,bδ)`.
pub fn initial_states(params: &ProtocolParams) -> Result<(PureState, PureState)> {
    params.validate()?;
    let tail = params.b * params.delta;
    let to_state = |v: [f64; MODEL_DIM]| {
        let raw: Vec<_> = v
            .iter()
            .map(|&x| num_complex::Complex64::new(x, 0.0))
            .collect();
        normalize(&raw)
    };
    Ok((
        to_state([params.a, 0.0, 0.0, 0.0, tail])?,
        to_state([0.0, 0.0, 0.0, params.a, tail])?,
    ))
}

/// Result of one evolve-then-watch cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub survive: PureState,
    pub survive_prob: f64,
    pub click_prob: f64,
}

pub fn step(
    spec: &HamiltonianSpec,
    direction: &MeasurementDirection,
    dt: f64,
    psi: &PureState,
) -> Result<StepOutcome> {
    let evolved = evolve(spec, dt, psi)?;
    let out = measure_binary(direction, &evolved)?;
    Ok(StepOutcome {
        survive: out.post_survive_state,
        survive_prob: out.survive_prob,
        click_prob: out.click_prob,
    })
}

/// `dt = b / (2 k a)`.
pub fn solve_orthogonality(a: f64, b: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(LabError::validation("k must be at least 1"));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(LabError::validation(format!(
            "amplitude a must be positive, got {a}"
        )));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(LabError::validation(format!(
            "coefficient b must be positive, got {b}"
        )));
    }
    Ok(b / (2.0 * k as f64 * a))
}

/// Closed-form protocol cost `k a² dt² δ² / 4`, independent of simulation.
pub fn total_cost_paper_mode(params: &ProtocolParams) -> CostValue {
    let k = params.k as f64;
    CostValue::unchecked(k * (params.a * params.dt * params.delta).powi(2) / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafKind {
    /// Detector fired on cycle `step` (1-based).
    Click {
        step: usize,
    },
    Survived,
}

impl fmt::Display for LeafKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeafKind::Click { step } => write!(f, "click@{step}"),
            LeafKind::Survived => f.write_str("survived"),
        }
    }
}

/// One terminal branch of the outcome tree.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafRecord {
    pub kind: LeafKind,
    pub p_given_h0: f64,
    pub p_given_h1: f64,
    pub marginal: f64,
    pub posterior: f64,
    /// Conditioned states; `None` for a hypothesis whose branch was pruned.
    pub state0: Option<PureState>,
    pub state1: Option<PureState>,
    pub leaf_cost: CostValue,
}

/// A hypothesis branch dropped because its survival probability underflowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrunedBranch {
    pub step: usize,
    pub hypothesis: usize,
    pub survive_prob: f64,
}

/// Signed gaps between the protocol total and the two baselines. Positive
/// means the protocol does worse than the baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub vs_baseline_exact: f64,
    pub vs_baseline_paper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolReport {
    pub mode: AccountingMode,
    pub leaves: Vec<LeafRecord>,
    pub total_cost: CostValue,
    /// Helstrom cost of the initial pair with `T = |<ψ0|ψ1>|²`.
    pub baseline_exact: CostValue,
    /// Helstrom cost with the overlap amplitude `b²δ²` used as `T`.
    pub baseline_paper: CostValue,
    pub paper_new_cost: CostValue,
    /// `|<ψ0|ψ1>|` before the first cycle and after each silent cycle.
    pub overlap_trajectory: Vec<f64>,
    /// Cumulative survival per hypothesis, starting at 1.
    pub survival_trajectory: [Vec<f64>; 2],
    pub verdict: Verdict,
    pub pruned: Vec<PrunedBranch>,
}

impl ProtocolReport {
    pub fn survived_leaf(&self) -> &LeafRecord {
        self.leaves
            .last()
            .expect("a report always has a survival leaf")
    }

    /// Exact `|<ψ0|ψ1>|` after the last cycle.
    pub fn final_overlap(&self) -> f64 {
        *self
            .overlap_trajectory
            .last()
            .expect("trajectory is never empty")
    }
}

/// Runs the protocol from the standard candidate pair.
pub fn run(params: &ProtocolParams) -> Result<ProtocolReport> {
    let (psi0, psi1) = initial_states(params)?;
    run_from_states(params, &psi0, &psi1)
}

/// Runs the protocol from an arbitrary pair of five-level states. The
/// amplitude fields of `params` only feed the closed-form baselines.
pub fn run_from_states(
    params: &ProtocolParams,
    psi0: &PureState,
    psi1: &PureState,
) -> Result<ProtocolReport> {
    params.validate()?;
    let spec = params.hamiltonian();
    let direction = &params.direction;
    let prior = params.prior;
    let initial = DiscriminationInstance::new(psi0.clone(), psi1.clone(), prior)?;

    let mut states = [Some(psi0.clone()), Some(psi1.clone())];
    let mut alive = [1.0_f64, 1.0];
    let mut survival_trajectory = [vec![1.0], vec![1.0]];
    let mut overlap_trajectory = vec![inner_product(psi0, psi1)?.norm()];
    let mut leaves = Vec::with_capacity(params.k + 1);
    let mut pruned = Vec::new();

    for cycle in 1..=params.k {
        let mut clicked = [0.0_f64; 2];
        for h in 0..2 {
            let Some(psi) = states[h].take() else {
                continue;
            };
            match step(&spec, direction, params.dt, &psi) {
                Ok(out) => {
                    clicked[h] = alive[h] * out.click_prob;
                    alive[h] *= out.survive_prob;
                    states[h] = Some(out.survive);
                }
                Err(LabError::DegenerateBranch {
                    survive_prob,
                    click_prob,
                }) => {
                    clicked[h] = alive[h] * click_prob;
                    alive[h] = 0.0;
                    pruned.push(PrunedBranch {
                        step: cycle,
                        hypothesis: h,
                        survive_prob,
                    });
                }
                Err(e) => return Err(e),
            }
            survival_trajectory[h].push(alive[h]);
        }
        for h in 0..2 {
            if states[h].is_none() && survival_trajectory[h].len() <= cycle {
                survival_trajectory[h].push(0.0);
            }
        }
        let detector = Some(direction.vector().clone());
        leaves.push(make_leaf(
            LeafKind::Click { step: cycle },
            clicked,
            [detector.clone(), detector],
            params,
        )?);
        overlap_trajectory.push(match (&states[0], &states[1]) {
            (Some(s0), Some(s1)) => inner_product(s0, s1)?.norm(),
            _ => f64::NAN,
        });
    }
    leaves.push(make_leaf(LeafKind::Survived, alive, states, params)?);

    let total: f64 = leaves
        .iter()
        .map(|l| l.marginal * l.leaf_cost.value())
        .sum();
    let total_cost = CostValue::from_total(total);
    let baseline_exact = helstrom_pure(&initial);
    let baseline_paper = paperform::baseline_paper_convention(params);
    Ok(ProtocolReport {
        mode: params.mode,
        leaves,
        total_cost,
        baseline_exact,
        baseline_paper,
        paper_new_cost: total_cost_paper_mode(params),
        overlap_trajectory,
        survival_trajectory,
        verdict: Verdict {
            vs_baseline_exact: total - baseline_exact.value(),
            vs_baseline_paper: total - baseline_paper.value(),
        },
        pruned,
    })
}

fn make_leaf(
    kind: LeafKind,
    probs: [f64; 2],
    states: [Option<PureState>; 2],
    params: &ProtocolParams,
) -> Result<LeafRecord> {
    let prior = params.prior;
    let [p0, p1] = probs.map(|p| p.clamp(0.0, 1.0));
    let marginal = prior * p0 + (1.0 - prior) * p1;
    // A zero-probability leaf never contributes; keep the prior there.
    let posterior = if marginal > 0.0 {
        posterior_update(prior, p0, p1)?
    } else {
        prior
    };
    let [state0, state1] = states;
    let leaf_cost = match (kind, params.mode) {
        (LeafKind::Click { .. }, AccountingMode::Paper) => CostValue::unchecked(0.5),
        (LeafKind::Click { .. }, AccountingMode::Exact) => guess_only_cost(posterior),
        (LeafKind::Survived, _) => match (&state0, &state1) {
            (Some(s0), Some(s1)) => helstrom_pure(&DiscriminationInstance::new(
                s0.clone(),
                s1.clone(),
                posterior,
            )?),
            _ => guess_only_cost(posterior),
        },
    };
    Ok(LeafRecord {
        kind,
        p_given_h0: p0,
        p_given_h1: p1,
        marginal,
        posterior,
        state0,
        state1,
        leaf_cost,
    })
}
