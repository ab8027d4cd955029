//! Closed-form small-`δ` expansions of the protocol, as published, and the
//! machinery that measures how fast each one approaches the exact simulation.
//!
//! Every expression is implemented literally, including two that look like
//! transcription slips (see [`SuspectExpression`]). Nothing here corrects
//! them; residual fits against the exact engine quantify the damage instead.
//! Phases `e^{±iEt}` are dropped from the displayed states, so comparisons go
//! through component magnitudes and `|overlap|` only.

use std::fmt;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::helstrom::{helstrom_from_transition, CostValue};
use crate::protocol::{
    self, initial_states, step, total_cost_paper_mode, AccountingMode, ProtocolParams,
    ProtocolTemplate,
};
use crate::qcore::{evolve, MODEL_DIM};

/// Residuals below this are indistinguishable from roundoff.
pub const NOISE_FLOOR: f64 = 1e-14;

/// Default `δ` grid for scaling fits: `1e-2, 10^-2.5, 1e-3`.
pub fn default_delta_grid() -> Vec<f64> {
    vec![1e-2, 10f64.powf(-2.5), 1e-3]
}

/// Which of the two candidate states an expansion describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    H0,
    H1,
}

/// Expressions that are implemented verbatim although they disagree with the
/// exact dynamics at leading order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuspectExpression {
    /// `2a²k²Δt δ²` carries a single power of `Δt`.
    OverlapDtPower,
    /// `k`-cycle survival uses `¼` where compounding `k` single-cycle losses
    /// of `½a²δ²Δt²` gives `½`.
    SurvivalCoefficient,
}

impl SuspectExpression {
    pub const ALL: [SuspectExpression; 2] = [
        SuspectExpression::OverlapDtPower,
        SuspectExpression::SurvivalCoefficient,
    ];

    pub fn key(self) -> &'static str {
        match self {
            SuspectExpression::OverlapDtPower => "overlap_k_dt_power",
            SuspectExpression::SurvivalCoefficient => "survival_k_coefficient",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            SuspectExpression::OverlapDtPower => {
                "k-cycle overlap uses 2a^2k^2*dt*delta^2 (single dt power; dimensionally dt^2 expected), implemented verbatim"
            }
            SuspectExpression::SurvivalCoefficient => {
                "k-cycle survival uses 1 - (1/4)a^2 k delta^2 dt^2 (compounded single-cycle loss gives 1/2), implemented verbatim"
            }
        }
    }
}

/// Every displayed expansion, one implementing function each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expression {
    /// `¼b²δ²`: leading term of the Helstrom cost with `cos²α = b²δ²`.
    HelstromSmallDelta,
    /// Evolved candidate state after one interval.
    OneStepState,
    /// `1 - ½a²δ²Δt²`.
    OneStepSurvival,
    /// Renormalized no-click state after one cycle.
    OneStepPostSurvivalState,
    /// Renormalized no-click state after `k` cycles.
    KStepState,
    /// `1 - ¼a²kδ²Δt²`.
    KStepSurvival,
    /// `(1 + ¼a²kδ²Δt²)(b²δ² - 2a²k²Δt δ²)`.
    KStepOverlap,
    /// `k a²Δt²δ²/4`.
    NewTotalCost,
    /// `a²k²Δt²δ²`.
    OriginalCost,
}

impl Expression {
    pub const ALL: [Expression; 9] = [
        Expression::HelstromSmallDelta,
        Expression::OneStepState,
        Expression::OneStepSurvival,
        Expression::OneStepPostSurvivalState,
        Expression::KStepState,
        Expression::KStepSurvival,
        Expression::KStepOverlap,
        Expression::NewTotalCost,
        Expression::OriginalCost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Expression::HelstromSmallDelta => "helstrom_small_delta",
            Expression::OneStepState => "one_step_state",
            Expression::OneStepSurvival => "one_step_survival",
            Expression::OneStepPostSurvivalState => "one_step_post_survival_state",
            Expression::KStepState => "k_step_state",
            Expression::KStepSurvival => "k_step_survival",
            Expression::KStepOverlap => "k_step_overlap",
            Expression::NewTotalCost => "new_total_cost",
            Expression::OriginalCost => "original_cost",
        }
    }

    /// Power of `δ` at which the published series is truncated.
    pub fn stated_error_order(self) -> u32 {
        match self {
            Expression::HelstromSmallDelta | Expression::OriginalCost => 4,
            _ => 3,
        }
    }

    pub fn suspect(self) -> Option<SuspectExpression> {
        match self {
            Expression::KStepOverlap => Some(SuspectExpression::OverlapDtPower),
            Expression::KStepSurvival => Some(SuspectExpression::SurvivalCoefficient),
            _ => None,
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeriesValue {
    Real(f64),
    State(Vec<Complex64>),
}

/// One evaluated expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPrediction {
    pub quantity: Expression,
    pub value: SeriesValue,
    pub stated_error_order: u32,
}

/// Evaluates `expr` for `params`. State-valued expressions describe `hypothesis`.
pub fn evaluate(
    expr: Expression,
    params: &ProtocolParams,
    hypothesis: Hypothesis,
) -> Result<SeriesPrediction> {
    let value = match expr {
        Expression::HelstromSmallDelta => SeriesValue::Real(baseline_paper_expansion(params)),
        Expression::OneStepState => SeriesValue::State(one_step_state(params, hypothesis)),
        Expression::OneStepSurvival => SeriesValue::Real(one_step_survival(params)),
        Expression::OneStepPostSurvivalState => {
            SeriesValue::State(one_step_post_survival_state(params, hypothesis))
        }
        Expression::KStepState => SeriesValue::State(k_step_state(params, hypothesis)),
        Expression::KStepSurvival => SeriesValue::Real(survival_k_paper(params)),
        Expression::KStepOverlap => SeriesValue::Real(overlap_k_paper(params)),
        Expression::NewTotalCost => SeriesValue::Real(total_cost_paper_mode(params).value()),
        Expression::OriginalCost => SeriesValue::Real(original_cost(params)?.value()),
    };
    Ok(SeriesPrediction {
        quantity: expr,
        value,
        stated_error_order: expr.stated_error_order(),
    })
}

fn i(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

fn r(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Swaps the two blocks: indices `0↔3`, `1↔2`, `4` fixed.
fn mirror(h0: [Complex64; MODEL_DIM], hypothesis: Hypothesis) -> Vec<Complex64> {
    match hypothesis {
        Hypothesis::H0 => h0.to_vec(),
        Hypothesis::H1 => vec![h0[3], h0[2], h0[1], h0[0], h0[4]],
    }
}

/// `x = δ²Δt²`.
fn small(params: &ProtocolParams) -> f64 {
    (params.delta * params.dt).powi(2)
}

/// `(a(1 - ½Δt²δ²), iδaΔt, 0, 0, δb)` for hypothesis 0.
pub fn one_step_state(params: &ProtocolParams, hypothesis: Hypothesis) -> Vec<Complex64> {
    let (a, x) = (params.a, small(params));
    mirror(
        [
            r(a * (1.0 - 0.5 * x)),
            i(params.delta * a * params.dt),
            r(0.0),
            r(0.0),
            r(params.delta * params.b),
        ],
        hypothesis,
    )
}

pub fn one_step_survival(params: &ProtocolParams) -> f64 {
    1.0 - 0.5 * params.a.powi(2) * small(params)
}

/// `(1 - ½a²δ²Δt²)^{-1/2} (a(1 - ½Δt²δ²), ½iδaΔt, -½iδaΔt, 0, δb)`.
pub fn one_step_post_survival_state(
    params: &ProtocolParams,
    hypothesis: Hypothesis,
) -> Vec<Complex64> {
    let (a, x) = (params.a, small(params));
    let pref = (1.0 - 0.5 * a * a * x).powf(-0.5);
    let off = 0.5 * params.delta * a * params.dt;
    mirror(
        [
            r(pref * a * (1.0 - 0.5 * x)),
            i(pref * off),
            i(-pref * off),
            r(0.0),
            r(pref * params.delta * params.b),
        ],
        hypothesis,
    )
}

/// The `k`-cycle no-click state with prefactor `(1 - ½a²δ²Δt²)^{-k/2}`.
pub fn k_step_state(params: &ProtocolParams, hypothesis: Hypothesis) -> Vec<Complex64> {
    let (a, x) = (params.a, small(params));
    let k = params.k as f64;
    let pref = (1.0 - 0.5 * a * a * x).powf(-0.5 * k);
    let off = 0.5 * k * params.delta * a * params.dt;
    mirror(
        [
            r(pref * a * (1.0 - 0.25 * k * (k + 1.0) * x)),
            i(pref * off),
            i(-pref * off),
            r(-pref * 0.25 * k * (k - 1.0) * a * x),
            r(pref * params.delta * params.b),
        ],
        hypothesis,
    )
}

/// `1 - ¼a²kδ²Δt²`, verbatim.
pub fn survival_k_paper(params: &ProtocolParams) -> f64 {
    1.0 - 0.25 * params.a.powi(2) * params.k as f64 * small(params)
}

/// `(1 + ¼a²kδ²Δt²)(b²δ² - 2a²k²Δt δ²)`, verbatim.
pub fn overlap_k_paper(params: &ProtocolParams) -> f64 {
    let (a, k, d2) = (params.a, params.k as f64, params.delta.powi(2));
    (1.0 + 0.25 * a * a * k * small(params))
        * (params.b * params.b * d2 - 2.0 * a * a * k * k * params.dt * d2)
}

/// Helstrom cost with `b²δ²` in the role of the transition probability.
pub fn baseline_paper_convention(params: &ProtocolParams) -> CostValue {
    helstrom_from_transition(params.prior, (params.b * params.delta).powi(2))
}

/// Leading term `ξ(1-ξ)b²δ²` of [`baseline_paper_convention`]; `¼b²δ²` at `ξ = ½`.
pub fn baseline_paper_expansion(params: &ProtocolParams) -> f64 {
    params.prior * (1.0 - params.prior) * (params.b * params.delta).powi(2)
}

/// `a²k²Δt²δ²`; only defined on the orthogonality line `2kaΔt = b`.
pub fn original_cost(params: &ProtocolParams) -> Result<CostValue> {
    let k = params.k as f64;
    let lhs = 2.0 * k * params.a * params.dt;
    if (lhs - params.b).abs() > 1e-9 * params.b.abs().max(1.0) {
        return Err(LabError::validation(format!(
            "original cost needs 2 k a dt = b; got 2 k a dt = {lhs}, b = {}",
            params.b
        )));
    }
    Ok(CostValue::unchecked(
        (params.a * k * params.dt * params.delta).powi(2),
    ))
}

/// Residual studies available to [`fit_scaling`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScalingQuantity {
    /// Exact single-cycle click probability vs `½a²δ²Δt²`.
    OneStepClick,
    /// Exact single-cycle survival vs `1 - ½a²δ²Δt²`.
    OneStepSurvival,
    /// Magnitudes of the exactly evolved state vs [`one_step_state`].
    OneStepState,
    /// Exact no-click state vs [`one_step_post_survival_state`].
    OneStepPostSurvivalState,
    /// Exact `k`-cycle no-click state vs [`k_step_state`].
    KStepState,
    /// Exact cumulative survival vs [`survival_k_paper`].
    KStepSurvival,
    /// Exact final `|<ψ0|ψ1>|` vs `|overlap_k_paper|`.
    KStepOverlap,
    /// Exact final `|<ψ0|ψ1>|` itself (residual against zero).
    FinalOverlap,
    /// [`baseline_paper_convention`] vs [`baseline_paper_expansion`].
    HelstromExpansion,
    /// Simulated paper-mode total vs `k a²Δt²δ²/4`.
    PaperModeTotal,
}

impl ScalingQuantity {
    pub const ALL: [ScalingQuantity; 10] = [
        ScalingQuantity::OneStepClick,
        ScalingQuantity::OneStepSurvival,
        ScalingQuantity::OneStepState,
        ScalingQuantity::OneStepPostSurvivalState,
        ScalingQuantity::KStepState,
        ScalingQuantity::KStepSurvival,
        ScalingQuantity::KStepOverlap,
        ScalingQuantity::FinalOverlap,
        ScalingQuantity::HelstromExpansion,
        ScalingQuantity::PaperModeTotal,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ScalingQuantity::OneStepClick => "one_step_click",
            ScalingQuantity::OneStepSurvival => "one_step_survival",
            ScalingQuantity::OneStepState => "one_step_state",
            ScalingQuantity::OneStepPostSurvivalState => "one_step_post_survival_state",
            ScalingQuantity::KStepState => "k_step_state",
            ScalingQuantity::KStepSurvival => "k_step_survival",
            ScalingQuantity::KStepOverlap => "k_step_overlap",
            ScalingQuantity::FinalOverlap => "final_overlap",
            ScalingQuantity::HelstromExpansion => "helstrom_expansion",
            ScalingQuantity::PaperModeTotal => "paper_mode_total",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|q| q.key() == key)
    }

    /// The verbatim-implemented expression this residual exercises, if any.
    pub fn suspect(self) -> Option<SuspectExpression> {
        match self {
            ScalingQuantity::KStepOverlap => Some(SuspectExpression::OverlapDtPower),
            ScalingQuantity::KStepSurvival => Some(SuspectExpression::SurvivalCoefficient),
            _ => None,
        }
    }
}

impl fmt::Display for ScalingQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Least-squares slope of `ln residual` against `ln δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub quantity: ScalingQuantity,
    pub exponent: f64,
    pub intercept: f64,
    pub sample_deltas: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Per point: residual was floored to [`NOISE_FLOOR`].
    pub at_noise: Vec<bool>,
    /// Every residual sat at the noise floor; the exponent means nothing.
    pub indeterminate: bool,
}

fn max_magnitude_gap(exact: &[Complex64], series: &[Complex64]) -> f64 {
    exact
        .iter()
        .zip(series)
        .map(|(e, s)| (e.norm() - s.norm()).abs())
        .fold(0.0, f64::max)
}

/// `|exact - series|` for one quantity at one parameter point.
pub fn residual(quantity: ScalingQuantity, params: &ProtocolParams) -> Result<f64> {
    let spec = params.hamiltonian();
    let (psi0, _) = initial_states(params)?;
    let x = params.a.powi(2) * small(params);
    let gap = match quantity {
        ScalingQuantity::OneStepClick => {
            let out = step(&spec, &params.direction, params.dt, &psi0)?;
            (out.click_prob - 0.5 * x).abs()
        }
        ScalingQuantity::OneStepSurvival => {
            let out = step(&spec, &params.direction, params.dt, &psi0)?;
            (out.survive_prob - one_step_survival(params)).abs()
        }
        ScalingQuantity::OneStepState => {
            let evolved = evolve(&spec, params.dt, &psi0)?;
            max_magnitude_gap(
                evolved.amplitudes(),
                &one_step_state(params, Hypothesis::H0),
            )
        }
        ScalingQuantity::OneStepPostSurvivalState => {
            let out = step(&spec, &params.direction, params.dt, &psi0)?;
            max_magnitude_gap(
                out.survive.amplitudes(),
                &one_step_post_survival_state(params, Hypothesis::H0),
            )
        }
        ScalingQuantity::KStepState => {
            let report = protocol::run(params)?;
            let state =
                report
                    .survived_leaf()
                    .state0
                    .clone()
                    .ok_or(LabError::DegenerateBranch {
                        survive_prob: 0.0,
                        click_prob: 1.0,
                    })?;
            max_magnitude_gap(state.amplitudes(), &k_step_state(params, Hypothesis::H0))
        }
        ScalingQuantity::KStepSurvival => {
            let report = protocol::run(params)?;
            let exact = *report.survival_trajectory[0].last().expect("non-empty");
            (exact - survival_k_paper(params)).abs()
        }
        ScalingQuantity::KStepOverlap => {
            let report = protocol::run(params)?;
            (report.final_overlap() - overlap_k_paper(params).abs()).abs()
        }
        ScalingQuantity::FinalOverlap => protocol::run(params)?.final_overlap(),
        ScalingQuantity::HelstromExpansion => {
            (baseline_paper_convention(params).value() - baseline_paper_expansion(params)).abs()
        }
        ScalingQuantity::PaperModeTotal => {
            let report = protocol::run(&params.clone().with_mode(AccountingMode::Paper))?;
            (report.total_cost.value() - total_cost_paper_mode(params).value()).abs()
        }
    };
    if gap.is_nan() {
        return Err(LabError::DegenerateBranch {
            survive_prob: 0.0,
            click_prob: 1.0,
        });
    }
    Ok(gap)
}

/// Fits the `δ`-scaling exponent of `quantity`'s residual over `deltas`.
pub fn fit_scaling(
    quantity: ScalingQuantity,
    deltas: &[f64],
    template: &ProtocolTemplate,
) -> Result<ScalingFit> {
    let residuals = deltas
        .iter()
        .map(|&d| residual(quantity, &template.at_delta(d)?))
        .collect::<Result<Vec<_>>>()?;
    fit_power_law(quantity, deltas, &residuals)
}

/// Fits `residual ≈ C δ^p` by least squares in log space.
pub fn fit_power_law(
    quantity: ScalingQuantity,
    deltas: &[f64],
    residuals: &[f64],
) -> Result<ScalingFit> {
    if deltas.len() < 3 {
        return Err(LabError::validation(format!(
            "scaling fit needs at least 3 delta values, got {}",
            deltas.len()
        )));
    }
    if deltas.len() != residuals.len() {
        return Err(LabError::validation(
            "delta grid and residuals differ in length",
        ));
    }
    if deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(LabError::validation(
            "scaling fit needs positive finite delta values",
        ));
    }
    if residuals.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(LabError::validation(
            "residuals must be finite and non-negative",
        ));
    }
    let (lo, hi) = deltas
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &d| {
            (lo.min(d), hi.max(d))
        });
    if hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(LabError::validation(format!(
            "delta grid must span at least one decade, spans {lo:e}..{hi:e}"
        )));
    }
    let at_noise: Vec<bool> = residuals.iter().map(|&r| r < NOISE_FLOOR).collect();
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| r.max(NOISE_FLOOR).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let exponent = sxy / sxx;
    Ok(ScalingFit {
        quantity,
        exponent,
        intercept: my - exponent * mx,
        sample_deltas: deltas.to_vec(),
        residuals: residuals.to_vec(),
        indeterminate: at_noise.iter().all(|&b| b),
        at_noise,
    })
}
