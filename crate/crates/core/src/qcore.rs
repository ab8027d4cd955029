//! Finite-dimensional quantum mechanics for the five-level discrimination model.
//!
//! States are dense complex vectors, the Hamiltonian is the block matrix
//!
//! ```text
//! | e0  δ   0   0   0  |
//! | δ   e0  0   0   0  |
//! | 0   0   e0  δ   0  |
//! | 0   0   δ   e0  0  |
//! | 0   0   0   0   e1 |
//! ```
//!
//! and time evolution `exp(-iHt)` is taken through its closed-form
//! eigensystem. Binary measurements keep both outcome branches so callers
//! can do exact branch accounting.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{LabError, Result};

/// Tolerance for unit-norm and Hermiticity checks.
pub const NORM_TOL: f64 = 1e-12;
/// Branches with less probability than this are pruned, never renormalized.
pub const PRUNE_FLOOR: f64 = 1e-30;
/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 64;
/// Dimension of the discrimination model.
pub const MODEL_DIM: usize = 5;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Wraps amplitudes that are already unit norm (within [`NORM_TOL`]).
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm_sqr = norm_sqr(&amplitudes);
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(LabError::validation(format!(
                "state is not unit norm: |psi|^2 = {norm_sqr}"
            )));
        }
        Ok(PureState { amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The computational basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(LabError::validation(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(PureState { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// Multiplies every amplitude by `e^{i phase}`.
    pub fn with_global_phase(&self, phase: f64) -> Self {
        let factor = Complex64::from_polar(1.0, phase);
        PureState {
            amplitudes: self.amplitudes.iter().map(|z| z * factor).collect(),
        }
    }

    /// `|psi><psi|` as a dense matrix.
    pub fn density(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.amplitudes[i] * self.amplitudes[j].conj())
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn check_dim(dim: usize) -> Result<()> {
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(LabError::validation(format!(
            "dimension {dim} outside supported range 2..={MAX_DIM}"
        )));
    }
    Ok(())
}

/// `<phi|psi> = sum conj(phi_i) psi_i`.
pub fn inner_product(phi: &PureState, psi: &PureState) -> Result<Complex64> {
    if phi.dim() != psi.dim() {
        return Err(LabError::validation(format!(
            "dimension mismatch: {} vs {}",
            phi.dim(),
            psi.dim()
        )));
    }
    Ok(phi
        .amplitudes
        .iter()
        .zip(&psi.amplitudes)
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Rescales a raw vector to unit norm.
pub fn normalize(raw: &[Complex64]) -> Result<PureState> {
    check_dim(raw.len())?;
    let norm = norm_sqr(raw).sqrt();
    if !norm.is_finite() {
        return Err(LabError::validation("vector has non-finite entries"));
    }
    if norm <= PRUNE_FLOOR {
        return Err(LabError::DegenerateInput { norm });
    }
    Ok(PureState {
        amplitudes: raw.iter().map(|z| z / norm).collect(),
    })
}

/// The triple `(E0, E1, δ)` defining the five-level Hamiltonian. `ħ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSpec {
    pub e0: f64,
    pub e1: f64,
    pub delta: f64,
}

impl HamiltonianSpec {
    pub fn new(e0: f64, e1: f64, delta: f64) -> Result<Self> {
        let spec = HamiltonianSpec { e0, e1, delta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e0.is_finite() && self.e1.is_finite() && self.delta.is_finite()) {
            return Err(LabError::validation(format!(
                "Hamiltonian parameters must be finite: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Dense Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: DMatrix<Complex64>,
}

impl HermitianOperator {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(LabError::validation("operator must be square"));
        }
        check_dim(entries.nrows())?;
        let d = entries.nrows();
        for i in 0..d {
            for j in 0..=i {
                let gap = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                if !gap.is_finite() || gap > NORM_TOL {
                    return Err(LabError::validation(format!(
                        "operator is not Hermitian at ({i}, {j}): mismatch {gap:e}"
                    )));
                }
            }
        }
        Ok(HermitianOperator { entries })
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<HermitianOperator> {
    spec.validate()?;
    let mut h = DMatrix::from_element(MODEL_DIM, MODEL_DIM, ZERO);
    for i in 0..4 {
        h[(i, i)] = Complex64::new(spec.e0, 0.0);
    }
    h[(4, 4)] = Complex64::new(spec.e1, 0.0);
    for (i, j) in [(0, 1), (2, 3)] {
        h[(i, j)] = Complex64::new(spec.delta, 0.0);
        h[(j, i)] = Complex64::new(spec.delta, 0.0);
    }
    HermitianOperator::new(h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub energy: f64,
    pub vector: PureState,
}

/// Closed-form eigensystem of [`build_hamiltonian`], ordered
/// `e0+δ, e0+δ, e0-δ, e0-δ, e1`.
pub fn eigendecompose(spec: &HamiltonianSpec) -> Result<Vec<Eigenpair>> {
    spec.validate()?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let table: [(f64, [f64; MODEL_DIM]); MODEL_DIM] = [
        (spec.e0 + spec.delta, [r, r, 0.0, 0.0, 0.0]),
        (spec.e0 + spec.delta, [0.0, 0.0, r, r, 0.0]),
        (spec.e0 - spec.delta, [r, -r, 0.0, 0.0, 0.0]),
        (spec.e0 - spec.delta, [0.0, 0.0, r, -r, 0.0]),
        (spec.e1, [0.0, 0.0, 0.0, 0.0, 1.0]),
    ];
    table
        .iter()
        .map(|(energy, v)| {
            Ok(Eigenpair {
                energy: *energy,
                vector: PureState::from_real(v)?,
            })
        })
        .collect()
}

/// `exp(-iHt) psi`, computed in the eigenbasis.
pub fn evolve(spec: &HamiltonianSpec, t: f64, psi: &PureState) -> Result<PureState> {
    if !t.is_finite() {
        return Err(LabError::validation(format!(
            "evolution time must be finite, got {t}"
        )));
    }
    if psi.dim() != MODEL_DIM {
        return Err(LabError::validation(format!(
            "evolve expects a {MODEL_DIM}-dimensional state, got {}",
            psi.dim()
        )));
    }
    let mut out = vec![ZERO; MODEL_DIM];
    for pair in eigendecompose(spec)? {
        let weight =
            inner_product(&pair.vector, psi)? * Complex64::from_polar(1.0, -pair.energy * t);
        for (o, v) in out.iter_mut().zip(pair.vector.amplitudes()) {
            *o += weight * v;
        }
    }
    PureState::new(out)
}

/// Unit vector monitored by a click/no-click detector.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementDirection {
    vector: PureState,
}

impl MeasurementDirection {
    /// Normalizes `raw` and uses it as the detector direction.
    pub fn new(raw: &[Complex64]) -> Result<Self> {
        Ok(MeasurementDirection {
            vector: normalize(raw)?,
        })
    }

    pub fn from_real(raw: &[f64]) -> Result<Self> {
        let v: Vec<Complex64> = raw.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(&v)
    }

    /// `(0, 1, 1, 0, 0) / √2`: the direction monitored in the protocol.
    pub fn protocol_default() -> Self {
        Self::from_real(&[0.0, 1.0, 1.0, 0.0, 0.0]).expect("fixed direction is valid")
    }

    pub fn vector(&self) -> &PureState {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.dim()
    }
}

/// Both branches of a click/no-click measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    /// `<m|psi>`, kept so the pre-measurement amplitude vector can be
    /// reassembled from the two branches.
    pub click_amplitude: Complex64,
    pub click_prob: f64,
    pub survive_prob: f64,
    pub post_click_state: PureState,
    pub post_survive_state: PureState,
}

/// Projective measurement onto `m` and its orthogonal complement.
///
/// The click branch collapses to `m` itself. Fails with
/// [`LabError::DegenerateBranch`] when the no-click branch is too small to
/// renormalize.
pub fn measure_binary(m: &MeasurementDirection, psi: &PureState) -> Result<MeasurementOutcome> {
    let click_amplitude = inner_product(m.vector(), psi)?;
    let click_prob = click_amplitude.norm_sqr();
    let residual: Vec<Complex64> = psi
        .amplitudes()
        .iter()
        .zip(m.vector().amplitudes())
        .map(|(p, v)| p - click_amplitude * v)
        .collect();
    let residual_sqr = norm_sqr(&residual);
    if residual_sqr < PRUNE_FLOOR {
        return Err(LabError::DegenerateBranch {
            survive_prob: residual_sqr,
            click_prob,
        });
    }
    let norm = residual_sqr.sqrt();
    Ok(MeasurementOutcome {
        click_amplitude,
        click_prob,
        survive_prob: 1.0 - click_prob,
        post_click_state: m.vector().clone(),
        post_survive_state: PureState {
            amplitudes: residual.into_iter().map(|z| z / norm).collect(),
        },
    })
}
