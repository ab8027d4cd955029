//! Exact simulation of negative-result measurement protocols for binary
//! quantum state discrimination.
//!
//! The crate is organized bottom-up:
//!
//! - [`qcore`]: five-level states, Hamiltonian, unitary evolution and
//!   click/no-click measurements that keep both branches.
//! - [`helstrom`]: Bayes 0-1 costs, the Helstrom bound (pure and trace-norm
//!   forms) and posterior updates.
//! - [`protocol`]: the evolve-and-watch engine with exact branch-tree
//!   accounting.
//! - [`paperform`]: the published small-`δ` expansions, implemented
//!   literally, plus residual scaling fits against the exact engine.
//! - [`labcli`]: sweep configs, optimization, scaling studies and CSV/text
//!   reports behind the `helstrom-lab` binary.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod error;
pub mod helstrom;
pub mod labcli;
pub mod paperform;
pub mod protocol;
pub mod qcore;

pub use error::{LabError, Result};
pub use helstrom::{
    guess_only_cost, helstrom_mixed, helstrom_pure, posterior_update, CostValue,
    DiscriminationInstance,
};
pub use protocol::{
    run, AccountingMode, DtChoice, ProtocolParams, ProtocolReport, ProtocolTemplate,
};
pub use qcore::{HamiltonianSpec, MeasurementDirection, PureState};
