//! Concentratable Entanglement of pure qubit states and the parallelized SWAP
//! test that measures it.
//!
//! Qubit `k` of an `n`-qubit register sits at amplitude-index bit `n - 1 - k`,
//! so qubit 0 is the most significant bit and reads leftmost in bitstrings.

pub mod error;
pub mod limits;
pub mod measures;
pub mod oracle;
pub mod reductions;
pub mod statevector;
pub mod swaptest;
pub mod verify;

pub use error::{Error, Result};
pub use measures::{ce_auto, ce_distribution, ce_even_weight, ce_purity, ce_shots, ce_two_state, n_tangle, CeResult, Method};
pub use reductions::{cross_purity, purity, purity_table, PurityTable};
pub use statevector::{QubitSet, Statevector};
pub use swaptest::{exact_distribution, sample, JointState, OutcomeDistribution, ShotHistogram};
