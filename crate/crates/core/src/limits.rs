//! Size caps for the exponential-cost routines.
//!
//! Every routine that enumerates an exponentially large object checks its
//! request against these caps and fails with [`Error::Budget`] instead of
//! attempting the allocation. The joint two-copy cap can be raised at runtime
//! (the CLI wires it to `CE_MAX_QUBITS`).

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

/// Largest `c(s)` for which a purity table (2^c(s) entries) is enumerated.
pub const MAX_TABLE_CARDINALITY: usize = 24;
/// Largest number of tested qubits whose outcome table is enumerated.
pub const MAX_OUTCOME_QUBITS: usize = 14;
/// Largest register simulated by the explicit ancilla circuit.
pub const MAX_CIRCUIT_QUBITS: usize = 20;
/// Largest register for which a dense density matrix is materialized.
pub const MAX_DENSE_QUBITS: usize = 10;
/// Largest number of branches expanded by a separable operation sequence.
pub const MAX_BRANCHES: u64 = 1 << 20;
/// Largest qubit count accepted when reading a state file.
pub const MAX_STATE_QUBITS: usize = 30;

const DEFAULT_JOINT_QUBITS: usize = 10;

static JOINT_QUBITS: AtomicUsize = AtomicUsize::new(DEFAULT_JOINT_QUBITS);

/// Per-copy qubit cap for routines that hold the 4^n two-copy vector.
pub fn max_joint_qubits() -> usize {
    JOINT_QUBITS.load(Ordering::Relaxed)
}

pub fn set_max_joint_qubits(n: usize) {
    JOINT_QUBITS.store(n.clamp(1, 16), Ordering::Relaxed);
}

pub(crate) fn check(what: &'static str, requested: usize, limit: usize) -> Result<()> {
    if requested > limit {
        Err(Error::Budget {
            what,
            requested: requested as u64,
            limit: limit as u64,
        })
    } else {
        Ok(())
    }
}
