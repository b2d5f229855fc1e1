//! Independent schedule replay and state-vector equivalence checks.

mod replay;
mod sim;

pub use replay::{validate_schedule, Violation, ViolationCode};
pub use sim::{
    equivalence_check, executed_gates, raw_distribution, statevector_oracle, tvd, Equivalence, ExecutedGate,
    EQUIVALENCE_MAX_QUBITS, ORACLE_MAX_QUBITS,
};
