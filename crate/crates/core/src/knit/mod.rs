//! Cut verification by exact knitting on a dense simulator.

mod ensemble;
mod qpd;
mod sim;

pub use ensemble::{
    generate_subcircuits, knit_expectation, sample_knit_expectation, CutRecord, EnsembleEntry, KnitError,
    LocalQubit, SubcircuitEnsemble,
};
pub use qpd::{
    move_circuit, qpd_cnot, qpd_cz, qpd_identity, validate_qpd, LocalOp, Qpd, QpdCheck, QpdTarget, QpdTerm,
    QPD_TOLERANCE,
};
pub use sim::{
    expectation, final_state, gate_matrix, simulate_statevector, Branch, DensityMatrix, Initial, Pauli,
    PauliString, SimError, StateVector, MAX_SIM_QUBITS,
};
