//! Maximal Bell-inequality violations for small qubit registers.
//!
//! The crate covers the CHSH (two qubits), Mermin (three qubits) and MABK
//! (four and more qubits) inequalities: closed-form maxima for diagonal
//! states in the magic bases, the extremal mixed-state families and their
//! violation/mixedness frontiers, a numerical settings optimizer for
//! arbitrary states, distillability classification of three-qubit
//! Bell-diagonal states, a Monte Carlo survey over the simplex of such
//! states, and violation bounds computed directly from spin-chain
//! correlators.

pub mod chain;
pub mod chsh;
pub mod error;
pub mod mabk;
pub mod matrix;
pub mod mermin;
pub mod operators;
pub mod state;
#[doc(hidden)]
pub mod testutil;

pub use chain::{
    chsh_max_from_correlators, correlators_from_state2, correlators_from_state3,
    mermin_bound_from_correlators, read_correlators2_csv, read_correlators3_csv,
    state_from_correlators2, state_from_correlators3, write_correlators2_csv,
    write_correlators3_csv, ChainRow2, ChainRow3, CorrelatorTensor2, CorrelatorTensor3,
};
pub use error::{Error, Result};
pub use matrix::{dot_sigma, pauli, ComplexMatrix, C64};
pub use operators::{
    bell_value, chsh_operator, expectation, mabk_operator, maximize_violation, mermin_operator,
    BellFamily, CorrelationTensor, ObserverSettings, OptimizationReport,
};
pub use state::{
    change_basis, concurrence, mixedness, partial_transpose, state_from_json, state_to_json,
    BasisKind, BasisSet, DensityMatrix, MixednessScalars,
};
