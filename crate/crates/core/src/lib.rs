//! Variational quantum real- and imaginary-time evolution on a dense
//! statevector simulator, with a-posteriori Bures-distance error bounds
//! checked against exact evolution.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod bounds;
pub mod error;
pub mod evolution;
pub mod experiment;
pub mod mclachlan;
pub mod oracle;
pub mod pauli;

pub use ansatz::{initial_parameters, Ansatz, AnsatzSpec, Gate, InitialPreset};
pub use error::{Error, Result};
pub use evolution::{
    integrate_joint, JointSystem, OdeKind, SolverKind, SolverSettings, StepRecord,
};
pub use experiment::{preset, EvolutionConfig};
pub use mclachlan::{evaluate_terms, EvolutionKind, McLachlanTerms};
pub use oracle::{bures, exact_evolve, fidelity, ExactEvolver};
pub use pauli::{NormMode, PauliSum, PauliWord, Statevector};
