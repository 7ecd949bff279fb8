//! Exact verification on small systems.
//!
//! Enumerates every connected configuration of a few particles up to
//! symmetry, builds the one-activation transition matrix in exact rational
//! arithmetic (optionally keeping λ symbolic), and derives expected height
//! drifts, reachability and stationary distributions from it.

pub mod canonical;
pub mod chain;
pub mod report;
pub mod scalar;

pub use canonical::{canonical_form, enumerate_states, StateClass, SymmetryMode, MAX_ENUMERATED};
pub use chain::{build_chain, conditional_move_distribution, ChainSpec, TransitionMatrix};
pub use report::{oracle_report, reach_probabilities, state_labels, OracleReport, Reach, StateReport};
pub use scalar::{Bias, ExactLambda, InvLambdaPoly, Scalar, SymbolicLambda};

use crate::dynamics::DynamicsError;
use crate::system::SystemError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("exhaustive enumeration supports 1..={max} particles, got {0}", max = MAX_ENUMERATED)]
    SizeOutOfRange(usize),
    #[error("chain is reducible; communication classes {0:?}")]
    Reducible(Vec<Vec<usize>>),
    #[error("linear system for the stationary distribution is singular")]
    Singular,
    #[error("a move led outside the enumerated state space")]
    UnknownState,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    System(#[from] SystemError),
}
