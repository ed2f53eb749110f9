//! Dense semidefinite programming and eigenvalue kernels.

pub mod linalg;
mod problem;
mod solver;

use thiserror::Error;

pub use linalg::{gen_eig_min, sym_eig, LinalgError};
pub use problem::{LmiBlock, LmiBlockBuilder, SdpProblem, SparseSym};
pub use solver::{solve_sdp, SdpOptions, SdpSolution, SdpStatus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdpError {
    #[error("invalid SDP: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
