//! Lower (moment) and upper (SOS-density) bound hierarchies, exactness
//! certification, minimizer extraction and density reconstruction.

mod density;
mod extract;
mod lower;
mod set;
mod sweep;
mod upper;

use thiserror::Error;

use crate::measures::MeasureError;
use crate::momentmat::MomentMatrixError;
use crate::orthobasis::BasisError;
use crate::polyring::PolyError;
use crate::sdp::{LinalgError, SdpError, SdpOptions, SdpStatus};

pub use density::{reconstruct_density, DensityReconstruction};
pub use extract::{certify_and_extract, extract_from_moments, Exactness, Minimizer};
pub use lower::{
    lower_bound, min_lower_order, relaxation_problem, LowerBoundResult, SolverStats, SosCertificate,
};
pub use set::SemialgebraicSet;
pub use sweep::{sandwich_sweep, sweep_orders, SweepRow};
pub use upper::{upper_bound, UpperBoundResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HierarchyError {
    #[error("order {t} is below the minimum order {needed}")]
    OrderTooLow { t: u32, needed: u32 },
    #[error("order {t}: SDP solver stopped with status {status:?}")]
    SolverFailed { t: u32, status: SdpStatus },
    #[error("order {t}: {source}")]
    Sdp {
        t: u32,
        #[source]
        source: SdpError,
    },
    #[error("order {t}: moment matrix of the reference measure is not positive definite")]
    GramNotPositiveDefinite { t: u32 },
    #[error("density basis has degree {found}, expected {expected}")]
    BasisOrderMismatch { expected: u32, found: u32 },
    #[error("density unavailable: {0}")]
    DensityUnavailable(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    MomentMatrix(#[from] MomentMatrixError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Numerical knobs shared by the hierarchy operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyOptions {
    pub sdp: SdpOptions,
    /// Relative eigenvalue threshold for numerical rank (flat truncation).
    pub rank_tol: f64,
    /// Feasibility slack for extracted points.
    pub feas_tol: f64,
    /// Optimality slack `|f(xi) - rho|` for extracted points.
    pub opt_tol: f64,
    /// Candidates closer than this are merged.
    pub merge_dist: f64,
    /// Worker threads for sweeps.
    pub threads: usize,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        HierarchyOptions {
            sdp: SdpOptions::default(),
            rank_tol: 1e-6,
            feas_tol: 1e-6,
            opt_tol: 1e-6,
            merge_dist: 1e-5,
            threads: 1,
        }
    }
}
