//! Batch front end: problem files in, JSON reports and CSV tables out.

mod basis;
mod problem;
mod report;
mod run;

use thiserror::Error;

use crate::hierarchy::HierarchyError;
use crate::measures::MeasureError;
use crate::orthobasis::BasisError;

pub use basis::{basis_table, parse_measure_spec, BasisTable, KernelSample};
pub use problem::{parse_problem, Constraint, MeasureKind, ProblemFile, Relation};
pub use report::{DensityTable, OrderRow, ProblemSummary, RunReport, SolverDiagnostics, REPORT_VERSION};
pub use run::{dump_relaxations, exit_code, run, sample_density, DensitySamples, RunOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: unknown variable `{name}`")]
    UnknownVariable {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("line {line}: duplicate key `{key}` (first set on line {first})")]
    DuplicateKey { key: String, line: usize, first: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("invalid measure spec `{0}`")]
    MeasureSpec(String),
    #[error("{0}")]
    Io(String),
    #[error("report serialization: {0}")]
    Json(String),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}
