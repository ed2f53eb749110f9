use serde::{Deserialize, Serialize};

use crate::measures::ReferenceMeasure;

pub const REPORT_VERSION: u32 = 1;

/// One JSON document per `solve` run. Every key is always present; missing
/// values are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: u32,
    pub problem: ProblemSummary,
    pub rows: Vec<OrderRow>,
    /// Density coefficients of the selected order (see `density_note`).
    pub density: Option<DensityTable>,
    pub density_note: Option<String>,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub n: usize,
    pub variables: Vec<String>,
    pub objective: String,
    /// Normalized as `g >= 0` or `h = 0`.
    pub constraints: Vec<String>,
    pub measure: Option<ReferenceMeasure>,
    pub orders: [u32; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub t: u32,
    /// `"solved"` or `"failed"`.
    pub status: String,
    pub rho: Option<f64>,
    pub u: Option<f64>,
    pub gap: Option<f64>,
    /// `"certified"` or `"not_certified"`.
    pub exactness: Option<String>,
    pub ranks: Option<Vec<usize>>,
    pub minimizers: Option<Vec<Vec<f64>>>,
    pub minimizer_values: Option<Vec<f64>>,
    /// `1 / K_2t(xi, xi)` per minimizer.
    pub christoffel: Option<Vec<f64>>,
    /// `sigma(xi)` per minimizer.
    pub sigma_at_minimizers: Option<Vec<f64>>,
    pub certificate_residual: Option<f64>,
    pub solver: Option<SolverDiagnostics>,
    pub lower_error: Option<String>,
    pub upper_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub status: String,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
}

/// `sigma = sum_alpha sigma_alpha T_alpha` with `labels[i]` the exponent
/// `alpha` of the `i`-th orthonormal polynomial (graded lex order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTable {
    pub t: u32,
    /// Basis degree, `2t`.
    pub degree: u32,
    pub measure: ReferenceMeasure,
    pub labels: Vec<String>,
    pub sigma: Vec<f64>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self, super::CliError> {
        serde_json::from_str(text).map_err(|e| super::CliError::Json(e.to_string()))
    }
}
