//! Moment and localizing matrices `M_s(g y)(alpha, beta) = sum_gamma g_gamma y_{alpha+beta+gamma}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hierarchy::SemialgebraicSet;
use crate::measures::MomentSequence;
use crate::polyring::{MonomialBasis, PolyError, Polynomial};
use crate::sdp::linalg::{min_eigenvalue, LinalgError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MomentMatrixError {
    #[error("moment sequence of order {found} is too short for order {order} with a degree-{g_degree} weight (needs {needed})")]
    TooShort {
        order: u32,
        g_degree: u32,
        needed: u32,
        found: u32,
    },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Localizing matrix of one weight polynomial at one order.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizingMatrix {
    pub g: Polynomial,
    pub order: u32,
    pub matrix: DMatrix<f64>,
}

/// One structural nonzero of a localizing matrix viewed as a linear map of
/// `y`: entry `(row, col)` receives `coeff * y[var]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizingEntry {
    pub row: usize,
    pub col: usize,
    pub var: usize,
    pub coeff: f64,
}

fn check_length(g: &Polynomial, s: u32, y_order: u32) -> Result<(), MomentMatrixError> {
    let needed = 2 * s + g.degree();
    if needed > y_order {
        return Err(MomentMatrixError::TooShort {
            order: s,
            g_degree: g.degree(),
            needed,
            found: y_order,
        });
    }
    Ok(())
}

/// `M_s(g y)`; with `g = 1` this is the moment matrix `M_s(y)`.
pub fn localizing_matrix(
    y: &MomentSequence,
    g: &Polynomial,
    s: u32,
) -> Result<LocalizingMatrix, MomentMatrixError> {
    if g.n() != y.n() {
        return Err(PolyError::DimensionMismatch {
            expected: y.n(),
            found: g.n(),
        }
        .into());
    }
    check_length(g, s, y.t())?;
    let rows = MonomialBasis::new(y.n(), s)?;
    let k = rows.len();
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let ab = rows.get(i).plus(rows.get(j));
            m[(i, j)] = g
                .terms()
                .map(|(gamma, c)| c * y.get(&ab.plus(gamma)).expect("length checked"))
                .sum();
        }
    }
    Ok(LocalizingMatrix {
        g: g.clone(),
        order: s,
        matrix: m,
    })
}

/// Moment matrix `M_s(y)`.
pub fn moment_matrix(y: &MomentSequence, s: u32) -> Result<DMatrix<f64>, MomentMatrixError> {
    Ok(localizing_matrix(y, &Polynomial::constant(y.n(), 1.0), s)?.matrix)
}

/// The linear map `y -> M_s(g y)` as a list of nonzeros over the variables
/// of `y_basis` (both triangles listed).
pub fn localizing_entries(
    g: &Polynomial,
    s: u32,
    y_basis: &MonomialBasis,
) -> Result<Vec<LocalizingEntry>, MomentMatrixError> {
    check_length(g, s, y_basis.t())?;
    let rows = MonomialBasis::new(y_basis.n(), s)?;
    let k = rows.len();
    let mut out = Vec::with_capacity(k * k * g.num_terms());
    for i in 0..k {
        for j in 0..k {
            let ab = rows.get(i).plus(rows.get(j));
            for (gamma, c) in g.terms() {
                let var = y_basis.position(&ab.plus(gamma)).expect("length checked");
                out.push(LocalizingEntry {
                    row: i,
                    col: j,
                    var,
                    coeff: c,
                });
            }
        }
    }
    Ok(out)
}

/// Outcome for one constraint in [`putinar_prefix_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    /// 0 is the moment matrix (`g_0 = 1`); `j >= 1` the `j`-th inequality.
    pub index: usize,
    pub order: u32,
    pub min_eigenvalue: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PutinarReport {
    pub t: u32,
    pub constraints: Vec<ConstraintCheck>,
    /// Largest `|M_{t-d}(h y)|` entry over equality constraints.
    pub equality_violation: f64,
    pub pass: bool,
}

impl PutinarReport {
    pub fn failures(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.constraints.iter().filter(|c| !c.pass)
    }
}

pub const DEFAULT_PSD_TOL: f64 = 1e-8;

/// Necessary conditions `M_{t-d_j}(g_j y) >= 0`, `j = 0..m`, at order `t`.
/// Constraints with `d_j > t` are skipped.
pub fn putinar_prefix_check(
    y: &MomentSequence,
    set: &SemialgebraicSet,
    t: u32,
    tol: f64,
) -> Result<PutinarReport, MomentMatrixError> {
    let one = Polynomial::constant(set.n(), 1.0);
    let mut weights: Vec<(usize, &Polynomial)> = vec![(0, &one)];
    weights.extend(set.inequalities().iter().enumerate().map(|(j, g)| (j + 1, g)));
    let mut constraints = Vec::new();
    for (index, g) in weights {
        let d = SemialgebraicSet::half_degree(g);
        if d > t {
            continue;
        }
        let s = t - d;
        let m = localizing_matrix(y, g, s)?;
        let lam = min_eigenvalue(&m.matrix)?;
        constraints.push(ConstraintCheck {
            index,
            order: s,
            min_eigenvalue: lam,
            pass: lam >= -tol,
        });
    }
    let mut equality_violation: f64 = 0.0;
    for h in set.equalities() {
        let d = SemialgebraicSet::half_degree(h);
        if d > t {
            continue;
        }
        let m = localizing_matrix(y, h, t - d)?;
        equality_violation = equality_violation.max(m.matrix.amax());
    }
    let pass = constraints.iter().all(|c| c.pass) && equality_violation <= tol;
    Ok(PutinarReport {
        t,
        constraints,
        equality_violation,
        pass,
    })
}
