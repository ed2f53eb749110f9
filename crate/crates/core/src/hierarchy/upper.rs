use super::HierarchyError;
use crate::measures::ReferenceMeasure;
use crate::momentmat::{localizing_matrix, moment_matrix};
use crate::polyring::{MonomialBasis, Polynomial};
use crate::sdp::linalg::{gen_eig_min, gen_eig_min_on_range, LinalgError};

/// Solution of the order-`t` SOS-density bound.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperBoundResult {
    pub t: u32,
    /// `u_t = min { int f sigma dmu : sigma SOS of degree 2t, int sigma dmu = 1 }`.
    pub u: f64,
    /// Minimizing eigenvector in the monomial basis of order `t`, `v^T M_t(y_mu) v = 1`.
    pub v: Vec<f64>,
    /// `sigma = (v^T v_t(x))^2`.
    pub sos_density: Polynomial,
}

impl UpperBoundResult {
    pub fn density_at(&self, x: &[f64]) -> Result<f64, HierarchyError> {
        Ok(self.sos_density.eval(x)?)
    }
}

/// `u_t` as the smallest eigenvalue of the pencil `(M_t(f y_mu), M_t(y_mu))`.
///
/// For measures with finite support the Gram matrix is singular beyond small
/// orders; the pencil is then solved on its range, which is exact because
/// both matrices vanish on the same null space.
pub fn upper_bound(
    f: &Polynomial,
    measure: &ReferenceMeasure,
    t: u32,
) -> Result<UpperBoundResult, HierarchyError> {
    let n = measure.n();
    if f.n() != n {
        return Err(HierarchyError::DimensionMismatch {
            expected: n,
            found: f.n(),
        });
    }
    let y = measure.moments(2 * t + f.degree());
    let a = localizing_matrix(&y, f, t)?.matrix;
    let b = moment_matrix(&y, t)?;
    let solved = if measure.is_finite_support() {
        gen_eig_min_on_range(&a, &b, 1e-10)
    } else {
        gen_eig_min(&a, &b)
    };
    let (u, v) = solved.map_err(|e| match e {
        LinalgError::NotPositiveDefinite => HierarchyError::GramNotPositiveDefinite { t },
        other => other.into(),
    })?;
    let basis = MonomialBasis::new(n, t)?;
    let p = Polynomial::from_coeff_vector(&basis, v.as_slice())?;
    Ok(UpperBoundResult {
        t,
        u,
        v: v.iter().copied().collect(),
        sos_density: &p * &p,
    })
}
