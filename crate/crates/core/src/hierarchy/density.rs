use super::lower::LowerBoundResult;
use super::HierarchyError;
use crate::orthobasis::OrthoBasis;
use crate::polyring::Polynomial;

/// Signed polynomial density `sigma = sum_alpha sigma_alpha T_alpha` of a
/// relaxation solution, `sigma = D y*`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityReconstruction {
    pub t: u32,
    pub sigma: Vec<f64>,
    pub sigma_poly: Polynomial,
    /// `(xi, 1 / K_2t(xi, xi))` for every extracted minimizer.
    pub christoffel_at: Vec<(Vec<f64>, f64)>,
    /// `(xi, sigma(xi))` for every extracted minimizer.
    pub sigma_at: Vec<(Vec<f64>, f64)>,
}

/// Rebuilds the density of `r` in `basis`, which must have degree `2t`.
pub fn reconstruct_density(
    r: &LowerBoundResult,
    basis: &OrthoBasis,
) -> Result<DensityReconstruction, HierarchyError> {
    if basis.t() != 2 * r.t {
        return Err(HierarchyError::BasisOrderMismatch {
            expected: 2 * r.t,
            found: basis.t(),
        });
    }
    let sigma = basis.to_ortho_coords(&r.moments)?;
    let sigma_poly = basis.combination(&sigma)?;
    let mut christoffel_at = Vec::new();
    let mut sigma_at = Vec::new();
    for m in r.exactness.minimizers() {
        christoffel_at.push((m.point.clone(), basis.christoffel(&m.point)?));
        sigma_at.push((m.point.clone(), sigma_poly.eval(&m.point)?));
    }
    Ok(DensityReconstruction {
        t: r.t,
        sigma,
        sigma_poly,
        christoffel_at,
        sigma_at,
    })
}
