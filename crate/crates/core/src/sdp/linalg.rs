//! Symmetric and generalized symmetric eigenproblems on dense matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

const EIG_MAX_ITER: usize = 10_000;

fn check_symmetric(m: &DMatrix<f64>) -> Result<(), LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let scale = m.amax().max(1.0);
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if worst > 1e-10 * scale {
        return Err(LinalgError::NotSymmetric(worst));
    }
    Ok(())
}

/// Symmetric eigendecomposition with eigenvalues ascending; columns of the
/// returned matrix are the matching orthonormal eigenvectors.
pub fn sym_eig(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>), LinalgError> {
    check_symmetric(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok((DVector::zeros(0), DMatrix::zeros(0, 0)));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, EIG_MAX_ITER)
        .ok_or(LinalgError::NoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok((values, vectors))
}

/// Smallest eigenvalue; `+inf` for an empty matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64, LinalgError> {
    let (vals, _) = sym_eig(m)?;
    Ok(vals.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Number of eigenvalues of the PSD-ish matrix `m` above `tau * max|lambda|`.
pub fn numerical_rank(m: &DMatrix<f64>, tau: f64) -> Result<usize, LinalgError> {
    let (vals, _) = sym_eig(m)?;
    let top = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if top == 0.0 {
        return Ok(0);
    }
    Ok(vals.iter().filter(|v| v.abs() > tau * top).count())
}

/// Smallest `lambda` with `A v = lambda B v`, for symmetric `A` and symmetric
/// positive definite `B`, through the reduction `L^{-1} A L^{-T}` with
/// `B = L L^T`. The eigenvector is normalized so that `v^T B v = 1`.
pub fn gen_eig_min(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, DVector<f64>), LinalgError> {
    check_symmetric(a)?;
    check_symmetric(b)?;
    if a.nrows() != b.nrows() {
        return Err(LinalgError::DimensionMismatch(a.nrows(), b.nrows()));
    }
    let chol = b
        .clone()
        .cholesky()
        .ok_or(LinalgError::NotPositiveDefinite)?;
    let l = chol.l();
    let left = l
        .solve_lower_triangular(a)
        .ok_or(LinalgError::NotPositiveDefinite)?;
    let c = l
        .solve_lower_triangular(&left.transpose())
        .ok_or(LinalgError::NotPositiveDefinite)?;
    let c = (&c + c.transpose()) * 0.5;
    let (vals, vecs) = sym_eig(&c)?;
    let w = vecs.column(0).into_owned();
    let v = l
        .transpose()
        .solve_upper_triangular(&w)
        .ok_or(LinalgError::NotPositiveDefinite)?;
    Ok((vals[0], v))
}

/// `gen_eig_min` for a positive semidefinite `B`, restricted to the range of
/// `B` (eigenvalues above `tau * lambda_max`). Exact whenever `A` vanishes
/// on the null space of `B`, as happens for moment matrices of measures with
/// finite support.
pub fn gen_eig_min_on_range(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    tau: f64,
) -> Result<(f64, DVector<f64>), LinalgError> {
    let (vals, vecs) = sym_eig(b)?;
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if top <= 0.0 {
        return Err(LinalgError::NotPositiveDefinite);
    }
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > tau * top).collect();
    let q = DMatrix::from_fn(b.nrows(), keep.len(), |r, c| vecs[(r, keep[c])]);
    let ar = q.transpose() * a * &q;
    let br = DMatrix::from_diagonal(&DVector::from_iterator(
        keep.len(),
        keep.iter().map(|&i| vals[i]),
    ));
    let ar = (&ar + ar.transpose()) * 0.5;
    let (lambda, z) = gen_eig_min(&ar, &br)?;
    Ok((lambda, q * z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn random_sym(rng: &mut StdRng, n: usize) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        (&m + m.transpose()) * 0.5
    }

    fn random_spd(rng: &mut StdRng, n: usize) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        &m * m.transpose() + DMatrix::identity(n, n) * 0.5
    }

    #[test]
    fn identity_and_diagonal() {
        let (v, _) = sym_eig(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(v.as_slice(), &[1.0, 1.0, 1.0]);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let (v, _) = sym_eig(&d).unwrap();
        assert_eq!(v.as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = StdRng::seed_from_u64(7);
        let m = random_sym(&mut rng, 8);
        let (vals, vecs) = sym_eig(&m).unwrap();
        let rebuilt = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert!((rebuilt - &m).amax() <= 1e-9 * m.amax());
        let residual = &m * &vecs - &vecs * DMatrix::from_diagonal(&vals);
        assert!(residual.amax() <= 1e-9 * m.amax());
        for w in vals.as_slice().windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(sym_eig(&m), Err(LinalgError::NotSymmetric(_))));
    }

    #[test]
    fn generalized_examples() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 5.0]));
        let (l, _) = gen_eig_min(&a, &DMatrix::identity(2, 2)).unwrap();
        assert!((l - 2.0).abs() < 1e-14);

        let mut rng = StdRng::seed_from_u64(11);
        let b = random_spd(&mut rng, 5);
        let (l, _) = gen_eig_min(&(&b * 2.0), &b).unwrap();
        assert!((l - 2.0).abs() < 1e-10);
    }

    #[test]
    fn generalized_residual() {
        let mut rng = StdRng::seed_from_u64(3);
        let a = random_sym(&mut rng, 6);
        let b = random_spd(&mut rng, 6);
        let (l, v) = gen_eig_min(&a, &b).unwrap();
        let r = &a * &v - (&b * &v) * l;
        assert!(r.amax() <= 1e-8);
        assert!(((v.transpose() * &b * &v)[0] - 1.0).abs() < 1e-10);
        // no smaller Rayleigh quotient among random probes
        for _ in 0..200 {
            let z = DVector::from_fn(6, |_, _| rng.gen_range(-1.0..1.0));
            let q = (z.transpose() * &a * &z)[0] / (z.transpose() * &b * &z)[0];
            assert!(q >= l - 1e-12);
        }
    }

    #[test]
    fn generalized_rejects_indefinite() {
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        assert_eq!(
            gen_eig_min(&DMatrix::identity(2, 2), &b).unwrap_err(),
            LinalgError::NotPositiveDefinite
        );
    }

    #[test]
    fn range_restricted_pencil() {
        // B singular with A vanishing on its null space
        let q = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = &q * q.transpose();
        let inner = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -2.0]);
        let a = &q * &inner * q.transpose();
        assert!(gen_eig_min(&a, &b).is_err());
        let (l, v) = gen_eig_min_on_range(&a, &b, 1e-10).unwrap();
        let expect = min_eigenvalue(&inner).unwrap();
        assert!((l - expect).abs() < 1e-10);
        assert!(((v.transpose() * &b * &v)[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rank() {
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let m = &v * v.transpose();
        assert_eq!(numerical_rank(&m, 1e-6).unwrap(), 1);
        assert_eq!(numerical_rank(&DMatrix::identity(4, 4), 1e-6).unwrap(), 4);
    }
}
