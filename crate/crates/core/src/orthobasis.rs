//! Orthonormal polynomials of a reference measure, the lower-triangular
//! change of basis `D` from monomials, the Christoffel-Darboux kernel and the
//! Christoffel function.
//!
//! Row `alpha` of `D` holds the monomial coefficients of `T_alpha`, so that
//! `(T_alpha(x))_alpha = D v(x)` with `v(x)` the graded-lex monomial vector.
//! Two constructions are provided: a Cholesky factorization of the Gram
//! matrix (any measure with known moments) and a tensor product of
//! univariate three-term recurrences (the built-in product measures). Both
//! yield the unique lower-triangular `D` with positive diagonal and
//! `D G D^T = I`, which is what the cross-validation tests rely on.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::measures::{integrate, MeasureError, MomentSequence, ReferenceMeasure};
use crate::polyring::{MonomialBasis, PolyError, Polynomial};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BasisError {
    #[error("Gram matrix is numerically singular at degree {degree} (condition estimate {condition:e})")]
    Singular { degree: u32, condition: f64 },
    #[error("basis degree {t} exceeds the configured cap {max}")]
    DegreeCap { t: u32, max: u32 },
    #[error("expected a vector of length {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("moment sequence of order {found} is too short, need {needed}")]
    MomentsTooShort { needed: u32, found: u32 },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisOptions {
    /// Largest admissible basis degree.
    pub max_degree: u32,
    /// Largest admissible condition estimate of the Gram matrix (Cholesky route).
    pub cond_limit: f64,
}

impl Default for BasisOptions {
    fn default() -> Self {
        BasisOptions {
            max_degree: 8,
            cond_limit: 1e14,
        }
    }
}

/// Orthonormal basis `(T_alpha)_{|alpha| <= t}` of a reference measure.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    measure: Option<ReferenceMeasure>,
    basis: MonomialBasis,
    d: DMatrix<f64>,
    /// Moments of the measure up to order `2t`.
    moments: MomentSequence,
}

/// One evaluation of the Christoffel-Darboux kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct CdKernelEval {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: u32,
    pub value: f64,
}

/// Recurrence coefficients of the coordinate marginal: for
/// `x T_k = b_{k+1} T_{k+1} + a_k T_k + b_k T_{k-1}`, returns `(a_k, b_{k+1})`.
fn recurrence(measure: &ReferenceMeasure, coord: usize, k: u32) -> (f64, f64) {
    match measure {
        ReferenceMeasure::UniformBox { lo, hi } => {
            // affine image of the Legendre recurrence, orthonormal for dx/2
            let c = 0.5 * (lo[coord] + hi[coord]);
            let h = 0.5 * (hi[coord] - lo[coord]);
            let k1 = (k + 1) as f64;
            (c, h * k1 / (4.0 * k1 * k1 - 1.0).sqrt())
        }
        ReferenceMeasure::CountingHypercube { .. } => (0.0, if k == 0 { 1.0 } else { 0.0 }),
    }
}

/// Ascending coefficient vectors of the univariate orthonormal polynomials
/// `T_0..T_t` of coordinate `coord`.
fn univariate_family(
    measure: &ReferenceMeasure,
    coord: usize,
    t: u32,
) -> Result<Vec<Vec<f64>>, BasisError> {
    let mut fam: Vec<Vec<f64>> = vec![vec![1.0]];
    let mut prev_b = 0.0;
    for k in 0..t {
        let (a, b) = recurrence(measure, coord, k);
        if b <= 0.0 {
            return Err(BasisError::Singular {
                degree: k + 1,
                condition: f64::INFINITY,
            });
        }
        let cur = &fam[k as usize];
        let mut next = vec![0.0; cur.len() + 1];
        for (j, &c) in cur.iter().enumerate() {
            next[j + 1] += c;
            next[j] -= a * c;
        }
        if k > 0 {
            for (j, &c) in fam[k as usize - 1].iter().enumerate() {
                next[j] -= prev_b * c;
            }
        }
        for c in &mut next {
            *c /= b;
        }
        fam.push(next);
        prev_b = b;
    }
    Ok(fam)
}

/// Gram (moment) matrix `G(alpha, beta) = y_{alpha + beta}` over `basis`.
pub fn gram_matrix(moments: &MomentSequence, basis: &MonomialBasis) -> DMatrix<f64> {
    let n = basis.len();
    DMatrix::from_fn(n, n, |i, j| {
        moments
            .get(&basis.get(i).plus(basis.get(j)))
            .expect("moments cover degree 2t")
    })
}

/// Lower Cholesky factor; reports the first basis row whose pivot breaks down.
fn cholesky_rows(g: &DMatrix<f64>) -> Result<DMatrix<f64>, usize> {
    let n = g.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    let scale = (0..n).map(|i| g[(i, i)].abs()).fold(0.0, f64::max);
    for j in 0..n {
        let mut d = g[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 1e-15 * scale) {
            return Err(j);
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

fn invert_lower(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut inv = DMatrix::<f64>::zeros(n, n);
    for c in 0..n {
        inv[(c, c)] = 1.0 / l[(c, c)];
        for r in (c + 1)..n {
            let mut s = 0.0;
            for k in c..r {
                s += l[(r, k)] * inv[(k, c)];
            }
            inv[(r, c)] = -s / l[(r, r)];
        }
    }
    inv
}

impl OrthoBasis {
    /// Builds the basis of a built-in measure through tensorized univariate
    /// recurrences.
    pub fn build(measure: &ReferenceMeasure, t: u32) -> Result<Self, BasisError> {
        Self::build_with(measure, t, BasisOptions::default())
    }

    pub fn build_with(
        measure: &ReferenceMeasure,
        t: u32,
        opts: BasisOptions,
    ) -> Result<Self, BasisError> {
        if t > opts.max_degree {
            return Err(BasisError::DegreeCap {
                t,
                max: opts.max_degree,
            });
        }
        let n = measure.n();
        let basis = MonomialBasis::new(n, t)?;
        let families = (0..n)
            .map(|i| univariate_family(measure, i, t))
            .collect::<Result<Vec<_>, _>>()?;
        let size = basis.len();
        let mut d = DMatrix::zeros(size, size);
        for (r, alpha) in basis.indices().iter().enumerate() {
            let ae = alpha.exponents();
            // T_alpha only involves monomials x^beta with beta <= alpha componentwise
            for (c, beta) in basis.indices().iter().enumerate().take(r + 1) {
                let be = beta.exponents();
                if be.iter().zip(ae).any(|(b, a)| b > a) {
                    continue;
                }
                d[(r, c)] = (0..n)
                    .map(|i| families[i][ae[i] as usize][be[i] as usize])
                    .product();
            }
        }
        Ok(OrthoBasis {
            measure: Some(measure.clone()),
            basis,
            d,
            moments: measure.moments(2 * t),
        })
    }

    /// Gram-Cholesky construction `D = L^{-1}` with `G = L L^T`, from a
    /// moment sequence of order at least `2t`.
    pub fn from_moments(moments: &MomentSequence, t: u32, opts: BasisOptions) -> Result<Self, BasisError> {
        if t > opts.max_degree {
            return Err(BasisError::DegreeCap {
                t,
                max: opts.max_degree,
            });
        }
        if moments.t() < 2 * t {
            return Err(BasisError::MomentsTooShort {
                needed: 2 * t,
                found: moments.t(),
            });
        }
        let basis = MonomialBasis::new(moments.n(), t)?;
        let g = gram_matrix(moments, &basis);
        let l = cholesky_rows(&g).map_err(|row| BasisError::Singular {
            degree: basis.get(row).degree(),
            condition: f64::INFINITY,
        })?;
        // condition guard per degree block: (max/min pivot)^2 of the prefix
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for (i, alpha) in basis.indices().iter().enumerate() {
            lo = lo.min(l[(i, i)]);
            hi = hi.max(l[(i, i)]);
            let cond = (hi / lo).powi(2);
            if cond > opts.cond_limit {
                return Err(BasisError::Singular {
                    degree: alpha.degree(),
                    condition: cond,
                });
            }
        }
        Ok(OrthoBasis {
            measure: None,
            basis,
            d: invert_lower(&l),
            moments: moments.truncate(2 * t),
        })
    }

    /// Cholesky route for a built-in measure.
    pub fn build_cholesky(measure: &ReferenceMeasure, t: u32, opts: BasisOptions) -> Result<Self, BasisError> {
        let mut b = Self::from_moments(&measure.moments(2 * t), t, opts)?;
        b.measure = Some(measure.clone());
        Ok(b)
    }

    pub fn measure(&self) -> Option<&ReferenceMeasure> {
        self.measure.as_ref()
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn t(&self) -> u32 {
        self.basis.t()
    }

    pub fn monomials(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Change-of-basis matrix `D`.
    pub fn change_of_basis(&self) -> &DMatrix<f64> {
        &self.d
    }

    /// Moments of the reference measure up to order `2t`.
    pub fn moments(&self) -> &MomentSequence {
        &self.moments
    }

    pub fn gram(&self) -> DMatrix<f64> {
        gram_matrix(&self.moments, &self.basis)
    }

    /// `T_alpha` for the `i`-th index of the monomial basis.
    pub fn polynomial(&self, i: usize) -> Polynomial {
        let row: Vec<f64> = self.d.row(i).iter().copied().collect();
        Polynomial::from_coeff_vector(&self.basis, &row).expect("row length matches basis")
    }

    fn check_point(&self, x: &[f64]) -> Result<(), BasisError> {
        if x.len() != self.n() {
            return Err(PolyError::DimensionMismatch {
                expected: self.n(),
                found: x.len(),
            }
            .into());
        }
        Ok(())
    }

    /// `(T_alpha(x))_alpha`.
    pub fn eval_all(&self, x: &[f64]) -> Result<Vec<f64>, BasisError> {
        self.check_point(x)?;
        let v = DVector::from_vec(self.basis.eval_monomials(x));
        Ok((&self.d * v).iter().copied().collect())
    }

    fn check_len(&self, found: usize) -> Result<(), BasisError> {
        if found != self.len() {
            return Err(BasisError::SizeMismatch {
                expected: self.len(),
                found,
            });
        }
        Ok(())
    }

    /// Coordinates `sigma = D y` of a moment sequence of the same order:
    /// `sigma_alpha = int T_alpha dphi` when `y` are moments of `phi`.
    pub fn to_ortho_coords(&self, y: &MomentSequence) -> Result<Vec<f64>, BasisError> {
        if y.n() != self.n() {
            return Err(PolyError::DimensionMismatch {
                expected: self.n(),
                found: y.n(),
            }
            .into());
        }
        self.check_len(y.len())?;
        let y = DVector::from_column_slice(y.values());
        Ok((&self.d * y).iter().copied().collect())
    }

    /// Inverse of [`OrthoBasis::to_ortho_coords`], by forward substitution.
    pub fn from_ortho_coords(&self, sigma: &[f64]) -> Result<MomentSequence, BasisError> {
        self.check_len(sigma.len())?;
        let s = DVector::from_column_slice(sigma);
        let y = self
            .d
            .solve_lower_triangular(&s)
            .expect("positive diagonal");
        Ok(MomentSequence::new(self.basis.clone(), y.iter().copied().collect())?)
    }

    /// Coefficients `f~ = D^{-T} f` of `p` in the orthonormal basis.
    pub fn expand(&self, p: &Polynomial) -> Result<Vec<f64>, BasisError> {
        let f = DVector::from_vec(p.coeff_vector(&self.basis)?);
        let ft = self
            .d
            .transpose()
            .solve_upper_triangular(&f)
            .expect("positive diagonal");
        Ok(ft.iter().copied().collect())
    }

    /// The polynomial `sum_alpha c_alpha T_alpha`.
    pub fn combination(&self, coeffs: &[f64]) -> Result<Polynomial, BasisError> {
        self.check_len(coeffs.len())?;
        let c = DVector::from_column_slice(coeffs);
        let mono = self.d.transpose() * c;
        Ok(Polynomial::from_coeff_vector(&self.basis, mono.as_slice())?)
    }

    /// `K_t(x, y) = sum_alpha T_alpha(x) T_alpha(y)`.
    pub fn cd_kernel(&self, x: &[f64], y: &[f64]) -> Result<f64, BasisError> {
        let tx = self.eval_all(x)?;
        let ty = self.eval_all(y)?;
        Ok(tx.iter().zip(&ty).map(|(a, b)| a * b).sum())
    }

    pub fn kernel_eval(&self, x: &[f64], y: &[f64]) -> Result<CdKernelEval, BasisError> {
        Ok(CdKernelEval {
            x: x.to_vec(),
            y: y.to_vec(),
            t: self.t(),
            value: self.cd_kernel(x, y)?,
        })
    }

    /// The polynomial `y -> K_t(x, y)`.
    pub fn kernel_polynomial(&self, x: &[f64]) -> Result<Polynomial, BasisError> {
        let tx = self.eval_all(x)?;
        self.combination(&tx)
    }

    /// `int p(y) K_t(x, y) dmu(y)` computed with exact moments; equals
    /// `p(x)` whenever `deg p <= t`.
    pub fn reproduce(&self, p: &Polynomial, x: &[f64]) -> Result<f64, BasisError> {
        if p.degree() > self.t() {
            return Err(PolyError::DegreeOverflow {
                degree: p.degree(),
                bound: self.t(),
            }
            .into());
        }
        let k = self.kernel_polynomial(x)?;
        let prod = p.try_mul(&k)?;
        Ok(integrate(&prod, &self.moments)?)
    }

    /// Christoffel function `1 / K_t(x, x)`.
    pub fn christoffel(&self, x: &[f64]) -> Result<f64, BasisError> {
        Ok(1.0 / self.cd_kernel(x, x)?)
    }
}

/// Free-function form of [`OrthoBasis::build`].
pub fn build_basis(measure: &ReferenceMeasure, t: u32) -> Result<OrthoBasis, BasisError> {
    OrthoBasis::build(measure, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::dirac_moments;
    use crate::polyring::MultiIndex;

    fn legendre(t: u32) -> OrthoBasis {
        OrthoBasis::build(&ReferenceMeasure::symmetric_box(1).unwrap(), t).unwrap()
    }

    #[test]
    fn legendre_degree_one() {
        let b = legendre(1);
        let d = b.change_of_basis();
        assert_eq!(d[(0, 0)], 1.0);
        assert_eq!(d[(1, 0)], 0.0);
        assert!((d[(1, 1)] - 3f64.sqrt()).abs() < 1e-15);
        // int T1^2 dmu = 3 * 1/3, int T1 dmu = 0
        let t1 = b.polynomial(1);
        let m = b.moments();
        assert!((integrate(&(&t1 * &t1), m).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(integrate(&t1, m).unwrap(), 0.0);
    }

    #[test]
    fn legendre_degree_two_matches_gram_schmidt() {
        // Gram-Schmidt of {1, x, x^2} under dx/2 on [-1, 1]
        let inner = |p: &[f64], q: &[f64]| {
            let mut s = 0.0;
            for (i, a) in p.iter().enumerate() {
                for (j, b) in q.iter().enumerate() {
                    if (i + j) % 2 == 0 {
                        s += a * b / (i + j + 1) as f64;
                    }
                }
            }
            s
        };
        let mut ortho: Vec<Vec<f64>> = Vec::new();
        for k in 0..3 {
            let mut v = vec![0.0; 3];
            v[k] = 1.0;
            for u in &ortho {
                let c = inner(&v, u);
                for i in 0..3 {
                    v[i] -= c * u[i];
                }
            }
            let nrm = inner(&v, &v).sqrt();
            ortho.push(v.iter().map(|c| c / nrm).collect());
        }
        let b = legendre(2);
        for (j, v) in ortho[2].iter().enumerate() {
            assert!((b.change_of_basis()[(2, j)] - v).abs() < 1e-13);
        }
        let s5 = 5f64.sqrt();
        assert!((ortho[2][2] - 1.5 * s5).abs() < 1e-13);
        assert!((ortho[2][0] + 0.5 * s5).abs() < 1e-13);
    }

    #[test]
    fn counting_degree_one_is_identity() {
        let m = ReferenceMeasure::counting_hypercube(2).unwrap();
        let b = OrthoBasis::build(&m, 1).unwrap();
        assert_eq!(b.change_of_basis(), &DMatrix::identity(3, 3));
        let c = OrthoBasis::build_cholesky(&m, 1, BasisOptions::default()).unwrap();
        assert!((c.change_of_basis() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-15);
    }

    #[test]
    fn counting_degree_two_is_singular() {
        let m = ReferenceMeasure::counting_hypercube(2).unwrap();
        assert!(matches!(
            OrthoBasis::build(&m, 2),
            Err(BasisError::Singular { degree: 2, .. })
        ));
        assert!(matches!(
            OrthoBasis::build_cholesky(&m, 2, BasisOptions::default()),
            Err(BasisError::Singular { degree: 2, .. })
        ));
    }

    #[test]
    fn degree_cap() {
        let m = ReferenceMeasure::symmetric_box(1).unwrap();
        assert_eq!(
            OrthoBasis::build(&m, 9).unwrap_err(),
            BasisError::DegreeCap { t: 9, max: 8 }
        );
    }

    #[test]
    fn dirac_coords_are_basis_values() {
        let b = OrthoBasis::build(&ReferenceMeasure::symmetric_box(2).unwrap(), 3).unwrap();
        let xi = [0.3, -0.8];
        let sigma = b.to_ortho_coords(&dirac_moments(&xi, 3).unwrap()).unwrap();
        let tx = b.eval_all(&xi).unwrap();
        for (s, t) in sigma.iter().zip(&tx) {
            assert!((s - t).abs() < 1e-13);
        }
        let mu = b.to_ortho_coords(&b.moments().truncate(3)).unwrap();
        assert!((mu[0] - 1.0).abs() < 1e-14);
        assert!(mu[1..].iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn kernel_and_christoffel_at_endpoint() {
        let b = legendre(2);
        assert!((b.cd_kernel(&[-1.0], &[-1.0]).unwrap() - 9.0).abs() < 1e-12);
        assert!((b.christoffel(&[-1.0]).unwrap() - 1.0 / 9.0).abs() < 1e-14);
        let b0 = legendre(0);
        assert_eq!(b0.christoffel(&[0.4]).unwrap(), 1.0);
    }

    #[test]
    fn reproduce_examples() {
        let b = legendre(2);
        let x = Polynomial::var(1, 0);
        assert!((b.reproduce(&x, &[0.7]).unwrap() - 0.7).abs() < 1e-14);
        let one = Polynomial::constant(1, 1.0);
        assert!((b.reproduce(&one, &[-0.2]).unwrap() - 1.0).abs() < 1e-14);
        let cubic = Polynomial::monomial(MultiIndex::new(vec![3]), 1.0);
        assert!(b.reproduce(&cubic, &[0.0]).is_err());
    }

    #[test]
    fn size_and_dimension_errors() {
        let b = legendre(2);
        assert!(b.eval_all(&[0.0, 1.0]).is_err());
        assert!(b.from_ortho_coords(&[1.0]).is_err());
        let y = dirac_moments(&[0.5], 3).unwrap();
        assert!(matches!(
            b.to_ortho_coords(&y),
            Err(BasisError::SizeMismatch { expected: 3, found: 4 })
        ));
    }
}
