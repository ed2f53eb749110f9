use nalgebra::{DMatrix, DVector};

use super::extract::{certify_and_extract, Exactness};
use super::{HierarchyError, HierarchyOptions, SemialgebraicSet};
use crate::measures::{MomentSequence, ReferenceMeasure};
use crate::momentmat::localizing_entries;
use crate::orthobasis::OrthoBasis;
use crate::polyring::{MonomialBasis, MultiIndex, Polynomial};
use crate::sdp::linalg::min_eigenvalue;
use crate::sdp::{solve_sdp, LmiBlockBuilder, SdpProblem, SdpStatus};

/// Solver diagnostics for one relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverStats {
    pub status: SdpStatus,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
}

/// Putinar-type certificate read off the SDP dual:
/// `f - lambda = sum_j psi_j g_j + sum_k phi_k h_k`, `psi_j = v^T X_j v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SosCertificate {
    pub lambda: f64,
    /// `g_0 = 1` followed by the inequality constraints.
    pub weights: Vec<Polynomial>,
    /// Gram matrix of `psi_j` in the monomial basis of order `orders[j]`.
    pub gram: Vec<DMatrix<f64>>,
    pub orders: Vec<u32>,
    pub equalities: Vec<Polynomial>,
    pub equality_multipliers: Vec<Polynomial>,
}

impl SosCertificate {
    /// `psi_j = v_s(x)^T X_j v_s(x)`.
    pub fn sos_multiplier(&self, j: usize) -> Polynomial {
        let n = self.weights[j].n();
        let basis = MonomialBasis::new(n, self.orders[j]).expect("n >= 1");
        let x = &self.gram[j];
        let mut terms = Vec::new();
        for a in 0..basis.len() {
            for b in 0..basis.len() {
                terms.push((basis.get(a).plus(basis.get(b)).exponents().to_vec(), x[(a, b)]));
            }
        }
        Polynomial::from_terms(n, terms).expect("consistent dimension")
    }

    /// Largest coefficient of `f - lambda - sum psi_j g_j - sum phi_k h_k`.
    pub fn residual(&self, f: &Polynomial) -> f64 {
        let n = f.n();
        let mut r = f - &Polynomial::constant(n, self.lambda);
        for j in 0..self.weights.len() {
            r = &r - &(&self.sos_multiplier(j) * &self.weights[j]);
        }
        for (h, phi) in self.equalities.iter().zip(&self.equality_multipliers) {
            r = &r - &(phi * h);
        }
        r.max_abs_coeff()
    }

    /// Smallest eigenvalue over all Gram matrices.
    pub fn min_gram_eigenvalue(&self) -> f64 {
        self.gram
            .iter()
            .map(|x| min_eigenvalue(x).unwrap_or(f64::NAN))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Solution of the order-`t` moment relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundResult {
    pub t: u32,
    pub objective: Polynomial,
    /// `<f, y*>`.
    pub rho: f64,
    /// Optimal moments, order `2t`.
    pub moments: MomentSequence,
    /// `D y*` in the orthonormal basis of the reference measure (degree `2t`).
    pub sigma: Option<Vec<f64>>,
    /// Why `sigma` is absent, when it is.
    pub density_note: Option<String>,
    pub certificate: SosCertificate,
    pub exactness: Exactness,
    /// Smallest eigenvalue of each relaxation block at `y*` (moment matrix first).
    pub block_min_eigenvalues: Vec<f64>,
    pub solver: SolverStats,
}

/// Smallest admissible relaxation order: `max(ceil(deg f / 2), max_j d_j)`.
pub fn min_lower_order(f: &Polynomial, set: &SemialgebraicSet) -> u32 {
    f.degree().div_ceil(2).max(set.max_half_degree())
}

struct Relaxation {
    problem: SdpProblem,
    basis: MonomialBasis,
    weights: Vec<Polynomial>,
    orders: Vec<u32>,
    /// For each equality row after `y_0 = 1`: `(equality index, gamma)`.
    eq_rows: Vec<(usize, MultiIndex)>,
}

fn assemble(f: &Polynomial, set: &SemialgebraicSet, t: u32) -> Result<Relaxation, HierarchyError> {
    let n = set.n();
    let basis = MonomialBasis::new(n, 2 * t)?;
    let mut problem = SdpProblem::new(f.coeff_vector(&basis)?);
    let mut weights = vec![Polynomial::constant(n, 1.0)];
    weights.extend(set.inequalities().iter().cloned());
    let mut orders = Vec::with_capacity(weights.len());
    for g in &weights {
        let s = t - SemialgebraicSet::half_degree(g);
        let mut b = LmiBlockBuilder::new(basis.prefix_len(s));
        for e in localizing_entries(g, s, &basis)? {
            b.add(Some(e.var), e.row, e.col, e.coeff);
        }
        problem
            .add_block(b.finish().map_err(|source| HierarchyError::Sdp { t, source })?)
            .map_err(|source| HierarchyError::Sdp { t, source })?;
        orders.push(s);
    }
    problem
        .add_equality(vec![(0, 1.0)], 1.0)
        .map_err(|source| HierarchyError::Sdp { t, source })?;
    let mut eq_rows = Vec::new();
    for (k, h) in set.equalities().iter().enumerate() {
        let s = t - SemialgebraicSet::half_degree(h);
        let shifts = MonomialBasis::new(n, 2 * s)?;
        for gamma in shifts.indices() {
            let row: Vec<(usize, f64)> = h
                .terms()
                .map(|(delta, c)| (basis.position(&gamma.plus(delta)).expect("degree bounded"), c))
                .collect();
            problem
                .add_equality(row, 0.0)
                .map_err(|source| HierarchyError::Sdp { t, source })?;
            eq_rows.push((k, gamma.clone()));
        }
    }
    Ok(Relaxation {
        problem,
        basis,
        weights,
        orders,
        eq_rows,
    })
}

/// Assembles the order-`t` moment relaxation without solving it.
pub fn relaxation_problem(
    f: &Polynomial,
    set: &SemialgebraicSet,
    t: u32,
) -> Result<SdpProblem, HierarchyError> {
    check_inputs(f, set, t)?;
    Ok(assemble(f, set, t)?.problem)
}

fn check_inputs(f: &Polynomial, set: &SemialgebraicSet, t: u32) -> Result<(), HierarchyError> {
    if f.n() != set.n() {
        return Err(HierarchyError::DimensionMismatch {
            expected: set.n(),
            found: f.n(),
        });
    }
    let needed = min_lower_order(f, set);
    if t < needed {
        return Err(HierarchyError::OrderTooLow { t, needed });
    }
    Ok(())
}

/// Order-`t` moment relaxation: minimize `<f, y>` subject to `y_0 = 1`,
/// `M_{t-d_j}(g_j y) >= 0` and `M_{t-d_k}(h_k y) = 0`.
///
/// When `measure` is given, `sigma = D y*` is computed in its degree-`2t`
/// orthonormal basis.
pub fn lower_bound(
    f: &Polynomial,
    set: &SemialgebraicSet,
    t: u32,
    measure: Option<&ReferenceMeasure>,
    opts: &HierarchyOptions,
) -> Result<LowerBoundResult, HierarchyError> {
    check_inputs(f, set, t)?;
    let relax = assemble(f, set, t)?;
    let sol = solve_sdp(&relax.problem, &opts.sdp).map_err(|source| HierarchyError::Sdp { t, source })?;
    if sol.status != SdpStatus::Optimal {
        return Err(HierarchyError::SolverFailed {
            t,
            status: sol.status,
        });
    }

    let n = set.n();
    let mut multipliers: Vec<Vec<(Vec<u32>, f64)>> = vec![Vec::new(); set.equalities().len()];
    for ((k, gamma), &lam) in relax.eq_rows.iter().zip(&sol.eq_multipliers[1..]) {
        multipliers[*k].push((gamma.exponents().to_vec(), lam));
    }
    let equality_multipliers = multipliers
        .into_iter()
        .map(|terms| Polynomial::from_terms(n, terms))
        .collect::<Result<Vec<_>, _>>()?;
    let certificate = SosCertificate {
        lambda: sol.eq_multipliers[0],
        weights: relax.weights,
        gram: sol.dual_blocks.clone(),
        orders: relax.orders,
        equalities: set.equalities().to_vec(),
        equality_multipliers,
    };

    let yv = DVector::from_column_slice(&sol.y);
    let block_min_eigenvalues = relax
        .problem
        .blocks()
        .iter()
        .map(|b| min_eigenvalue(&b.eval(&yv)))
        .collect::<Result<Vec<_>, _>>()?;

    let moments = MomentSequence::new(relax.basis, sol.y.clone())?;
    let (sigma, density_note) = match measure {
        None => (None, Some("no reference measure declared".to_string())),
        Some(m) if m.n() != n => (
            None,
            Some(format!("measure dimension {} differs from {n}", m.n())),
        ),
        Some(m) => match OrthoBasis::build(m, 2 * t).and_then(|b| b.to_ortho_coords(&moments)) {
            Ok(s) => (Some(s), None),
            Err(e) => (None, Some(e.to_string())),
        },
    };

    let mut result = LowerBoundResult {
        t,
        objective: f.clone(),
        rho: sol.primal_objective,
        moments,
        sigma,
        density_note,
        certificate,
        exactness: Exactness::NotCertified { ranks: Vec::new() },
        block_min_eigenvalues,
        solver: SolverStats {
            status: sol.status,
            iterations: sol.iterations,
            primal_objective: sol.primal_objective,
            dual_objective: sol.dual_objective,
            primal_residual: sol.primal_residual,
            dual_residual: sol.dual_residual,
            gap: sol.gap,
        },
    };
    result.exactness = certify_and_extract(&result, set, opts)?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{parse_polynomial, VarTable};

    fn poly(text: &str, n: usize) -> Polynomial {
        parse_polynomial(text, &VarTable::canonical(n)).unwrap()
    }

    fn interval() -> SemialgebraicSet {
        SemialgebraicSet::box_set(&[-1.0], &[1.0]).unwrap()
    }

    #[test]
    fn linear_on_interval() {
        let r = lower_bound(&poly("x1", 1), &interval(), 1, None, &HierarchyOptions::default()).unwrap();
        assert!((r.rho + 1.0).abs() < 1e-6, "{}", r.rho);
        assert!(r.certificate.residual(&poly("x1", 1)) < 1e-6);
        assert!(r.block_min_eigenvalues.iter().all(|&l| l > -1e-8));
        assert!(r.sigma.is_none());
    }

    #[test]
    fn square_on_interval_is_dirac_at_zero() {
        let r = lower_bound(&poly("x1^2", 1), &interval(), 1, None, &HierarchyOptions::default()).unwrap();
        assert!(r.rho.abs() < 1e-6);
        // y* = (1, 0, 0)
        assert!(r.moments.values()[1].abs() < 1e-4);
        assert!(r.moments.values()[2].abs() < 1e-6);
        // grid oracle for the true minimum
        let grid_min = (0..=2000)
            .map(|i| -1.0 + i as f64 / 1000.0)
            .map(|x: f64| x * x)
            .fold(f64::INFINITY, f64::min);
        assert!((r.rho - grid_min).abs() < 1e-6);
    }

    #[test]
    fn constant_objective() {
        for t in 1..=3 {
            let r = lower_bound(
                &poly("2.5", 1),
                &interval(),
                t,
                None,
                &HierarchyOptions::default(),
            )
            .unwrap();
            assert!((r.rho - 2.5).abs() < 1e-7, "t={t}: {}", r.rho);
        }
    }

    #[test]
    fn order_preconditions() {
        let opts = HierarchyOptions::default();
        assert!(matches!(
            lower_bound(&poly("x1^4", 1), &interval(), 1, None, &opts),
            Err(HierarchyError::OrderTooLow { t: 1, needed: 2 })
        ));
        assert!(matches!(
            lower_bound(&poly("x1", 2), &interval(), 1, None, &opts),
            Err(HierarchyError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn equality_constraints_certificate() {
        let set = SemialgebraicSet::hypercube(2);
        let f = poly("x1 x2", 2);
        let r = lower_bound(&f, &set, 1, None, &HierarchyOptions::default()).unwrap();
        assert!((r.rho + 1.0).abs() < 1e-6);
        assert!(r.certificate.residual(&f) < 1e-6);
        assert!(r.certificate.min_gram_eigenvalue() > -1e-8);
    }
}
