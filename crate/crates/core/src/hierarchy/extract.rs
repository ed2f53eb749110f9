use nalgebra::DMatrix;

use super::lower::LowerBoundResult;
use super::{HierarchyError, HierarchyOptions, SemialgebraicSet};
use crate::measures::MomentSequence;
use crate::momentmat::moment_matrix;
use crate::polyring::{MonomialBasis, MultiIndex, Polynomial};
use crate::sdp::linalg::{numerical_rank, sym_eig};

/// An extracted global minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimizer {
    pub point: Vec<f64>,
    /// `f(point)`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Exactness {
    /// Flat truncation held at `order` with `rank` atoms.
    Certified {
        minimizers: Vec<Minimizer>,
        rank: usize,
        order: u32,
        ranks: Vec<usize>,
    },
    /// `ranks[s]` is the numerical rank of `M_s(y*)`, `s = 0..=t`.
    NotCertified { ranks: Vec<usize> },
}

impl Exactness {
    pub fn is_certified(&self) -> bool {
        matches!(self, Exactness::Certified { .. })
    }

    pub fn minimizers(&self) -> &[Minimizer] {
        match self {
            Exactness::Certified { minimizers, .. } => minimizers,
            Exactness::NotCertified { .. } => &[],
        }
    }

    pub fn ranks(&self) -> &[usize] {
        match self {
            Exactness::Certified { ranks, .. } | Exactness::NotCertified { ranks } => ranks,
        }
    }
}

/// Flat-truncation test on `r.moments` followed by minimizer extraction.
pub fn certify_and_extract(
    r: &LowerBoundResult,
    set: &SemialgebraicSet,
    opts: &HierarchyOptions,
) -> Result<Exactness, HierarchyError> {
    extract_from_moments(&r.moments, &r.objective, r.rho, set, opts)
}

/// Same as [`certify_and_extract`] for an arbitrary moment sequence `y` of
/// even order `2t` with claimed value `rho`.
///
/// Flatness at order `s` means `rank M_s(y) = rank M_{s-d}(y)` with
/// `d = max(1, max_j d_j)`; the largest such `s <= t` is used.
pub fn extract_from_moments(
    y: &MomentSequence,
    f: &Polynomial,
    rho: f64,
    set: &SemialgebraicSet,
    opts: &HierarchyOptions,
) -> Result<Exactness, HierarchyError> {
    let t = y.t() / 2;
    let mut ranks = Vec::with_capacity(t as usize + 1);
    for s in 0..=t {
        ranks.push(numerical_rank(&moment_matrix(y, s)?, opts.rank_tol)?);
    }
    let d = set.max_half_degree().max(1);
    let flat = (d..=t)
        .rev()
        .find(|&s| ranks[s as usize] == ranks[(s - d) as usize]);
    let Some(s) = flat else {
        return Ok(Exactness::NotCertified { ranks });
    };
    let rank = ranks[s as usize];
    let candidates = atoms(y, s - 1, rank)?;

    let mut minimizers: Vec<Minimizer> = Vec::new();
    for point in candidates {
        let value = f.eval(&point)?;
        if set.min_violation(&point)? < -opts.feas_tol || (value - rho).abs() > opts.opt_tol {
            continue;
        }
        let duplicate = minimizers.iter().any(|m| distance(&m.point, &point) < opts.merge_dist);
        if !duplicate {
            minimizers.push(Minimizer { point, value });
        }
    }
    if minimizers.is_empty() {
        return Ok(Exactness::NotCertified { ranks });
    }
    Ok(Exactness::Certified {
        minimizers,
        rank,
        order: s,
        ranks,
    })
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Atoms of a flat moment sequence from the multiplication operators on the
/// range of `M_s(y)` (`s = order of the localizing rows`).
fn atoms(y: &MomentSequence, s: u32, rank: usize) -> Result<Vec<Vec<f64>>, HierarchyError> {
    let n = y.n();
    let rows = MonomialBasis::new(n, s)?;
    let k = rows.len();
    let m0 = moment_matrix(y, s)?;
    let (vals, vecs) = sym_eig(&m0)?;
    let rank = rank.min(k);
    // top `rank` eigenpairs, scaled: columns u_i / sqrt(lambda_i)
    let scaled = DMatrix::from_fn(k, rank, |r, c| {
        let idx = k - 1 - c;
        vecs[(r, idx)] / vals[idx].max(f64::MIN_POSITIVE).sqrt()
    });
    let mut ops = Vec::with_capacity(n);
    for i in 0..n {
        let ei = MultiIndex::unit(n, i);
        let h = DMatrix::from_fn(k, k, |a, b| {
            let alpha = rows.get(a).plus(rows.get(b)).plus(&ei);
            y.get(&alpha).expect("order 2s + 1 <= 2t")
        });
        let op = scaled.transpose() * h * &scaled;
        ops.push((&op + op.transpose()) * 0.5);
    }
    // generic combination with fixed, well-separated weights
    let mut comb = DMatrix::zeros(rank, rank);
    for (i, op) in ops.iter().enumerate() {
        let w = 1.0 + ((i as f64 + 1.0) * 0.618_033_988_749_895).fract();
        comb += op * w;
    }
    let (_, q) = sym_eig(&comb)?;
    let points = (0..rank)
        .map(|c| {
            let qc = q.column(c);
            ops.iter().map(|op| (qc.transpose() * op * qc)[(0, 0)]).collect()
        })
        .collect();
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{dirac_moments, ReferenceMeasure};

    fn opts() -> HierarchyOptions {
        HierarchyOptions::default()
    }

    #[test]
    fn two_atom_sequence() {
        let a = dirac_moments(&[0.5, -0.25], 4).unwrap();
        let b = dirac_moments(&[-0.75, 0.5], 4).unwrap();
        let y = a.combine(0.3, &b, 0.7);
        let set = SemialgebraicSet::box_set(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let f = Polynomial::constant(2, 0.0);
        let e = extract_from_moments(&y, &f, 0.0, &set, &opts()).unwrap();
        assert!(e.is_certified(), "{e:?}");
        assert_eq!(e.ranks(), &[1, 2, 2]);
        let mut pts: Vec<Vec<f64>> = e.minimizers().iter().map(|m| m.point.clone()).collect();
        pts.sort_by(|p, q| p[0].partial_cmp(&q[0]).unwrap());
        assert!(distance(&pts[0], &[-0.75, 0.5]) < 1e-10);
        assert!(distance(&pts[1], &[0.5, -0.25]) < 1e-10);
    }

    #[test]
    fn continuous_measure_not_flat() {
        let y = ReferenceMeasure::symmetric_box(1).unwrap().moments(6);
        let set = SemialgebraicSet::box_set(&[-1.0], &[1.0]).unwrap();
        let f = Polynomial::var(1, 0);
        let e = extract_from_moments(&y, &f, -1.0, &set, &opts()).unwrap();
        assert_eq!(e, Exactness::NotCertified { ranks: vec![1, 2, 3, 4] });
    }

    #[test]
    fn infeasible_atoms_filtered() {
        let y = dirac_moments(&[1.5], 4).unwrap();
        let set = SemialgebraicSet::box_set(&[-1.0], &[1.0]).unwrap();
        let f = Polynomial::var(1, 0);
        let e = extract_from_moments(&y, &f, 1.5, &set, &opts()).unwrap();
        assert!(!e.is_certified());
    }
}
