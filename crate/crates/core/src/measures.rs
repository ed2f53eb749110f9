//! Closed-form moments of the built-in reference measures, and point masses.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polyring::{MonomialBasis, MultiIndex, PolyError, Polynomial};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("box bounds must satisfy lo < hi in every coordinate (coordinate {0})")]
    EmptyBox(usize),
    #[error("box bounds have lengths {lo} and {hi}")]
    BoundsLength { lo: usize, hi: usize },
    #[error("polynomial of degree {degree} cannot be integrated against moments of order {order}")]
    DegreeOverflow { degree: u32, order: u32 },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Probability reference measure with closed-form moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceMeasure {
    /// Normalized Lebesgue measure on `prod [lo_i, hi_i]`.
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Normalized counting measure on `{-1, 1}^n`.
    CountingHypercube { n: usize },
}

impl ReferenceMeasure {
    pub fn uniform_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, MeasureError> {
        if lo.len() != hi.len() {
            return Err(MeasureError::BoundsLength {
                lo: lo.len(),
                hi: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(PolyError::ZeroDimension.into());
        }
        if let Some(i) = lo
            .iter()
            .zip(&hi)
            .position(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite())
        {
            return Err(MeasureError::EmptyBox(i));
        }
        Ok(ReferenceMeasure::UniformBox { lo, hi })
    }

    /// Uniform probability measure on `[-1, 1]^n`.
    pub fn symmetric_box(n: usize) -> Result<Self, MeasureError> {
        Self::uniform_box(vec![-1.0; n], vec![1.0; n])
    }

    pub fn counting_hypercube(n: usize) -> Result<Self, MeasureError> {
        if n == 0 {
            return Err(PolyError::ZeroDimension.into());
        }
        Ok(ReferenceMeasure::CountingHypercube { n })
    }

    pub fn n(&self) -> usize {
        match self {
            ReferenceMeasure::UniformBox { lo, .. } => lo.len(),
            ReferenceMeasure::CountingHypercube { n } => *n,
        }
    }

    /// Support consists of finitely many points.
    pub fn is_finite_support(&self) -> bool {
        matches!(self, ReferenceMeasure::CountingHypercube { .. })
    }

    /// Smallest box containing the support.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ReferenceMeasure::UniformBox { lo, hi } => (lo.clone(), hi.clone()),
            ReferenceMeasure::CountingHypercube { n } => (vec![-1.0; *n], vec![1.0; *n]),
        }
    }

    /// Univariate moment `int x_i^k dmu_i` of the coordinate marginal.
    pub fn coordinate_moment(&self, i: usize, k: u32) -> f64 {
        match self {
            ReferenceMeasure::UniformBox { lo, hi } => {
                let (a, b) = (lo[i], hi[i]);
                let e = k as i32 + 1;
                (b.powi(e) - a.powi(e)) / ((k as f64 + 1.0) * (b - a))
            }
            ReferenceMeasure::CountingHypercube { .. } => {
                if k.is_multiple_of(2) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Truncated moment sequence `(int x^alpha dmu)_{|alpha| <= t}`.
    pub fn moments(&self, t: u32) -> MomentSequence {
        let basis = MonomialBasis::new(self.n(), t).expect("measure dimension is positive");
        let values = basis
            .indices()
            .iter()
            .map(|a| {
                a.exponents()
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| self.coordinate_moment(i, k))
                    .product()
            })
            .collect();
        MomentSequence { basis, values }
    }

    pub fn label(&self) -> String {
        match self {
            ReferenceMeasure::UniformBox { lo, hi } => {
                let sides: Vec<String> = lo
                    .iter()
                    .zip(hi)
                    .map(|(l, h)| format!("[{l}, {h}]"))
                    .collect();
                format!("uniform_box {}", sides.join(" x "))
            }
            ReferenceMeasure::CountingHypercube { n } => format!("counting_hypercube {{-1,1}}^{n}"),
        }
    }
}

/// Convenience wrapper matching the library's free-function style.
pub fn moments(measure: &ReferenceMeasure, t: u32) -> MomentSequence {
    measure.moments(t)
}

/// Truncated sequence `y = (y_alpha)_{|alpha| <= t}` in graded-lex order.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    basis: MonomialBasis,
    values: Vec<f64>,
}

impl MomentSequence {
    pub fn new(basis: MonomialBasis, values: Vec<f64>) -> Result<Self, MeasureError> {
        if values.len() != basis.len() {
            return Err(PolyError::LengthMismatch {
                expected: basis.len(),
                found: values.len(),
            }
            .into());
        }
        Ok(MomentSequence { basis, values })
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn t(&self) -> u32 {
        self.basis.t()
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, alpha: &MultiIndex) -> Option<f64> {
        self.basis.position(alpha).map(|i| self.values[i])
    }

    /// Prefix of the sequence up to order `t`.
    pub fn truncate(&self, t: u32) -> MomentSequence {
        let t = t.min(self.t());
        let basis = MonomialBasis::new(self.n(), t).expect("positive dimension");
        let values = self.values[..basis.len()].to_vec();
        MomentSequence { basis, values }
    }

    /// `a * self + b * other`; both sequences must share the same basis.
    pub fn combine(&self, a: f64, other: &MomentSequence, b: f64) -> MomentSequence {
        assert_eq!(self.basis, other.basis, "moment sequences on different bases");
        MomentSequence {
            basis: self.basis.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }
}

/// Moments of the Dirac measure at `x`: `y_alpha = x^alpha`.
pub fn dirac_moments(x: &[f64], t: u32) -> Result<MomentSequence, MeasureError> {
    let basis = MonomialBasis::new(x.len(), t)?;
    let values = basis.eval_monomials(x);
    Ok(MomentSequence { basis, values })
}

/// The Riesz functional `<p, y> = sum_alpha p_alpha y_alpha`.
pub fn integrate(p: &Polynomial, y: &MomentSequence) -> Result<f64, MeasureError> {
    if p.n() != y.n() {
        return Err(PolyError::DimensionMismatch {
            expected: y.n(),
            found: p.n(),
        }
        .into());
    }
    if p.degree() > y.t() {
        return Err(MeasureError::DegreeOverflow {
            degree: p.degree(),
            order: y.t(),
        });
    }
    Ok(p.terms()
        .map(|(a, c)| c * y.get(a).expect("degree-checked index"))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Gauss-Legendre (5 point) quadrature on [a, b], used as an
    /// independent check of the closed-form moments.
    fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let nodes = [
            (0.0, 128.0 / 225.0),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.906_179_845_938_664, 0.236_926_885_056_189_08),
            (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
        ];
        let panels = 64;
        let h = (b - a) / panels as f64;
        let mut s = 0.0;
        for k in 0..panels {
            let (l, r) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            let (c, w) = ((l + r) / 2.0, (r - l) / 2.0);
            for (x, wt) in nodes {
                s += wt * w * f(c + w * x);
            }
        }
        s
    }

    #[test]
    fn uniform_symmetric_moments() {
        let m = ReferenceMeasure::symmetric_box(1).unwrap();
        let y = m.moments(4);
        for (k, &v) in y.values().iter().enumerate() {
            let oracle = quad(|x| x.powi(k as i32), -1.0, 1.0) / 2.0;
            assert!((v - oracle).abs() < 1e-12, "k={k}: {v} vs {oracle}");
        }
        assert_eq!(y.values()[1], 0.0);
        assert_eq!(y.values()[3], 0.0);
        assert!((y.values()[2] - 1.0 / 3.0).abs() < 1e-15);
        assert!((y.values()[4] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn uniform_unit_interval_moments() {
        let m = ReferenceMeasure::uniform_box(vec![0.0], vec![1.0]).unwrap();
        let y = m.moments(3);
        for (k, &v) in y.values().iter().enumerate() {
            let oracle = quad(|x| x.powi(k as i32), 0.0, 1.0);
            assert!((v - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn counting_moments() {
        let m = ReferenceMeasure::counting_hypercube(2).unwrap();
        let y = m.moments(2);
        assert_eq!(y.values(), &[1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn box_validation() {
        assert_eq!(
            ReferenceMeasure::uniform_box(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap_err(),
            MeasureError::EmptyBox(1)
        );
        assert!(ReferenceMeasure::uniform_box(vec![0.0], vec![1.0, 2.0]).is_err());
        assert!(ReferenceMeasure::counting_hypercube(0).is_err());
    }

    #[test]
    fn dirac_examples() {
        assert_eq!(dirac_moments(&[0.0], 3).unwrap().values(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(dirac_moments(&[-1.0], 2).unwrap().values(), &[1.0, -1.0, 1.0]);
    }

    #[test]
    fn integrate_examples() {
        let m = ReferenceMeasure::symmetric_box(1).unwrap();
        let x2 = Polynomial::from_terms(1, [(vec![2], 1.0)]).unwrap();
        assert!((integrate(&x2, &m.moments(4)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let one = Polynomial::constant(1, 1.0);
        assert_eq!(integrate(&one, &m.moments(0)).unwrap(), 1.0);
        let x5 = Polynomial::from_terms(1, [(vec![5], 1.0)]).unwrap();
        assert!(matches!(
            integrate(&x5, &m.moments(4)),
            Err(MeasureError::DegreeOverflow { degree: 5, order: 4 })
        ));
    }

    #[test]
    fn box_moments_factor_and_match_tensor_quadrature() {
        let m = ReferenceMeasure::uniform_box(vec![-0.5, 1.0], vec![2.0, 3.0]).unwrap();
        let y = m.moments(4);
        for (a, &v) in y.basis().indices().iter().zip(y.values()) {
            let e = a.exponents();
            let qx = quad(|x| x.powi(e[0] as i32), -0.5, 2.0) / 2.5;
            let qy = quad(|x| x.powi(e[1] as i32), 1.0, 3.0) / 2.0;
            assert!((v - qx * qy).abs() < 1e-11 * (1.0 + v.abs()));
        }
    }
}
