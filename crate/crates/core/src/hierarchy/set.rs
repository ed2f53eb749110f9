use crate::polyring::{PolyError, Polynomial};

/// `B = {x : g_j(x) >= 0, h_k(x) = 0}`; the weight `g_0 = 1` is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct SemialgebraicSet {
    n: usize,
    inequalities: Vec<Polynomial>,
    equalities: Vec<Polynomial>,
    box_bounds: Option<(Vec<f64>, Vec<f64>)>,
}

impl SemialgebraicSet {
    /// All of `R^n` (no constraints yet).
    pub fn new(n: usize) -> Self {
        SemialgebraicSet {
            n,
            inequalities: Vec::new(),
            equalities: Vec::new(),
            box_bounds: None,
        }
    }

    /// The box `prod [lo_i, hi_i]` as `(x_i - lo_i)(hi_i - x_i) >= 0`.
    pub fn box_set(lo: &[f64], hi: &[f64]) -> Result<Self, PolyError> {
        if lo.len() != hi.len() {
            return Err(PolyError::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        let n = lo.len();
        let mut set = SemialgebraicSet::new(n);
        for i in 0..n {
            let x = Polynomial::var(n, i);
            let left = &x - &Polynomial::constant(n, lo[i]);
            let right = &Polynomial::constant(n, hi[i]) - &x;
            set = set.with_inequality(&left * &right)?;
        }
        set.box_bounds = Some((lo.to_vec(), hi.to_vec()));
        Ok(set)
    }

    /// The vertices `{-1, 1}^n` as `x_i^2 - 1 = 0`.
    pub fn hypercube(n: usize) -> Self {
        let mut set = SemialgebraicSet::new(n);
        for i in 0..n {
            let x = Polynomial::var(n, i);
            set.equalities
                .push(&(&x * &x) - &Polynomial::constant(n, 1.0));
        }
        set.box_bounds = Some((vec![-1.0; n], vec![1.0; n]));
        set
    }

    pub fn with_inequality(mut self, g: Polynomial) -> Result<Self, PolyError> {
        self.check(&g)?;
        self.inequalities.push(g);
        Ok(self)
    }

    pub fn with_equality(mut self, h: Polynomial) -> Result<Self, PolyError> {
        self.check(&h)?;
        self.equalities.push(h);
        Ok(self)
    }

    /// Records the bounding box used to associate a reference measure.
    pub fn with_box_bounds(mut self, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        self.box_bounds = Some((lo, hi));
        self
    }

    fn check(&self, p: &Polynomial) -> Result<(), PolyError> {
        if p.n() != self.n {
            return Err(PolyError::DimensionMismatch {
                expected: self.n,
                found: p.n(),
            });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn inequalities(&self) -> &[Polynomial] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[Polynomial] {
        &self.equalities
    }

    pub fn box_bounds(&self) -> Option<(&[f64], &[f64])> {
        self.box_bounds
            .as_ref()
            .map(|(l, h)| (l.as_slice(), h.as_slice()))
    }

    /// `d = ceil(deg p / 2)`.
    pub fn half_degree(p: &Polynomial) -> u32 {
        p.degree().div_ceil(2)
    }

    /// `max_j d_j` over all constraints (0 without constraints).
    pub fn max_half_degree(&self) -> u32 {
        self.inequalities
            .iter()
            .chain(&self.equalities)
            .map(Self::half_degree)
            .max()
            .unwrap_or(0)
    }

    /// Membership up to `tol`: `g_j(x) >= -tol` and `|h_k(x)| <= tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool, PolyError> {
        for g in &self.inequalities {
            if g.eval(x)? < -tol {
                return Ok(false);
            }
        }
        for h in &self.equalities {
            if h.eval(x)?.abs() > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Smallest constraint value: `min(min_j g_j(x), min_k -|h_k(x)|)`.
    pub fn min_violation(&self, x: &[f64]) -> Result<f64, PolyError> {
        let mut worst = f64::INFINITY;
        for g in &self.inequalities {
            worst = worst.min(g.eval(x)?);
        }
        for h in &self.equalities {
            worst = worst.min(-h.eval(x)?.abs());
        }
        Ok(worst)
    }
}
