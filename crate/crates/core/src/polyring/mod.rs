//! Sparse multivariate polynomials over `f64` and the graded monomial index.
//!
//! Every dense vector or matrix indexed by monomials in this crate uses the
//! graded lexicographic order of [`MultiIndex`]: total degree first, then
//! larger leading exponents first, so that `1, x1, x2, x1^2, x1 x2, x2^2, ...`.

mod parse;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

pub use parse::{collect_identifiers, parse_polynomial, VarTable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("degree {degree} exceeds basis degree {bound}")]
    DegreeOverflow { degree: u32, bound: u32 },
    #[error("vector length {found} does not match basis size {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("unknown variable `{name}` at column {column}")]
    UnknownVariable { name: String, column: usize },
}

/// Exponent vector `alpha` of a monomial `x^alpha`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The unit index `e_i`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Componentwise sum, i.e. the exponent of `x^self * x^other`.
    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `x^alpha` evaluated at `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }

    /// Human-readable label such as `x1^2*x3`, or `1` for the zero index.
    pub fn label(&self) -> String {
        if self.is_zero() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        for (i, &e) in self.0.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(format!("x{}", i + 1)),
                _ => parts.push(format!("x{}^{}", i + 1, e)),
            }
        }
        parts.join("*")
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All multi-indices `|alpha| <= t` in `n` variables, in graded-lex order.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    n: usize,
    t: u32,
    indices: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
}

impl PartialEq for MonomialBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.t == other.t
    }
}

impl MonomialBasis {
    pub fn new(n: usize, t: u32) -> Result<Self, PolyError> {
        enumerate_basis(n, t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, i: usize) -> &MultiIndex {
        &self.indices[i]
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.position.get(alpha).copied()
    }

    /// Number of indices of degree at most `s` (a prefix of the ordering).
    pub fn prefix_len(&self, s: u32) -> usize {
        binomial(self.n as u64 + s as u64, s as u64) as usize
    }

    /// The vector `v_t(x) = (x^alpha)_alpha`.
    pub fn eval_monomials(&self, x: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|a| a.eval(x)).collect()
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

fn compositions(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if prefix.len() + 1 == n {
        prefix.push(d);
        out.push(MultiIndex(prefix.clone()));
        prefix.pop();
        return;
    }
    for first in (0..=d).rev() {
        prefix.push(first);
        compositions(n, d - first, prefix, out);
        prefix.pop();
    }
}

/// Enumerates `N^n_t` in graded-lex order.
pub fn enumerate_basis(n: usize, t: u32) -> Result<MonomialBasis, PolyError> {
    if n == 0 {
        return Err(PolyError::ZeroDimension);
    }
    let mut indices = Vec::with_capacity(binomial(n as u64 + t as u64, t as u64) as usize);
    let mut prefix = Vec::with_capacity(n);
    for d in 0..=t {
        compositions(n, d, &mut prefix, &mut indices);
    }
    let position = indices
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), i))
        .collect();
    Ok(MonomialBasis {
        n,
        t,
        indices,
        position,
    })
}

/// Sparse polynomial: exponent vector to coefficient, zero coefficients never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::monomial(MultiIndex::zero(n), c)
    }

    /// The coordinate polynomial `x_{i+1}` (zero-based `i`).
    pub fn var(n: usize, i: usize) -> Self {
        Self::monomial(MultiIndex::unit(n, i), 1.0)
    }

    pub fn monomial(alpha: MultiIndex, c: f64) -> Self {
        let mut p = Polynomial::zero(alpha.dim());
        p.add_term(alpha, c);
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Polynomial::zero(n);
        for (e, c) in terms {
            if e.len() != n {
                return Err(PolyError::DimensionMismatch {
                    expected: n,
                    found: e.len(),
                });
            }
            p.add_term(MultiIndex(e), c);
        }
        Ok(p)
    }

    fn add_term(&mut self, alpha: MultiIndex, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(alpha);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    /// Terms in increasing graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(a, &c)| (a, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Variables the polynomial actually depends on (zero-based).
    pub fn support_vars(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| self.terms.keys().any(|a| a.0[i] > 0))
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, PolyError> {
        self.check_dim(x.len())?;
        Ok(self.terms.iter().map(|(a, &c)| c * a.eval(x)).sum())
    }

    fn check_dim(&self, found: usize) -> Result<(), PolyError> {
        if found != self.n {
            return Err(PolyError::DimensionMismatch {
                expected: self.n,
                found,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_dim(other.n)?;
        let mut out = self.clone();
        for (a, &c) in &other.terms {
            out.add_term(a.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_dim(other.n)?;
        let mut out = self.clone();
        for (a, &c) in &other.terms {
            out.add_term(a.clone(), -c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_dim(other.n)?;
        let mut out = Polynomial::zero(self.n);
        for (a, &c) in &self.terms {
            for (b, &d) in &other.terms {
                out.add_term(a.plus(b), c * d);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        for (a, &c) in &self.terms {
            out.add_term(a.clone(), s * c);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut out = Polynomial::constant(self.n, 1.0);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Dense coefficient vector `f` with `<f, v(x)> = p(x)` in `basis`.
    pub fn coeff_vector(&self, basis: &MonomialBasis) -> Result<Vec<f64>, PolyError> {
        self.check_dim(basis.n())?;
        if self.degree() > basis.t() {
            return Err(PolyError::DegreeOverflow {
                degree: self.degree(),
                bound: basis.t(),
            });
        }
        let mut v = vec![0.0; basis.len()];
        for (a, &c) in &self.terms {
            let pos = basis.position(a).expect("degree-checked index in basis");
            v[pos] = c;
        }
        Ok(v)
    }

    /// Inverse of [`Polynomial::coeff_vector`].
    pub fn from_coeff_vector(basis: &MonomialBasis, v: &[f64]) -> Result<Polynomial, PolyError> {
        if v.len() != basis.len() {
            return Err(PolyError::LengthMismatch {
                expected: basis.len(),
                found: v.len(),
            });
        }
        let mut p = Polynomial::zero(basis.n());
        for (a, &c) in basis.indices().iter().zip(v) {
            p.add_term(a.clone(), c);
        }
        Ok(p)
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    /// Panics on dimension mismatch; see [`Polynomial::try_add`].
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.try_add(rhs).expect("polynomial dimension mismatch")
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.try_sub(rhs).expect("polynomial dimension mismatch")
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.try_mul(rhs).expect("polynomial dimension mismatch")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

/// Shortest round-trip text for a coefficient, without trailing `.0`.
fn fmt_coeff(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        format!("{c}")
    } else {
        format!("{c:?}")
    }
}

impl fmt::Display for Polynomial {
    /// Canonical text form, e.g. `1 - x1^2 + 2*x1*x2`; reparses with
    /// [`parse_polynomial`] over canonical variable names.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (a, &c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            if k == 0 {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else if c < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if a.is_zero() {
                write!(f, "{}", fmt_coeff(mag))?;
            } else if mag == 1.0 {
                write!(f, "{}", a.label())?;
            } else {
                write!(f, "{}*{}", fmt_coeff(mag), a.label())?;
            }
        }
        Ok(())
    }
}
