use std::collections::BTreeMap;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};

use super::SdpError;

/// Sparse symmetric matrix holding every structural nonzero (both triangles).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseSym {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt()
    }

    /// `<self, X>` for dense `X`.
    pub fn dot(&self, x: &DMatrix<f64>) -> f64 {
        self.entries.iter().map(|&(i, j, v)| v * x[(i, j)]).sum()
    }

    pub fn add_scaled_to(&self, s: f64, out: &mut DMatrix<f64>) {
        for &(i, j, v) in &self.entries {
            out[(i, j)] += s * v;
        }
    }
}

/// Affine matrix map `y -> F_0 + sum_k y_k F_k` required to be PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiBlock {
    dim: usize,
    constant: SparseSym,
    /// `(variable, F_k)`, variables strictly increasing.
    terms: Vec<(usize, SparseSym)>,
}

/// Accumulates raw entries of an [`LmiBlock`]; duplicates are summed.
#[derive(Debug, Clone, Default)]
pub struct LmiBlockBuilder {
    dim: usize,
    entries: BTreeMap<(Option<usize>, usize, usize), f64>,
}

impl LmiBlockBuilder {
    pub fn new(dim: usize) -> Self {
        LmiBlockBuilder {
            dim,
            entries: BTreeMap::new(),
        }
    }

    /// Adds `value` at `(i, j)` of `F_var` (`None` for the constant term).
    pub fn add(&mut self, var: Option<usize>, i: usize, j: usize, value: f64) -> &mut Self {
        *self.entries.entry((var, i, j)).or_insert(0.0) += value;
        self
    }

    /// Adds `value` at `(i, j)` and `(j, i)`.
    pub fn add_sym(&mut self, var: Option<usize>, i: usize, j: usize, value: f64) -> &mut Self {
        self.add(var, i, j, value);
        if i != j {
            self.add(var, j, i, value);
        }
        self
    }

    pub fn finish(self) -> Result<LmiBlock, SdpError> {
        let mut constant = SparseSym::default();
        let mut terms: BTreeMap<usize, SparseSym> = BTreeMap::new();
        for (&(var, i, j), &v) in &self.entries {
            if i >= self.dim || j >= self.dim {
                return Err(SdpError::InvalidProblem(format!(
                    "entry ({i}, {j}) outside a block of size {}",
                    self.dim
                )));
            }
            let mirror = self.entries.get(&(var, j, i)).copied().unwrap_or(0.0);
            if (mirror - v).abs() > 1e-12 * v.abs().max(1.0) {
                return Err(SdpError::InvalidProblem(format!(
                    "coefficient matrix of {var:?} is not symmetric at ({i}, {j})"
                )));
            }
            if v == 0.0 {
                continue;
            }
            match var {
                None => constant.entries.push((i, j, v)),
                Some(k) => terms.entry(k).or_default().entries.push((i, j, v)),
            }
        }
        Ok(LmiBlock {
            dim: self.dim,
            constant,
            terms: terms.into_iter().collect(),
        })
    }
}

impl LmiBlock {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(&self) -> &SparseSym {
        &self.constant
    }

    pub fn terms(&self) -> &[(usize, SparseSym)] {
        &self.terms
    }

    /// `F_0 + sum_k y_k F_k`.
    pub fn eval(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        self.constant.add_scaled_to(1.0, &mut m);
        self.add_linear(y, &mut m);
        m
    }

    /// Adds `sum_k y_k F_k` into `out`.
    pub fn add_linear(&self, y: &DVector<f64>, out: &mut DMatrix<f64>) {
        for (k, f) in &self.terms {
            f.add_scaled_to(y[*k], out);
        }
    }

    /// Adds `(<F_k, X>)_k` into `out`.
    pub fn add_adjoint(&self, x: &DMatrix<f64>, out: &mut DVector<f64>) {
        for (k, f) in &self.terms {
            out[*k] += f.dot(x);
        }
    }
}

/// `min c^T y  s.t.  A y = b,  F_j(y) >= 0` for every block `j`.
///
/// Its dual, `max b^T lambda - sum_j <F_0j, X_j>` subject to
/// `A^T lambda + sum_j (<F_kj, X_j>)_k = c` and `X_j >= 0`, is what the
/// solver reports as dual multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    num_vars: usize,
    objective: Vec<f64>,
    blocks: Vec<LmiBlock>,
    eq_rows: Vec<Vec<(usize, f64)>>,
    eq_rhs: Vec<f64>,
}

impl SdpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        SdpProblem {
            num_vars: objective.len(),
            objective,
            blocks: Vec::new(),
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
        }
    }

    pub fn add_block(&mut self, block: LmiBlock) -> Result<(), SdpError> {
        if let Some((k, _)) = block.terms.last() {
            if *k >= self.num_vars {
                return Err(SdpError::InvalidProblem(format!(
                    "block references variable {k} of {}",
                    self.num_vars
                )));
            }
        }
        self.blocks.push(block);
        Ok(())
    }

    /// Adds the linear equality `sum coeff * y[var] = rhs`.
    pub fn add_equality(&mut self, row: Vec<(usize, f64)>, rhs: f64) -> Result<(), SdpError> {
        if let Some(&(k, _)) = row.iter().find(|(k, _)| *k >= self.num_vars) {
            return Err(SdpError::InvalidProblem(format!(
                "equality references variable {k} of {}",
                self.num_vars
            )));
        }
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn blocks(&self) -> &[LmiBlock] {
        &self.blocks
    }

    pub fn num_equalities(&self) -> usize {
        self.eq_rows.len()
    }

    pub fn equality_rows(&self) -> &[Vec<(usize, f64)>] {
        &self.eq_rows
    }

    pub fn equality_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }

    /// Dense equality matrix `A`.
    pub fn equality_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.eq_rows.len(), self.num_vars);
        for (r, row) in self.eq_rows.iter().enumerate() {
            for &(k, v) in row {
                a[(r, k)] += v;
            }
        }
        a
    }

    /// Plain-text dump: a header with sizes, the objective, the equality
    /// rows, then one `block var i j value` line per upper-triangle nonzero
    /// (`var = 0` is the constant term, variables are 1-based).
    pub fn write_dump<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "vars {}", self.num_vars)?;
        writeln!(out, "blocks {}", self.blocks.len())?;
        let dims: Vec<String> = self.blocks.iter().map(|b| b.dim.to_string()).collect();
        writeln!(out, "dims {}", dims.join(" "))?;
        writeln!(out, "equalities {}", self.eq_rows.len())?;
        let c: Vec<String> = self.objective.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "c {}", c.join(" "))?;
        for (row, rhs) in self.eq_rows.iter().zip(&self.eq_rhs) {
            let terms: Vec<String> = row.iter().map(|(k, v)| format!("{}:{v:e}", k + 1)).collect();
            writeln!(out, "eq {rhs:e} {}", terms.join(" "))?;
        }
        for (b, block) in self.blocks.iter().enumerate() {
            let constant = std::iter::once((0usize, &block.constant));
            let rest = block.terms.iter().map(|(k, f)| (k + 1, f));
            for (var, f) in constant.chain(rest) {
                for &(i, j, v) in &f.entries {
                    if i <= j {
                        writeln!(out, "{} {var} {} {} {v:e}", b + 1, i + 1, j + 1)?;
                    }
                }
            }
        }
        Ok(())
    }
}
