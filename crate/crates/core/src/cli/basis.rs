use serde::Serialize;

use crate::measures::ReferenceMeasure;
use crate::orthobasis::{BasisOptions, OrthoBasis};

use super::CliError;

/// `uniform_box:-1..1,0..2`, `uniform_box:2` (the box `[-1, 1]^2`) or
/// `counting_hypercube:2`.
pub fn parse_measure_spec(spec: &str) -> Result<ReferenceMeasure, CliError> {
    let bad = || CliError::MeasureSpec(spec.to_string());
    let (kind, arg) = spec.split_once(':').ok_or_else(bad)?;
    match kind.trim() {
        "counting_hypercube" => {
            let n: usize = arg.trim().parse().map_err(|_| bad())?;
            Ok(ReferenceMeasure::counting_hypercube(n)?)
        }
        "uniform_box" if !arg.contains("..") => {
            let n: usize = arg.trim().parse().map_err(|_| bad())?;
            Ok(ReferenceMeasure::symmetric_box(n)?)
        }
        "uniform_box" => {
            let mut lo = Vec::new();
            let mut hi = Vec::new();
            for part in arg.split(',') {
                let (a, b) = part.split_once("..").ok_or_else(bad)?;
                lo.push(a.trim().parse::<f64>().map_err(|_| bad())?);
                hi.push(b.trim().parse::<f64>().map_err(|_| bad())?);
            }
            Ok(ReferenceMeasure::uniform_box(lo, hi)?)
        }
        _ => Err(bad()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSample {
    pub x: Vec<f64>,
    /// `K_t(x, x)`.
    pub value: f64,
}

/// Monomial coefficients of every `T_alpha` plus diagonal kernel samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisTable {
    pub measure: ReferenceMeasure,
    pub t: u32,
    pub monomials: Vec<String>,
    /// Row `i` holds the coefficients of `T_{monomials[i]}`.
    pub coefficients: Vec<Vec<f64>>,
    pub kernel: Vec<KernelSample>,
}

/// Builds the degree-`t` basis and samples `K_t(x, x)` on `points` nodes per
/// axis of the bounding box.
pub fn basis_table(measure: &ReferenceMeasure, t: u32, points: usize) -> Result<BasisTable, CliError> {
    let basis = OrthoBasis::build_with(measure, t, BasisOptions::default())?;
    let monomials = basis.monomials().indices().iter().map(|a| a.label()).collect();
    let d = basis.change_of_basis();
    let coefficients = (0..d.nrows())
        .map(|i| d.row(i).iter().copied().collect())
        .collect();
    let (lo, hi) = measure.bounding_box();
    let mut kernel = Vec::new();
    let mut idx = vec![0usize; lo.len()];
    let points = points.max(1);
    loop {
        let x: Vec<f64> = idx
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                if points == 1 {
                    0.5 * (lo[i] + hi[i])
                } else {
                    lo[i] + (hi[i] - lo[i]) * k as f64 / (points - 1) as f64
                }
            })
            .collect();
        let value = basis.cd_kernel(&x, &x)?;
        kernel.push(KernelSample { x, value });
        // odometer over the grid, last axis fastest
        let mut axis = lo.len();
        loop {
            if axis == 0 {
                return Ok(BasisTable {
                    measure: measure.clone(),
                    t,
                    monomials,
                    coefficients,
                    kernel,
                });
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < points {
                break;
            }
            idx[axis] = 0;
        }
    }
}

impl BasisTable {
    /// Two CSV sections separated by a blank line: coefficients, then kernel samples.
    pub fn to_csv(&self) -> String {
        let mut s = format!("basis,{}\n", self.monomials.join(","));
        for (label, row) in self.monomials.iter().zip(&self.coefficients) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            s.push_str(&format!("T[{label}],{}\n", cells.join(",")));
        }
        s.push('\n');
        let n = self.kernel.first().map_or(0, |k| k.x.len());
        let mut head: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        head.push("kernel".into());
        s.push_str(&head.join(","));
        s.push('\n');
        for k in &self.kernel {
            let mut cells: Vec<String> = k.x.iter().map(|v| format!("{v:e}")).collect();
            cells.push(format!("{:e}", k.value));
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}
