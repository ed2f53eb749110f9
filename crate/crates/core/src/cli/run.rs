use std::io::Write;

use crate::hierarchy::{
    relaxation_problem, sweep_orders, Exactness, HierarchyOptions, LowerBoundResult, SweepRow,
};
use crate::orthobasis::OrthoBasis;

use super::problem::{ProblemFile, Relation};
use super::report::{DensityTable, OrderRow, ProblemSummary, RunReport, SolverDiagnostics, REPORT_VERSION};
use super::CliError;

/// Command-line overrides of a problem file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub tol: Option<f64>,
    pub max_order: Option<u32>,
    pub threads: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            tol: None,
            max_order: None,
            threads: 1,
        }
    }
}

fn hierarchy_options(pf: &ProblemFile, opts: &RunOptions) -> HierarchyOptions {
    let mut h = HierarchyOptions {
        threads: opts.threads.max(1),
        ..HierarchyOptions::default()
    };
    if let Some(tol) = opts.tol.or(pf.tol) {
        h.sdp.tol = tol;
    }
    if let Some(m) = pf.max_iter {
        h.sdp.max_iter = m;
    }
    h
}

fn orders(pf: &ProblemFile, opts: &RunOptions) -> Result<Vec<u32>, CliError> {
    let (a, mut b) = pf.orders;
    if let Some(m) = opts.max_order {
        b = b.min(m);
    }
    if b < a {
        return Err(CliError::Usage(format!(
            "maximum order {b} is below the first requested order {a}"
        )));
    }
    Ok((a..=b).collect())
}

/// `0` when every order solved, `2` when some did, `1` when none did.
pub fn exit_code(rows: &[OrderRow]) -> i32 {
    let solved = rows.iter().filter(|r| r.status == "solved").count();
    if solved == rows.len() && !rows.is_empty() {
        0
    } else if solved > 0 {
        2
    } else {
        1
    }
}

fn order_row(row: &SweepRow, basis: Option<&OrthoBasis>) -> OrderRow {
    let mut out = OrderRow {
        t: row.t,
        status: "failed".into(),
        rho: row.rho(),
        u: row.u(),
        gap: row.gap(),
        exactness: None,
        ranks: None,
        minimizers: None,
        minimizer_values: None,
        christoffel: None,
        sigma_at_minimizers: None,
        certificate_residual: None,
        solver: None,
        lower_error: row.lower.as_ref().err().map(|e| e.to_string()),
        upper_error: row
            .upper
            .as_ref()
            .and_then(|u| u.as_ref().err())
            .map(|e| e.to_string()),
    };
    let upper_ok = row.upper.as_ref().is_none_or(|u| u.is_ok());
    let Ok(r) = &row.lower else {
        return out;
    };
    if upper_ok {
        out.status = "solved".into();
    }
    out.exactness = Some(
        match r.exactness {
            Exactness::Certified { .. } => "certified",
            Exactness::NotCertified { .. } => "not_certified",
        }
        .into(),
    );
    out.ranks = Some(r.exactness.ranks().to_vec());
    let mins = r.exactness.minimizers();
    if r.exactness.is_certified() {
        out.minimizers = Some(mins.iter().map(|m| m.point.clone()).collect());
        out.minimizer_values = Some(mins.iter().map(|m| m.value).collect());
        if let (Some(b), Some(sigma)) = (basis, &r.sigma) {
            let poly = b.combination(sigma).ok();
            out.christoffel = mins
                .iter()
                .map(|m| b.christoffel(&m.point).ok())
                .collect();
            out.sigma_at_minimizers = poly.and_then(|p| mins.iter().map(|m| p.eval(&m.point).ok()).collect());
        }
    }
    out.certificate_residual = Some(r.certificate.residual(&r.objective));
    out.solver = Some(SolverDiagnostics {
        status: format!("{:?}", r.solver.status),
        iterations: r.solver.iterations,
        primal_objective: r.solver.primal_objective,
        dual_objective: r.solver.dual_objective,
        primal_residual: r.solver.primal_residual,
        dual_residual: r.solver.dual_residual,
        gap: r.solver.gap,
    });
    out
}

/// Density of the lowest certified order carrying one, else of the highest
/// solved order carrying one.
fn select_density(rows: &[SweepRow]) -> Option<&LowerBoundResult> {
    let solved: Vec<&LowerBoundResult> = rows
        .iter()
        .filter_map(|r| r.lower.as_ref().ok())
        .filter(|r| r.sigma.is_some())
        .collect();
    solved
        .iter()
        .find(|r| r.exactness.is_certified())
        .or(solved.last())
        .copied()
}

/// Runs the lower and upper hierarchies for every requested order.
pub fn run(pf: &ProblemFile, opts: &RunOptions) -> Result<RunReport, CliError> {
    let set = pf.semialgebraic_set()?;
    let measure = pf.reference_measure()?;
    let hopts = hierarchy_options(pf, opts);
    let ts = orders(pf, opts)?;
    let sweep = sweep_orders(&pf.objective, &set, measure.as_ref(), &ts, &hopts);

    let rows: Vec<OrderRow> = sweep
        .iter()
        .map(|row| {
            let basis = measure
                .as_ref()
                .and_then(|m| OrthoBasis::build(m, 2 * row.t).ok());
            order_row(row, basis.as_ref())
        })
        .collect();

    let (density, density_note) = match (&measure, select_density(&sweep)) {
        (None, _) => (None, Some("density unavailable: no reference measure declared".into())),
        (Some(m), Some(r)) => {
            let labels = r
                .moments
                .basis()
                .indices()
                .iter()
                .map(|a| a.label())
                .collect();
            (
                Some(DensityTable {
                    t: r.t,
                    degree: 2 * r.t,
                    measure: m.clone(),
                    labels,
                    sigma: r.sigma.clone().expect("filtered"),
                }),
                None,
            )
        }
        (Some(_), None) => {
            let why = sweep
                .iter()
                .find_map(|r| r.lower.as_ref().ok().and_then(|l| l.density_note.clone()))
                .unwrap_or_else(|| "no order solved".into());
            (None, Some(format!("density unavailable: {why}")))
        }
    };

    let constraints = pf
        .constraints
        .iter()
        .map(|c| match c.relation {
            Relation::NonNegative => format!("{} >= 0", c.poly),
            Relation::Zero => format!("{} = 0", c.poly),
        })
        .collect();
    let exit = exit_code(&rows);
    Ok(RunReport {
        version: REPORT_VERSION,
        problem: ProblemSummary {
            n: pf.n(),
            variables: pf.variables.clone(),
            objective: pf.objective.to_string(),
            constraints,
            measure,
            orders: [ts[0], *ts.last().expect("non-empty")],
        },
        rows,
        density,
        density_note,
        exit_code: exit,
    })
}

/// Writes the plain-text SDP of every requested order.
pub fn dump_relaxations<W: Write>(pf: &ProblemFile, opts: &RunOptions, out: &mut W) -> Result<(), CliError> {
    let set = pf.semialgebraic_set()?;
    for t in orders(pf, opts)? {
        let io = |e: std::io::Error| CliError::Io(e.to_string());
        writeln!(out, "# order {t}").map_err(io)?;
        match relaxation_problem(&pf.objective, &set, t) {
            Ok(p) => p.write_dump(out).map_err(io)?,
            Err(e) => writeln!(out, "# unavailable: {e}").map_err(io)?,
        }
    }
    Ok(())
}

/// Samples of the signed density and the diagonal kernel on a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySamples {
    /// Columns `x1..xn, sigma, kernel`.
    Table { columns: Vec<String>, rows: Vec<Vec<f64>> },
    Unavailable(String),
}

impl DensitySamples {
    pub fn to_csv(&self) -> String {
        match self {
            DensitySamples::Unavailable(why) => format!("# density unavailable: {why}\n"),
            DensitySamples::Table { columns, rows } => {
                let mut s = columns.join(",");
                s.push('\n');
                for r in rows {
                    let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
        }
    }
}

/// Regular grid of `points` per axis over the measure's bounding box.
fn grid(lo: &[f64], hi: &[f64], points: usize) -> Vec<Vec<f64>> {
    let axis = |i: usize| -> Vec<f64> {
        if points == 1 {
            return vec![0.5 * (lo[i] + hi[i])];
        }
        (0..points)
            .map(|k| lo[i] + (hi[i] - lo[i]) * k as f64 / (points - 1) as f64)
            .collect()
    };
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for i in 0..lo.len() {
        let a = axis(i);
        out = out
            .into_iter()
            .flat_map(|p| {
                a.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Evaluates `sigma(x)` and `K_2t(x, x)` of the report's density on a grid
/// with `points` nodes per axis.
pub fn sample_density(report: &RunReport, points: usize) -> Result<DensitySamples, CliError> {
    let Some(d) = &report.density else {
        let why = report
            .density_note
            .clone()
            .unwrap_or_else(|| "no density in report".into());
        return Ok(DensitySamples::Unavailable(
            why.trim_start_matches("density unavailable: ").to_string(),
        ));
    };
    let basis = OrthoBasis::build(&d.measure, d.degree)?;
    let sigma = basis.combination(&d.sigma)?;
    let (lo, hi) = d.measure.bounding_box();
    let n = lo.len();
    let mut columns: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    columns.push("sigma".into());
    columns.push("kernel".into());
    let mut rows = Vec::new();
    for x in grid(&lo, &hi, points.max(1)) {
        let s = sigma.eval(&x).map_err(crate::orthobasis::BasisError::from)?;
        let k = basis.cd_kernel(&x, &x)?;
        let mut row = x;
        row.push(s);
        row.push(k);
        rows.push(row);
    }
    Ok(DensitySamples::Table { columns, rows })
}
