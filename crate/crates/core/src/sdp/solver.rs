//! Infeasible primal-dual path-following method (Mehrotra predictor-corrector)
//! with Nesterov-Todd scaling, for dense blocks.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::linalg::sym_eig;
use super::problem::{LmiBlock, SdpProblem};
use super::SdpError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    /// Target for relative residuals and relative duality gap.
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of the step to the boundary of the PSD cone.
    pub step_fraction: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            tol: 1e-8,
            max_iter: 200,
            step_fraction: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub y: Vec<f64>,
    /// `c^T y`.
    pub primal_objective: f64,
    /// `b^T lambda - sum_j <F_0j, X_j>`.
    pub dual_objective: f64,
    /// Dual PSD multipliers `X_j`, one per block.
    pub dual_blocks: Vec<DMatrix<f64>>,
    /// Multipliers of the equality rows (zero for rows found redundant).
    pub eq_multipliers: Vec<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }
}

/// NT scaling of one block: `G^T S G = G^{-1} X G^{-T} = diag(d)`, `W = G G^T`.
struct NtScaling {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    d: DVector<f64>,
    w: DMatrix<f64>,
}

fn nt_scaling(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<NtScaling> {
    let lx = x.clone().cholesky()?.l();
    let ls = s.clone().cholesky()?.l();
    let m = ls.transpose() * &lx;
    let svd = m.svd(false, true);
    let v = svd.v_t?.transpose();
    let d = svd.singular_values;
    if d.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let n = x.nrows();
    let g = &lx * &v * DMatrix::from_diagonal(&d.map(|v| 1.0 / v.sqrt()));
    let lx_inv = lx.solve_lower_triangular(&DMatrix::identity(n, n))?;
    let g_inv = DMatrix::from_diagonal(&d.map(f64::sqrt)) * v.transpose() * lx_inv;
    let w = &g * g.transpose();
    Some(NtScaling { g, g_inv, d, w })
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Largest `alpha` with `x + alpha dx >= 0` (infinite when `dx >= 0`).
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> Option<f64> {
    let l = x.clone().cholesky()?.l();
    let left = l.solve_lower_triangular(dx)?;
    let m = l.solve_lower_triangular(&left.transpose())?;
    let (vals, _) = sym_eig(&sym(m)).ok()?;
    let lmin = vals[0];
    Some(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

fn frob_block(ms: &[DMatrix<f64>]) -> f64 {
    ms.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

fn inner_blocks(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

/// Factored saddle system `[H, -A^T; A, 0]`.
struct Newton {
    h: DMatrix<f64>,
    hc: nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>,
    a: DMatrix<f64>,
    schur: Option<nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>>,
}

/// Cholesky of a matrix that is SPD in exact arithmetic. Near the optimum the
/// Schur matrix loses definiteness to rounding, so retry with a growing
/// diagonal shift.
fn shifted_cholesky(m: &DMatrix<f64>) -> Option<nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>> {
    if m.iter().any(|v| !v.is_finite()) {
        return None;
    }
    if let Some(c) = m.clone().cholesky() {
        return Some(c);
    }
    let scale = m.diagonal().amax().max(f64::MIN_POSITIVE);
    let mut delta = 1e-14 * scale;
    while delta <= 1e-6 * scale {
        let mut shifted = m.clone();
        for i in 0..m.nrows() {
            shifted[(i, i)] += delta;
        }
        if let Some(c) = shifted.cholesky() {
            return Some(c);
        }
        delta *= 100.0;
    }
    None
}

impl Newton {
    fn new(h: DMatrix<f64>, a: &DMatrix<f64>) -> Option<Newton> {
        let hc = shifted_cholesky(&h)?;
        let schur = if a.nrows() > 0 {
            let hinv_at = hc.solve(&a.transpose());
            Some(shifted_cholesky(&sym(a * hinv_at))?)
        } else {
            None
        };
        Some(Newton {
            h,
            hc,
            a: a.clone(),
            schur,
        })
    }

    fn solve_once(&self, g: &DVector<f64>, r: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let hg = self.hc.solve(g);
        match &self.schur {
            None => (hg, DVector::zeros(0)),
            Some(s) => {
                let dl = s.solve(&(r - &self.a * &hg));
                let dy = self.hc.solve(&(g + self.a.transpose() * &dl));
                (dy, dl)
            }
        }
    }

    /// Solves `H dy - A^T dl = g`, `A dy = r`, with one refinement step
    /// against the unshifted system.
    fn solve(&self, g: &DVector<f64>, r: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        let (mut dy, mut dl) = self.solve_once(g, r);
        let rg = g - &self.h * &dy + self.a.transpose() * &dl;
        let rr = r - &self.a * &dy;
        let (cy, cl) = self.solve_once(&rg, &rr);
        dy += cy;
        dl += cl;
        if dy.iter().chain(dl.iter()).all(|v| v.is_finite()) {
            Some((dy, dl))
        } else {
            None
        }
    }
}

/// Indices of a maximal linearly independent subset of the rows of `a`.
fn independent_rows(a: &DMatrix<f64>) -> Vec<usize> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut keep = Vec::new();
    for r in 0..a.nrows() {
        let mut v: DVector<f64> = a.row(r).transpose();
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&v);
                v -= q * c;
            }
        }
        let nv = v.norm();
        if nv > 1e-10 * scale {
            basis.push(v / nv);
            keep.push(r);
        }
    }
    keep
}

struct Directions {
    dy: DVector<f64>,
    dl: DVector<f64>,
    dx: Vec<DMatrix<f64>>,
    ds: Vec<DMatrix<f64>>,
}

struct Solver<'a> {
    p: &'a SdpProblem,
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
}

impl Solver<'_> {
    fn blocks(&self) -> &[LmiBlock] {
        self.p.blocks()
    }

    fn adjoint(&self, xs: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.p.num_vars());
        for (blk, x) in self.blocks().iter().zip(xs) {
            blk.add_adjoint(x, &mut out);
        }
        out
    }

    fn schur_matrix(&self, scalings: &[NtScaling]) -> DMatrix<f64> {
        let nv = self.p.num_vars();
        let mut h = DMatrix::zeros(nv, nv);
        for (blk, sc) in self.blocks().iter().zip(scalings) {
            let w = &sc.w;
            let dim = blk.dim();
            let terms = blk.terms();
            for (ki, (k, fk)) in terms.iter().enumerate() {
                // P = W F_k W via outer products of W's columns
                let mut pk = DMatrix::zeros(dim, dim);
                for &(a, b, v) in &fk.entries {
                    let wa = w.column(a);
                    let wb = w.column(b);
                    pk.ger(v, &wa, &wb, 1.0);
                }
                for (l, fl) in &terms[ki..] {
                    let val = fl.dot(&pk);
                    h[(*k, *l)] += val;
                    if k != l {
                        h[(*l, *k)] += val;
                    }
                }
            }
        }
        h
    }

    /// Newton direction for complementarity target `dX + W dS W = rc`.
    fn direction(
        &self,
        newton: &Newton,
        scalings: &[NtScaling],
        rc: &[DMatrix<f64>],
        rs: &[DMatrix<f64>],
        rd: &DVector<f64>,
        req: &DVector<f64>,
    ) -> Option<Directions> {
        let tmp: Vec<DMatrix<f64>> = rc
            .iter()
            .zip(rs)
            .zip(scalings)
            .map(|((rc, rs), sc)| rc - &sc.w * rs * &sc.w)
            .collect();
        let g = self.adjoint(&tmp) - rd;
        let (dy, dl) = newton.solve(&g, req)?;
        let mut ds = Vec::with_capacity(rs.len());
        let mut dx = Vec::with_capacity(rs.len());
        for ((blk, rs), (rc, sc)) in self.blocks().iter().zip(rs).zip(rc.iter().zip(scalings)) {
            let mut d = rs.clone();
            blk.add_linear(&dy, &mut d);
            let d = sym(d);
            dx.push(sym(rc - &sc.w * &d * &sc.w));
            ds.push(d);
        }
        Some(Directions { dy, dl, dx, ds })
    }

    fn step_lengths(
        &self,
        xs: &[DMatrix<f64>],
        ss: &[DMatrix<f64>],
        dir: &Directions,
    ) -> Option<(f64, f64)> {
        let mut ap = f64::INFINITY;
        let mut ad = f64::INFINITY;
        for (x, dx) in xs.iter().zip(&dir.dx) {
            ap = ap.min(max_step(x, dx)?);
        }
        for (s, ds) in ss.iter().zip(&dir.ds) {
            ad = ad.min(max_step(s, ds)?);
        }
        Some((ap, ad))
    }
}

/// Solves `min c^T y  s.t.  A y = b,  F_j(y) >= 0`.
///
/// Starts from the infeasible point `y = 0`, `X_j = xi_j I`, `S_j = eta_j I`
/// with `xi_j`, `eta_j` scaled from the data norms. The returned solution
/// always carries the last iterate; its `status` tells whether the
/// tolerance was met.
pub fn solve_sdp(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution, SdpError> {
    if p.blocks().is_empty() {
        return Err(SdpError::InvalidProblem("no PSD blocks".into()));
    }
    let nv = p.num_vars();
    let a_full = p.equality_matrix();
    let b_full = DVector::from_column_slice(p.equality_rhs());
    let keep = independent_rows(&a_full);
    let a = DMatrix::from_fn(keep.len(), nv, |r, c| a_full[(keep[r], c)]);
    let b = DVector::from_iterator(keep.len(), keep.iter().map(|&r| b_full[r]));
    let c = DVector::from_column_slice(p.objective());
    let solver = Solver { p, a, b, c };

    let norm_c = solver.c.norm();
    let norm_b = b_full.norm();
    let norm_f0 = p
        .blocks()
        .iter()
        .map(|b| b.constant().frobenius().powi(2))
        .sum::<f64>()
        .sqrt();

    let mut xs = Vec::new();
    let mut ss = Vec::new();
    for blk in p.blocks() {
        let n = blk.dim() as f64;
        let mut xi: f64 = 10f64.max(n.sqrt());
        let mut eta: f64 = 10f64.max(n.sqrt()).max(blk.constant().frobenius());
        for (k, f) in blk.terms() {
            let nf = f.frobenius();
            xi = xi.max(n * (1.0 + solver.c[*k].abs()) / (1.0 + nf));
            eta = eta.max(nf);
        }
        xs.push(DMatrix::identity(blk.dim(), blk.dim()) * xi);
        ss.push(DMatrix::identity(blk.dim(), blk.dim()) * eta);
    }
    let total_dim: usize = p.blocks().iter().map(LmiBlock::dim).sum();
    let x0_scale = frob_block(&xs);
    let mut y = DVector::zeros(nv);
    let mut lam = DVector::zeros(solver.b.len());

    let mut status = SdpStatus::MaxIter;
    let mut iterations = 0;
    let mut pres;
    let mut dres;
    let mut gap;
    let mut stalls = 0;

    loop {
        // residuals at the current iterate
        let rs: Vec<DMatrix<f64>> = p
            .blocks()
            .iter()
            .zip(&ss)
            .map(|(blk, s)| sym(blk.eval(&y) - s))
            .collect();
        let req = &solver.b - &solver.a * &y;
        let rd = &solver.c - solver.a.transpose() * &lam - solver.adjoint(&xs);
        let pobj = solver.c.dot(&y);
        let dobj = solver.b.dot(&lam)
            - p.blocks()
                .iter()
                .zip(&xs)
                .map(|(blk, x)| blk.constant().dot(x))
                .sum::<f64>();
        let compl = inner_blocks(&xs, &ss);
        let mu = compl / total_dim as f64;
        let eq_full = (&b_full - &a_full * &y).norm();
        pres = (frob_block(&rs) / (1.0 + norm_f0)).max(eq_full / (1.0 + norm_b));
        dres = rd.norm() / (1.0 + norm_c);
        let denom = 1.0 + pobj.abs() + dobj.abs();
        gap = ((pobj - dobj).abs() / denom).max(compl / denom);

        if pres <= opts.tol && dres <= opts.tol && gap <= opts.tol {
            status = SdpStatus::Optimal;
            break;
        }
        // divergence: a dual ray certifies an empty LMI, a primal ray an
        // unbounded objective (empty dual)
        let norm_x = frob_block(&xs);
        if norm_x > 1e8 * (1.0 + x0_scale) {
            let ray = solver.a.transpose() * &lam + solver.adjoint(&xs);
            if ray.norm() / norm_x < 1e-6 && dobj / norm_x > 1e-8 {
                status = SdpStatus::Infeasible;
                break;
            }
        }
        let norm_y = y.norm();
        if norm_y > 1e8 && pobj / norm_y < -1e-8 {
            status = SdpStatus::Infeasible;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let scalings: Option<Vec<NtScaling>> =
            xs.iter().zip(&ss).map(|(x, s)| nt_scaling(x, s)).collect();
        let Some(scalings) = scalings else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let h = sym(solver.schur_matrix(&scalings));
        let Some(newton) = Newton::new(h, &solver.a) else {
            status = SdpStatus::NumericalFailure;
            break;
        };

        // predictor
        let rc_aff: Vec<DMatrix<f64>> = xs.iter().map(|x| -x).collect();
        let Some(aff) = solver.direction(&newton, &scalings, &rc_aff, &rs, &rd, &req) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let Some((ap, ad)) = solver.step_lengths(&xs, &ss, &aff) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mut compl_aff = 0.0;
        for i in 0..xs.len() {
            let xa = &xs[i] + &aff.dx[i] * ap;
            let sa = &ss[i] + &aff.ds[i] * ad;
            compl_aff += xa.dot(&sa);
        }
        let mu_aff = compl_aff / total_dim as f64;
        let expon = 1f64.max(3.0 * ap.min(ad).powi(2));
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powf(expon);

        // corrector with the second-order term in the scaled space
        let rc: Vec<DMatrix<f64>> = scalings
            .iter()
            .enumerate()
            .map(|(i, sc)| {
                let dxs = &sc.g_inv * &aff.dx[i] * sc.g_inv.transpose();
                let dss = sc.g.transpose() * &aff.ds[i] * &sc.g;
                let t = &dxs * &dss + &dss * &dxs;
                let n = sc.d.len();
                let q = DMatrix::from_fn(n, n, |r, c| t[(r, c)] / (sc.d[r] + sc.d[c]));
                let s_inv = &sc.g * DMatrix::from_diagonal(&sc.d.map(|v| 1.0 / v)) * sc.g.transpose();
                sym(s_inv * (sigma * mu) - &xs[i] - &sc.g * q * sc.g.transpose())
            })
            .collect();
        let Some(dir) = solver.direction(&newton, &scalings, &rc, &rs, &rd, &req) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let Some((ap, ad)) = solver.step_lengths(&xs, &ss, &dir) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let gamma = opts.step_fraction;
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);

        for i in 0..xs.len() {
            xs[i] = sym(&xs[i] + &dir.dx[i] * ap);
            ss[i] = sym(&ss[i] + &dir.ds[i] * ad);
        }
        lam += &dir.dl * ap;
        y += &dir.dy * ad;

        if ap.max(ad) < 1e-8 {
            stalls += 1;
            if stalls >= 3 {
                status = SdpStatus::NumericalFailure;
                break;
            }
        } else {
            stalls = 0;
        }
    }

    let mut eq_multipliers = vec![0.0; p.num_equalities()];
    for (i, &r) in keep.iter().enumerate() {
        eq_multipliers[r] = lam[i];
    }
    let dual_objective = solver.b.dot(&lam)
        - p.blocks()
            .iter()
            .zip(&xs)
            .map(|(blk, x)| blk.constant().dot(x))
            .sum::<f64>();
    Ok(SdpSolution {
        status,
        primal_objective: solver.c.dot(&y),
        dual_objective,
        y: y.iter().copied().collect(),
        dual_blocks: xs,
        eq_multipliers,
        iterations,
        primal_residual: pres,
        dual_residual: dres,
        gap,
    })
}
