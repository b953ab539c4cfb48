//! Dense primal-dual interior-point solver for block-diagonal SDPs.
//!
//! Standard primal form:
//!
//! ```text
//! min  sum_k <C_k, X_k> + c_lp' x_lp + c_free' x_free
//! s.t. sum_k A_k(X_k) + A_lp x_lp + A_free x_free = b
//!      X_k PSD, x_lp >= 0, x_free free
//! ```
//!
//! A PSD block stores its constraint operator in factored form. Each matrix
//! entry `(i, j)` maps to a "raw" id (for SOS blocks: the monomial
//! `z_i z_j`), and each raw id lifts to a sparse list of `(row, coef)`.
//! So `A_k(X)_row = sum_raw coef(raw, row) * sum_{(i,j) in raw} X_ij`.

mod ipm;
mod presolve;
pub mod sdpa;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use ipm::solve_raw;

/// Marker for matrix entries that do not enter any constraint.
pub const NO_RAW: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct PsdBlock {
    dim: usize,
    raw_of: Vec<u32>,
    lift: Vec<Vec<(usize, f64)>>,
    c: DMatrix<f64>,
}

impl PsdBlock {
    /// `raw_of` is row-major `dim * dim` and must be symmetric.
    pub fn structured(dim: usize, raw_of: Vec<u32>, lift: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(raw_of.len(), dim * dim, "raw_of shape");
        for i in 0..dim {
            for j in 0..dim {
                assert_eq!(raw_of[i * dim + j], raw_of[j * dim + i], "raw_of must be symmetric");
                let r = raw_of[i * dim + j];
                assert!(r == NO_RAW || (r as usize) < lift.len(), "raw id out of range");
            }
        }
        PsdBlock { dim, raw_of, lift, c: DMatrix::zeros(dim, dim) }
    }

    /// Generic constructor from symmetric constraint-matrix entries
    /// `(row, i, j, v)` meaning `F_row[i][j] = F_row[j][i] = v`, so the
    /// constraint reads `<F_row, X>`.
    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, usize, usize, f64)>) -> Self {
        let mut raw_of = vec![NO_RAW; dim * dim];
        let mut lift: Vec<Vec<(usize, f64)>> = Vec::new();
        for (row, i, j, v) in entries {
            assert!(i < dim && j < dim, "entry outside block");
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            let mut r = raw_of[i * dim + j];
            if r == NO_RAW {
                r = lift.len() as u32;
                lift.push(Vec::new());
                raw_of[i * dim + j] = r;
                raw_of[j * dim + i] = r;
            }
            let l = &mut lift[r as usize];
            match l.iter_mut().find(|(p, _)| *p == row) {
                Some(e) => e.1 += v,
                None => l.push((row, v)),
            }
        }
        PsdBlock { dim, raw_of, lift, c: DMatrix::zeros(dim, dim) }
    }

    pub fn with_objective(mut self, c: DMatrix<f64>) -> Self {
        assert_eq!(c.shape(), (self.dim, self.dim));
        self.c = (&c + c.transpose()) * 0.5;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_raw(&self) -> usize {
        self.lift.len()
    }

    pub fn raw_of(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.raw_of[i * self.dim + j];
        (r != NO_RAW).then_some(r as usize)
    }

    pub fn lift(&self, raw: usize) -> &[(usize, f64)] {
        &self.lift[raw]
    }

    pub fn objective(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// Sums of `X` entries per raw id.
    fn raw_sums(&self, x: &DMatrix<f64>) -> Vec<f64> {
        let n = self.dim;
        let mut s = vec![0.0; self.n_raw()];
        for j in 0..n {
            for i in 0..n {
                let r = self.raw_of[i * n + j];
                if r != NO_RAW {
                    s[r as usize] += x[(i, j)];
                }
            }
        }
        s
    }

    /// `out += A_k(X)`.
    fn apply_add(&self, x: &DMatrix<f64>, out: &mut [f64]) {
        for (r, s) in self.raw_sums(x).into_iter().enumerate() {
            if s != 0.0 {
                for &(row, c) in &self.lift[r] {
                    out[row] += c * s;
                }
            }
        }
    }

    /// `A_k^*(y)`.
    fn adjoint(&self, y: &[f64]) -> DMatrix<f64> {
        let w: Vec<f64> = self.lift.iter().map(|l| l.iter().map(|&(row, c)| c * y[row]).sum()).collect();
        let n = self.dim;
        DMatrix::from_fn(n, n, |i, j| {
            let r = self.raw_of[i * n + j];
            if r == NO_RAW {
                0.0
            } else {
                w[r as usize]
            }
        })
    }

    /// Dense constraint matrix for `row` (test and dump helper).
    pub fn constraint_matrix(&self, row: usize) -> DMatrix<f64> {
        let mut e = vec![0.0; self.lift.len()];
        for (r, l) in self.lift.iter().enumerate() {
            for &(p, c) in l {
                if p == row {
                    e[r] += c;
                }
            }
        }
        let n = self.dim;
        DMatrix::from_fn(n, n, |i, j| {
            let r = self.raw_of[i * n + j];
            if r == NO_RAW {
                0.0
            } else {
                e[r as usize]
            }
        })
    }

    fn remap_rows(&self, map: &[Option<usize>]) -> Self {
        let lift = self.lift.iter().map(|l| l.iter().filter_map(|&(p, c)| map[p].map(|q| (q, c))).collect()).collect();
        PsdBlock { dim: self.dim, raw_of: self.raw_of.clone(), lift, c: self.c.clone() }
    }
}

/// Scalar variables given by sparse columns `(row, coef)`.
#[derive(Debug, Clone, Default)]
pub struct LinearBlock {
    cols: Vec<Vec<(usize, f64)>>,
    c: Vec<f64>,
}

impl LinearBlock {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable and returns its index.
    pub fn push(&mut self, col: Vec<(usize, f64)>, cost: f64) -> usize {
        self.cols.push(col);
        self.c.push(cost);
        self.cols.len() - 1
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn col(&self, j: usize) -> &[(usize, f64)] {
        &self.cols[j]
    }

    pub fn cost(&self, j: usize) -> f64 {
        self.c[j]
    }

    fn apply_add(&self, x: &[f64], out: &mut [f64]) {
        for (col, &v) in self.cols.iter().zip(x) {
            if v != 0.0 {
                for &(row, c) in col {
                    out[row] += c * v;
                }
            }
        }
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.cols.iter().map(|col| col.iter().map(|&(row, c)| c * y[row]).sum()).collect()
    }

    fn remap_rows(&self, map: &[Option<usize>]) -> Self {
        LinearBlock {
            cols: self
                .cols
                .iter()
                .map(|col| col.iter().filter_map(|&(p, c)| map[p].map(|q| (q, c))).collect())
                .collect(),
            c: self.c.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub b: Vec<f64>,
    pub psd: Vec<PsdBlock>,
    pub lp: LinearBlock,
    pub free: LinearBlock,
}

impl SdpProblem {
    pub fn new(b: Vec<f64>) -> Self {
        SdpProblem { b, psd: Vec::new(), lp: LinearBlock::new(), free: LinearBlock::new() }
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    /// Barrier parameter `nu`: total PSD dimension plus LP count.
    pub fn nu(&self) -> usize {
        self.psd.iter().map(|b| b.dim).sum::<usize>() + self.lp.len()
    }

    pub fn validate(&self) -> crate::Result<()> {
        let m = self.m();
        let bad = |what: &str| crate::Error::Solver(format!("malformed problem: {what} references row >= {m}"));
        for b in &self.psd {
            if b.lift.iter().flatten().any(|&(p, _)| p >= m) {
                return Err(bad("PSD block"));
            }
        }
        if self.lp.cols.iter().flatten().any(|&(p, _)| p >= m) {
            return Err(bad("LP column"));
        }
        if self.free.cols.iter().flatten().any(|&(p, _)| p >= m) {
            return Err(bad("free column"));
        }
        if self.b.iter().any(|v| !v.is_finite()) {
            return Err(crate::Error::Solver("non-finite right-hand side".into()));
        }
        Ok(())
    }

    /// `A(X) + A_lp x + A_free xf`.
    pub fn apply(&self, x: &[DMatrix<f64>], x_lp: &[f64], x_free: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        for (blk, xk) in self.psd.iter().zip(x) {
            blk.apply_add(xk, &mut out);
        }
        self.lp.apply_add(x_lp, &mut out);
        self.free.apply_add(x_free, &mut out);
        out
    }

    /// Adjoint images of `y`: per PSD block, LP and free parts.
    pub fn adjoint(&self, y: &[f64]) -> (Vec<DMatrix<f64>>, Vec<f64>, Vec<f64>) {
        (self.psd.iter().map(|b| b.adjoint(y)).collect(), self.lp.adjoint(y), self.free.adjoint(y))
    }

    pub fn objective(&self, x: &[DMatrix<f64>], x_lp: &[f64], x_free: &[f64]) -> f64 {
        let mut v = 0.0;
        for (blk, xk) in self.psd.iter().zip(x) {
            v += blk.c.dot(xk);
        }
        v += self.lp.c.iter().zip(x_lp).map(|(a, b)| a * b).sum::<f64>();
        v += self.free.c.iter().zip(x_free).map(|(a, b)| a * b).sum::<f64>();
        v
    }

    fn remap_rows(&self, map: &[Option<usize>], new_m: usize) -> Self {
        let mut b = vec![0.0; new_m];
        for (p, q) in map.iter().enumerate() {
            if let Some(q) = q {
                b[*q] = self.b[p];
            }
        }
        SdpProblem {
            b,
            psd: self.psd.iter().map(|k| k.remap_rows(map)).collect(),
            lp: self.lp.remap_rows(map),
            free: self.free.remap_rows(map),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    PrimalInfeasibleWitness,
    NumericalTrouble,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdpOptions {
    /// Relative stopping tolerance on primal/dual residuals and gap.
    pub tol: f64,
    pub max_iters: usize,
    /// Pivot threshold of the redundant-row detection.
    pub rank_tol: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { tol: 1e-9, max_iters: 200, rank_tol: 1e-11 }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Vec<DMatrix<f64>>,
    pub x_lp: Vec<f64>,
    pub x_free: Vec<f64>,
    /// Dual multipliers; for `PrimalInfeasibleWitness` a Farkas direction `w`
    /// with `A^*(w)` PSD / nonnegative, `A_free' w = 0` and `b'w < 0`.
    pub y: DVector<f64>,
    pub z: Vec<DMatrix<f64>>,
    pub z_lp: Vec<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub mu_final: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub message: String,
}

/// Solves the problem after removing redundant equality rows.
pub fn solve(p: &SdpProblem, opts: &SdpOptions) -> crate::Result<SdpSolution> {
    p.validate()?;
    let pre = presolve::reduce(p, opts.rank_tol);
    if let Some(w) = pre.inconsistency {
        return Ok(infeasible_by_rows(p, w));
    }
    let reduced = p.remap_rows(&pre.row_map, pre.kept);
    let mut sol = ipm::solve_raw(&reduced, opts);
    // scatter dual back to the original rows
    let mut y = DVector::zeros(p.m());
    for (orig, q) in pre.row_map.iter().enumerate() {
        if let Some(q) = q {
            y[orig] = sol.y[*q];
        }
    }
    sol.y = y;
    sol.primal_residual = rel_inf_norm(&residual(p, &sol.x, &sol.x_lp, &sol.x_free), &p.b);
    Ok(sol)
}

fn residual(p: &SdpProblem, x: &[DMatrix<f64>], x_lp: &[f64], x_free: &[f64]) -> Vec<f64> {
    let ax = p.apply(x, x_lp, x_free);
    ax.iter().zip(&p.b).map(|(a, b)| b - a).collect()
}

fn rel_inf_norm(v: &[f64], b: &[f64]) -> f64 {
    let nb = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    v.iter().fold(0.0f64, |m, x| m.max(x.abs())) / (1.0 + nb)
}

fn infeasible_by_rows(p: &SdpProblem, w: Vec<f64>) -> SdpSolution {
    SdpSolution {
        status: SdpStatus::PrimalInfeasibleWitness,
        x: p.psd.iter().map(|b| DMatrix::zeros(b.dim, b.dim)).collect(),
        x_lp: vec![0.0; p.lp.len()],
        x_free: vec![0.0; p.free.len()],
        y: DVector::from_vec(w),
        z: p.psd.iter().map(|b| DMatrix::zeros(b.dim, b.dim)).collect(),
        z_lp: vec![0.0; p.lp.len()],
        primal_obj: f64::NAN,
        dual_obj: f64::NAN,
        mu_final: 0.0,
        iterations: 0,
        primal_residual: f64::INFINITY,
        dual_residual: 0.0,
        message: "equality constraints are inconsistent".into(),
    }
}

/// Result of the max-λ feasibility problem.
#[derive(Debug, Clone)]
pub struct Feasibility {
    pub status: SdpStatus,
    /// Optimal `λ*`; `-inf` when the equality rows alone are inconsistent.
    pub lambda: f64,
    /// Recovered original variables `X = X' + λ* I` (and `x_lp = x' + λ*`).
    pub x: Vec<DMatrix<f64>>,
    pub x_lp: Vec<f64>,
    pub x_free: Vec<f64>,
    /// Dual witness `w` normalized to `<I, A^*(w)> + sum A_lp^*(w) = 1`.
    pub witness: DVector<f64>,
    /// `b'w`: an upper bound on `λ*` whenever the witness is dual feasible,
    /// equal to `λ*` at optimality.
    pub dual_bound: f64,
    /// Largest violation of `A^*(w) ⪰ 0`, `A_lp' w >= 0`, `A_free' w = 0`.
    pub witness_residual: f64,
    pub iterations: usize,
    pub mu_final: f64,
    pub message: String,
}

/// Decides `exists X ⪰ 0: A(X) = b` by solving `max λ` subject to
/// `A(X' + λI) = b`, `X' ⪰ 0`. The problem's own objective is ignored.
/// `sep_tol` is the margin below which `λ*` is reported as infeasible.
pub fn feasibility(p: &SdpProblem, opts: &SdpOptions, sep_tol: f64) -> crate::Result<Feasibility> {
    p.validate()?;
    // a0 = A(I) + A_lp(1)
    let ident: Vec<DMatrix<f64>> = p.psd.iter().map(|b| DMatrix::identity(b.dim, b.dim)).collect();
    let ones = vec![1.0; p.lp.len()];
    let a0 = p.apply(&ident, &ones, &vec![0.0; p.free.len()]);
    let mut aux = SdpProblem {
        b: p.b.clone(),
        psd: p.psd.iter().map(|b| b.clone().with_objective(DMatrix::zeros(b.dim, b.dim))).collect(),
        lp: LinearBlock { cols: p.lp.cols.clone(), c: vec![0.0; p.lp.len()] },
        free: LinearBlock { cols: p.free.cols.clone(), c: vec![0.0; p.free.len()] },
    };
    let lam_col: Vec<(usize, f64)> = a0.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, v)| (i, *v)).collect();
    let lam_idx = aux.free.push(lam_col, -1.0);
    let sol = solve(&aux, opts)?;
    let nf = p.free.len();
    if sol.status == SdpStatus::PrimalInfeasibleWitness && sol.iterations == 0 {
        // rows alone inconsistent: any scaling of the Farkas vector works
        let w = sol.y.clone();
        let res = witness_residual(p, w.as_slice());
        return Ok(Feasibility {
            status: SdpStatus::PrimalInfeasibleWitness,
            lambda: f64::NEG_INFINITY,
            x: sol.x,
            x_lp: sol.x_lp,
            x_free: vec![0.0; nf],
            witness: w,
            witness_residual: res,
            dual_bound: f64::NEG_INFINITY,
            iterations: 0,
            mu_final: 0.0,
            message: sol.message,
        });
    }
    let lambda = sol.x_free[lam_idx];
    let x: Vec<DMatrix<f64>> = sol.x.iter().map(|xk| xk + DMatrix::identity(xk.nrows(), xk.ncols()) * lambda).collect();
    let x_lp: Vec<f64> = sol.x_lp.iter().map(|v| v + lambda).collect();
    // min -λ: dual gives a0'y = -1 and Z = -A^*(y); enforce the
    // normalization exactly since an early stop leaves it approximate
    let mut w = -&sol.y;
    let t: f64 = a0.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
    let dual_bound = if t > 0.0 {
        w /= t;
        p.b.iter().zip(w.iter()).map(|(a, b)| a * b).sum()
    } else {
        f64::INFINITY
    };
    let res = witness_residual(p, w.as_slice());
    let status = match sol.status {
        SdpStatus::Optimal if lambda < -sep_tol => SdpStatus::PrimalInfeasibleWitness,
        s => s,
    };
    Ok(Feasibility {
        status,
        lambda,
        x,
        x_lp,
        x_free: sol.x_free[..nf].to_vec(),
        witness: w,
        witness_residual: res,
        dual_bound,
        iterations: sol.iterations,
        mu_final: sol.mu_final,
        message: sol.message,
    })
}

/// Violation of dual feasibility of a Farkas candidate `w`.
pub fn witness_residual(p: &SdpProblem, w: &[f64]) -> f64 {
    let (zs, zl, zf) = p.adjoint(w);
    let mut worst = 0.0f64;
    for z in zs {
        if z.nrows() > 0 {
            let ev = z.symmetric_eigenvalues();
            worst = worst.max(-ev.min());
        }
    }
    for v in zl {
        worst = worst.max(-v);
    }
    for v in zf {
        worst = worst.max(v.abs());
    }
    worst.max(0.0)
}

/// Smallest eigenvalue of a symmetric matrix; `+inf` for an empty matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    m.clone().symmetric_eigenvalues().min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn min_trace_with_fixed_corner() {
        // min tr X s.t. X00 = 1
        let blk = PsdBlock::from_entries(2, [(0, 0, 0, 1.0)]).with_objective(DMatrix::identity(2, 2));
        let mut p = SdpProblem::new(vec![1.0]);
        p.psd.push(blk);
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(s.primal_obj, 1.0, epsilon = 1e-8);
        let e1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!((&s.x[0] - e1).abs().max() < 1e-6);
    }

    #[test]
    fn fixed_gram_lambda_is_smallest_eigenvalue() {
        // Gram of (x1 - x2)^2 fully fixed
        let entries = [(0, 0, 0, 1.0), (1, 0, 1, 1.0), (2, 1, 1, 1.0)];
        let mut p = SdpProblem::new(vec![1.0, -2.0, 1.0]);
        p.psd.push(PsdBlock::from_entries(2, entries));
        let f = feasibility(&p, &SdpOptions::default(), 1e-6).unwrap();
        assert_eq!(f.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(f.lambda, 0.0, epsilon = 1e-8);
        let g = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!((&f.x[0] - g).abs().max() < 1e-7);
    }

    #[test]
    fn negative_corner_is_infeasible_with_witness() {
        let mut p = SdpProblem::new(vec![-1.0]);
        p.psd.push(PsdBlock::from_entries(1, [(0, 0, 0, 1.0)]));
        let f = feasibility(&p, &SdpOptions::default(), 1e-6).unwrap();
        assert_eq!(f.status, SdpStatus::PrimalInfeasibleWitness);
        assert_abs_diff_eq!(f.lambda, -1.0, epsilon = 1e-8);
        let bw: f64 = p.b.iter().zip(f.witness.iter()).map(|(a, b)| a * b).sum();
        assert!(bw < -0.5);
        assert!(f.witness_residual <= 1e-8);
    }

    #[test]
    fn inconsistent_rows_detected_in_presolve() {
        // X00 = 1 and 2 X00 = 3
        let mut p = SdpProblem::new(vec![1.0, 3.0]);
        p.psd.push(PsdBlock::from_entries(1, [(0, 0, 0, 1.0), (1, 0, 0, 2.0)]));
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::PrimalInfeasibleWitness);
        let w = s.y.as_slice();
        let (z, _, _) = p.adjoint(w);
        assert!(z[0][(0, 0)].abs() < 1e-12);
        assert!(p.b[0] * w[0] + p.b[1] * w[1] < 0.0);
    }

    #[test]
    fn redundant_rows_are_harmless() {
        // X00 = 1 twice, X11 = 2, min X01
        let blk = PsdBlock::from_entries(2, [(0, 0, 0, 1.0), (1, 0, 0, 1.0), (2, 1, 1, 1.0)])
            .with_objective(DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]));
        let mut p = SdpProblem::new(vec![1.0, 1.0, 2.0]);
        p.psd.push(blk);
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(s.primal_obj, -(2.0f64).sqrt(), epsilon = 1e-7);
    }

    #[test]
    fn lp_and_free_blocks() {
        // min x1 + 2 x2 + 0 f  s.t. x1 + x2 + f = 3, f = 1, x >= 0
        let mut p = SdpProblem::new(vec![3.0, 1.0]);
        p.lp.push(vec![(0, 1.0)], 1.0);
        p.lp.push(vec![(0, 1.0)], 2.0);
        p.free.push(vec![(0, 1.0), (1, 1.0)], 0.0);
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(s.primal_obj, 2.0, epsilon = 1e-7);
        assert_abs_diff_eq!(s.x_free[0], 1.0, epsilon = 1e-7);
    }

    #[test]
    fn deterministic() {
        let blk = PsdBlock::from_entries(
            3,
            [(0, 0, 0, 1.0), (0, 1, 2, 0.3), (1, 1, 1, 1.0), (2, 2, 2, 1.0), (2, 0, 1, -0.2)],
        )
        .with_objective(DMatrix::from_fn(3, 3, |i, j| 1.0 / (1.0 + i as f64 + j as f64)));
        let mut p = SdpProblem::new(vec![1.0, 2.0, 0.5]);
        p.psd.push(blk);
        let a = solve(&p, &SdpOptions::default()).unwrap();
        let b = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.primal_obj.to_bits(), b.primal_obj.to_bits());
        assert_eq!(a.x[0], b.x[0]);
    }
}
