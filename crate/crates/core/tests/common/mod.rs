#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coposhier::matrices::{random_mixture, SymMatrix};
use coposhier::sdp::{PsdBlock, SdpProblem};

/// Randomized matrix suite shared by the cross-cone and bound checks.
pub fn matrix_suite(count: usize, seed: u64) -> Vec<SymMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|k| random_mixture(&mut rng, 3 + k % 3)).collect()
}

/// Single-block problem `min <C, X>` s.t. `<F_i, X> = b_i`, `X ⪰ 0`.
#[derive(Debug, Clone)]
pub struct DenseSdp {
    pub c: DMatrix<f64>,
    pub f: Vec<DMatrix<f64>>,
    pub b: Vec<f64>,
}

impl DenseSdp {
    /// Strictly feasible on both sides: `b = A(X0)` with `X0 ≻ 0` and
    /// `C = A^*(y0) + S0` with `S0 ≻ 0`.
    pub fn random<R: Rng>(rng: &mut R, n: usize, m: usize) -> Self {
        let sym = |rng: &mut R| {
            let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            (&g + g.transpose()) * 0.5
        };
        let pd = |rng: &mut R| {
            let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            &g * g.transpose() / n as f64 + DMatrix::identity(n, n) * 0.1
        };
        let f: Vec<DMatrix<f64>> = (0..m).map(|_| sym(rng)).collect();
        let x0 = pd(rng);
        let s0 = pd(rng);
        let b = f.iter().map(|fi| fi.dot(&x0)).collect();
        let mut c = s0;
        for fi in &f {
            c += fi * rng.gen_range(-1.0..1.0);
        }
        DenseSdp { c, f, b }
    }

    pub fn to_problem(&self) -> SdpProblem {
        let n = self.c.nrows();
        let mut entries = Vec::new();
        for (row, fi) in self.f.iter().enumerate() {
            for i in 0..n {
                for j in i..n {
                    entries.push((row, i, j, fi[(i, j)]));
                }
            }
        }
        let mut p = SdpProblem::new(self.b.clone());
        p.psd.push(PsdBlock::from_entries(n, entries).with_objective(self.c.clone()));
        p
    }
}

fn psd_part(v: &DMatrix<f64>) -> DMatrix<f64> {
    let e = v.clone().symmetric_eigen();
    let d = e.eigenvalues.map(|x| x.max(0.0));
    &e.eigenvectors * DMatrix::from_diagonal(&d) * e.eigenvectors.transpose()
}

/// Alternating-direction method on the dual with PSD projections.
/// Returns the primal objective once primal, dual and gap residuals are all
/// below `tol`.
pub fn admm_oracle(p: &DenseSdp, tol: f64, max_iters: usize) -> Option<f64> {
    let n = p.c.nrows();
    let m = p.f.len();
    let amat = DMatrix::from_fn(m, n * n, |r, k| p.f[r][(k / n, k % n)]);
    let aat = (&amat * amat.transpose()).cholesky()?;
    let b = DVector::from_column_slice(&p.b);
    let apply = |x: &DMatrix<f64>| DVector::from_fn(m, |r, _| p.f[r].dot(x));
    let adjoint = |y: &DVector<f64>| {
        let mut out = DMatrix::zeros(n, n);
        for (fi, yi) in p.f.iter().zip(y.iter()) {
            out += fi * *yi;
        }
        out
    };
    let mut x = DMatrix::<f64>::identity(n, n);
    let mut s = DMatrix::<f64>::identity(n, n);
    let mut mu = 1.0;
    let nb = 1.0 + b.amax();
    let nc = 1.0 + p.c.amax();
    for it in 0..max_iters {
        let rhs = (apply(&x) - &b) * mu + apply(&(&s - &p.c));
        let y = -aat.solve(&rhs);
        let v = &p.c - adjoint(&y) - &x * mu;
        s = psd_part(&v);
        x = (&s - &v) / mu;
        let pinf = (apply(&x) - &b).amax() / nb;
        let dinf = (&p.c - adjoint(&y) - &s).amax() / nc;
        let pobj = p.c.dot(&x);
        let dobj = b.dot(&y);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        if pinf < tol && dinf < tol && gap < tol {
            return Some(pobj);
        }
        if it % 50 == 49 {
            // penalty balancing between primal and dual residuals
            if pinf > 10.0 * dinf {
                mu = (mu * 2.0).min(1e4);
            } else if dinf > 10.0 * pinf {
                mu = (mu * 0.5).max(1e-4);
            }
        }
    }
    None
}
