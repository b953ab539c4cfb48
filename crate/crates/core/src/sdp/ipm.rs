//! Infeasible primal-dual path following with Nesterov-Todd scaling and
//! Mehrotra predictor-corrector steps.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{PsdBlock, SdpOptions, SdpProblem, SdpSolution, SdpStatus, NO_RAW};

const DIVERGENCE: f64 = 1e12;
const STALL_STEP: f64 = 1e-8;
const STALL_LIMIT: usize = 4;
const BACKTRACKS: usize = 30;
const NO_PROGRESS_LIMIT: usize = 10;

struct Nt {
    g: DMatrix<f64>,
    ginv: DMatrix<f64>,
    d: DVector<f64>,
    w: DMatrix<f64>,
    lx: DMatrix<f64>,
    lz: DMatrix<f64>,
}

fn nt_scaling(x: &DMatrix<f64>, z: &DMatrix<f64>) -> Option<Nt> {
    let lx = Cholesky::new(x.clone())?.l();
    let lz = Cholesky::new(z.clone())?.l();
    let s = lz.transpose() * &lx;
    let svd = s.svd(true, true);
    let u = svd.u?;
    let vt = svd.v_t?;
    let d = svd.singular_values;
    if d.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let dm12 = d.map(|v| 1.0 / v.sqrt());
    let mut g = &lx * vt.transpose();
    for (j, f) in dm12.iter().enumerate() {
        g.column_mut(j).scale_mut(*f);
    }
    let mut ginv = u.transpose() * lz.transpose();
    for (i, f) in dm12.iter().enumerate() {
        ginv.row_mut(i).scale_mut(*f);
    }
    let w = &g * g.transpose();
    Some(Nt { g, ginv, d, w, lx, lz })
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn mat_inf(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Largest step `a` keeping `L L^T + a dM` PSD (`inf` if unbounded).
fn max_step_psd(l: &DMatrix<f64>, dm: &DMatrix<f64>) -> f64 {
    let n = l.nrows();
    if n == 0 {
        return f64::INFINITY;
    }
    let t = l.solve_lower_triangular(dm).expect("nonsingular factor");
    let s = l.solve_lower_triangular(&t.transpose()).expect("nonsingular factor");
    let ev = sym(&s).symmetric_eigenvalues().min();
    if ev >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / ev
    }
}

fn max_step_lp(x: &[f64], dx: &[f64]) -> f64 {
    x.iter().zip(dx).filter(|(_, d)| **d < 0.0).map(|(v, d)| -v / d).fold(f64::INFINITY, f64::min)
}

/// Cholesky with an escalating diagonal ridge.
fn robust_cholesky(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(c);
    }
    let scale = m.diagonal().iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
    let mut ridge = 1e-12;
    while ridge < 1e-2 {
        let mut mm = m.clone();
        for i in 0..mm.nrows() {
            mm[(i, i)] += ridge * scale;
        }
        if let Some(c) = Cholesky::new(mm) {
            return Some(c);
        }
        ridge *= 100.0;
    }
    None
}

/// Adds `A_k (W . W) A_k^T` of one PSD block to `m`.
fn add_psd_schur(blk: &PsdBlock, w: &DMatrix<f64>, m: &mut DMatrix<f64>) {
    let n = blk.dim;
    let nr = blk.n_raw();
    if nr == 0 {
        return;
    }
    // M_raw[r, s] = sum_{(a,b) in r, (g,d) in s} W_ag W_db, using (a,b)~(b,a)
    let mut mraw = vec![0.0; nr * nr];
    let wv: Vec<f64> = (0..n * n).map(|k| w[(k / n, k % n)]).collect(); // row-major
    for a in 0..n {
        for b in a..n {
            let r = blk.raw_of[a * n + b];
            if r == NO_RAW {
                continue;
            }
            let mult = if a == b { 1.0 } else { 2.0 };
            let row = &mut mraw[r as usize * nr..(r as usize + 1) * nr];
            let wb = &wv[b * n..(b + 1) * n];
            for g in 0..n {
                let wag = wv[a * n + g] * mult;
                if wag == 0.0 {
                    continue;
                }
                let raws = &blk.raw_of[g * n..(g + 1) * n];
                for (s, wdb) in raws.iter().zip(wb) {
                    if *s != NO_RAW {
                        row[*s as usize] += wag * wdb;
                    }
                }
            }
        }
    }
    let mdim = m.nrows();
    // T = M_raw L^T  (nr x m), then M += L T
    let mut t = vec![0.0; nr * mdim];
    for r in 0..nr {
        let trow = &mut t[r * mdim..(r + 1) * mdim];
        let mrow = &mraw[r * nr..(r + 1) * nr];
        for (s, &v) in mrow.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            for &(q, c) in &blk.lift[s] {
                trow[q] += v * c;
            }
        }
    }
    for r in 0..nr {
        let trow = &t[r * mdim..(r + 1) * mdim];
        for &(p, c) in &blk.lift[r] {
            for (q, &v) in trow.iter().enumerate() {
                if v != 0.0 {
                    m[(p, q)] += c * v;
                }
            }
        }
    }
}

const REFINE_STEPS: usize = 2;

/// Solves `M dy + A_f dx_f = h`, `A_f^T dy = r_f`.
struct Newton {
    m: DMatrix<f64>,
    m_chol: Cholesky<f64, Dyn>,
    /// `M^{-1} A_f` and the Cholesky factor of `A_f^T M^{-1} A_f`.
    free: Option<(DMatrix<f64>, Cholesky<f64, Dyn>)>,
    af: DMatrix<f64>,
}

impl Newton {
    fn solve(&self, h: &DVector<f64>, rf: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let (mut dy, mut dxf) = self.solve_once(h, rf);
        for _ in 0..REFINE_STEPS {
            let mut r1 = h - &self.m * &dy;
            let mut r2 = rf.clone();
            if self.free.is_some() {
                r1 -= &self.af * &dxf;
                r2 -= self.af.transpose() * &dy;
            }
            let (cy, cf) = self.solve_once(&r1, &r2);
            dy += cy;
            if self.free.is_some() {
                dxf += cf;
            }
        }
        (dy, dxf)
    }

    fn solve_once(&self, h: &DVector<f64>, rf: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let mh = self.m_chol.solve(h);
        match &self.free {
            None => (mh, DVector::zeros(0)),
            Some((minv_af, s)) => {
                let rhs = self.af.transpose() * &mh - rf;
                let dxf = s.solve(&rhs);
                let dy = mh - minv_af * &dxf;
                (dy, dxf)
            }
        }
    }
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dz: Vec<DMatrix<f64>>,
    dxl: Vec<f64>,
    dzl: Vec<f64>,
    dxf: Vec<f64>,
    dy: Vec<f64>,
}

pub fn solve_raw(p: &SdpProblem, opts: &SdpOptions) -> SdpSolution {
    let m = p.m();
    let nb = p.psd.len();
    let nl = p.lp.len();
    let nf = p.free.len();
    let nu = p.nu().max(1) as f64;
    let b = DVector::from_column_slice(&p.b);
    let bnorm = inf_norm(&p.b);
    let cnorm = p
        .psd
        .iter()
        .map(|k| mat_inf(&k.c))
        .chain(p.lp.c.iter().map(|v| v.abs()))
        .chain(p.free.c.iter().map(|v| v.abs()))
        .fold(0.0f64, f64::max);

    // starting point
    let mut x: Vec<DMatrix<f64>> = Vec::with_capacity(nb);
    let mut z: Vec<DMatrix<f64>> = Vec::with_capacity(nb);
    for blk in &p.psd {
        let n = blk.dim as f64;
        let mut counts = vec![0usize; blk.n_raw()];
        for r in blk.raw_of.iter().filter(|r| **r != NO_RAW) {
            counts[*r as usize] += 1;
        }
        let mut rownorm2 = vec![0.0; m];
        for (r, l) in blk.lift.iter().enumerate() {
            for &(row, c) in l {
                rownorm2[row] += c * c * counts[r] as f64;
            }
        }
        let mut ratio = 0.0f64;
        let mut amax = 0.0f64;
        for (row, &nr2) in rownorm2.iter().enumerate() {
            if nr2 > 0.0 {
                let an = nr2.sqrt();
                ratio = ratio.max((1.0 + p.b[row].abs()) / (1.0 + an));
                amax = amax.max(an);
            }
        }
        let xi = 10f64.max(n.sqrt()).max(n * ratio);
        let eta = 10f64.max(n.sqrt()).max(amax).max(blk.c.norm());
        x.push(DMatrix::identity(blk.dim, blk.dim) * xi);
        z.push(DMatrix::identity(blk.dim, blk.dim) * eta);
    }
    let (mut xl, mut zl) = {
        let n = nl as f64;
        let mut ratio = 0.0f64;
        let mut amax = 0.0f64;
        for j in 0..nl {
            let an = p.lp.cols[j].iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
            for &(row, _) in &p.lp.cols[j] {
                ratio = ratio.max((1.0 + p.b[row].abs()) / (1.0 + an));
            }
            amax = amax.max(an);
        }
        let cl = inf_norm(&p.lp.c);
        let xi = 10f64.max(n.sqrt()).max(n * ratio);
        let eta = 10f64.max(n.sqrt()).max(amax).max(cl);
        (vec![xi; nl], vec![eta; nl])
    };
    let mut xf = vec![0.0; nf];
    let mut y = vec![0.0; m];

    let af = DMatrix::from_fn(m, nf, |i, j| p.free.cols[j].iter().filter(|(r, _)| *r == i).map(|(_, c)| c).sum());

    let mut status = SdpStatus::NumericalTrouble;
    let mut message = String::from("iteration limit reached");
    let mut iterations = 0;
    let mut stalls = 0;
    let mut mu = 0.0;
    let mut pinf = f64::INFINITY;
    let mut dinf = f64::INFINITY;
    let mut best_merit = f64::INFINITY;
    let mut best = None;
    let mut since_best = 0;

    for it in 0..=opts.max_iters {
        iterations = it;
        // residuals
        let ax = p.apply(&x, &xl, &xf);
        let rp: Vec<f64> = p.b.iter().zip(&ax).map(|(bb, a)| bb - a).collect();
        let (aty, atyl, atyf) = p.adjoint(&y);
        let rd: Vec<DMatrix<f64>> = (0..nb).map(|k| &p.psd[k].c - &aty[k] - &z[k]).collect();
        let rdl: Vec<f64> = (0..nl).map(|j| p.lp.c[j] - atyl[j] - zl[j]).collect();
        let rf: Vec<f64> = (0..nf).map(|j| p.free.c[j] - atyf[j]).collect();
        let pobj = p.objective(&x, &xl, &xf);
        let dobj: f64 = p.b.iter().zip(&y).map(|(a, c)| a * c).sum();
        let compl: f64 =
            x.iter().zip(&z).map(|(a, c)| a.dot(c)).sum::<f64>() + xl.iter().zip(&zl).map(|(a, c)| a * c).sum::<f64>();
        mu = compl / nu;
        pinf = inf_norm(&rp) / (1.0 + bnorm);
        dinf = rd
            .iter()
            .map(mat_inf)
            .chain(rdl.iter().map(|v| v.abs()))
            .chain(rf.iter().map(|v| v.abs()))
            .fold(0.0f64, f64::max)
            / (1.0 + cnorm);
        let denom = 1.0 + pobj.abs() + dobj.abs();
        let gap = (pobj - dobj).abs() / denom;
        let cgap = compl.abs() / denom;
        log::trace!(
            "it {it:3} pobj {pobj:+.10e} dobj {dobj:+.10e} pinf {pinf:.2e} dinf {dinf:.2e} gap {gap:.2e} mu {mu:.2e}"
        );
        let merit = pinf.max(dinf).max(gap).max(cgap);
        if merit < 0.9 * best_merit {
            since_best = 0;
        } else {
            since_best += 1;
        }
        if merit < best_merit {
            best_merit = merit;
            best = Some((x.clone(), z.clone(), xl.clone(), zl.clone(), xf.clone(), y.clone(), mu, pinf, dinf));
        }
        if pinf <= opts.tol && dinf <= opts.tol && gap <= opts.tol && cgap <= opts.tol {
            status = SdpStatus::Optimal;
            message = "converged".into();
            break;
        }
        if dobj > DIVERGENCE * (1.0 + pobj.abs().min(DIVERGENCE)) && dinf <= 1e-6 * (1.0 + dobj.abs()) {
            status = SdpStatus::PrimalInfeasibleWitness;
            message = "dual objective diverges: primal infeasible".into();
            let s = -1.0 / dobj;
            y.iter_mut().for_each(|v| *v *= s);
            break;
        }
        if -pobj > DIVERGENCE * (1.0 + dobj.abs().min(DIVERGENCE)) && pinf <= 1e-6 * (1.0 + pobj.abs()) {
            message = "primal objective diverges: dual infeasible".into();
            break;
        }
        if it == opts.max_iters {
            break;
        }
        if since_best >= NO_PROGRESS_LIMIT {
            message = "no progress".into();
            break;
        }

        // scaling
        let nts: Option<Vec<Nt>> = x.iter().zip(&z).map(|(a, c)| nt_scaling(a, c)).collect();
        let Some(nts) = nts else {
            message = "iterate lost positive definiteness".into();
            break;
        };
        let ratio_l: Vec<f64> = xl.iter().zip(&zl).map(|(a, c)| a / c).collect();

        let mut mmat = DMatrix::zeros(m, m);
        for (blk, nt) in p.psd.iter().zip(&nts) {
            add_psd_schur(blk, &nt.w, &mut mmat);
        }
        for (j, col) in p.lp.cols.iter().enumerate() {
            for &(r, a) in col {
                for &(s, c) in col {
                    mmat[(r, s)] += ratio_l[j] * a * c;
                }
            }
        }
        let mmat = sym(&mmat);
        let Some(m_chol) = robust_cholesky(&mmat) else {
            message = "Schur complement is singular".into();
            break;
        };
        let free = if nf > 0 {
            let minv_af = m_chol.solve(&af);
            let s = sym(&(af.transpose() * &minv_af));
            match robust_cholesky(&s) {
                Some(c) => Some((minv_af, c)),
                None => {
                    message = "free-variable Schur complement is singular".into();
                    break;
                }
            }
        } else {
            None
        };
        let newton = Newton { m: mmat, m_chol, free, af: af.clone() };
        let rfv = DVector::from_vec(rf.clone());

        let direction = |rc: &[DMatrix<f64>], rcl: &[f64]| -> Direction {
            let mut h = rp.clone();
            let mut tmp = vec![0.0; m];
            for k in 0..nb {
                let v = &rc[k] - &nts[k].w * &rd[k] * &nts[k].w;
                p.psd[k].apply_add(&v, &mut tmp);
            }
            let vl: Vec<f64> = (0..nl).map(|j| rcl[j] - ratio_l[j] * rdl[j]).collect();
            p.lp.apply_add(&vl, &mut tmp);
            for (hv, t) in h.iter_mut().zip(&tmp) {
                *hv -= t;
            }
            let (dy, dxf) = newton.solve(&DVector::from_vec(h), &rfv);
            let mut dy: Vec<f64> = dy.iter().copied().collect();
            let mut dxf: Vec<f64> = dxf.iter().copied().collect();
            let (ady, adyl, _) = p.adjoint(&dy);
            let mut dz: Vec<DMatrix<f64>> = (0..nb).map(|k| &rd[k] - &ady[k]).collect();
            let mut dx: Vec<DMatrix<f64>> = (0..nb).map(|k| sym(&(&rc[k] - &nts[k].w * &dz[k] * &nts[k].w))).collect();
            let mut dzl: Vec<f64> = (0..nl).map(|j| rdl[j] - adyl[j]).collect();
            let mut dxl: Vec<f64> = (0..nl).map(|j| rcl[j] - ratio_l[j] * dzl[j]).collect();
            // refine against the operator actually applied to dx
            for _ in 0..REFINE_STEPS {
                let adx = p.apply(&dx, &dxl, &dxf);
                let e: Vec<f64> = rp.iter().zip(&adx).map(|(a, c)| a - c).collect();
                if inf_norm(&e) <= f64::EPSILON * (1.0 + bnorm) {
                    break;
                }
                let (cy, cf) = newton.solve(&DVector::from_vec(e), &DVector::zeros(nf));
                let cy: Vec<f64> = cy.iter().copied().collect();
                let (acy, acyl, _) = p.adjoint(&cy);
                for k in 0..nb {
                    dz[k] -= &acy[k];
                    dx[k] += sym(&(&nts[k].w * &acy[k] * &nts[k].w));
                }
                for j in 0..nl {
                    dzl[j] -= acyl[j];
                    dxl[j] += ratio_l[j] * acyl[j];
                }
                for (a, c) in dy.iter_mut().zip(cy.iter()) {
                    *a += c;
                }
                for (a, c) in dxf.iter_mut().zip(cf.iter()) {
                    *a += c;
                }
            }
            Direction { dx, dz, dxl, dzl, dxf, dy }
        };
        let steps = |d: &Direction| -> (f64, f64) {
            let mut ap = max_step_lp(&xl, &d.dxl);
            let mut ad = max_step_lp(&zl, &d.dzl);
            for k in 0..nb {
                ap = ap.min(max_step_psd(&nts[k].lx, &d.dx[k]));
                ad = ad.min(max_step_psd(&nts[k].lz, &d.dz[k]));
            }
            (ap, ad)
        };

        // predictor
        let rc_aff: Vec<DMatrix<f64>> = x.iter().map(|v| -v).collect();
        let rcl_aff: Vec<f64> = xl.iter().map(|v| -v).collect();
        let da = direction(&rc_aff, &rcl_aff);
        let (apa, ada) = steps(&da);
        let (apa, ada) = (apa.min(1.0), ada.min(1.0));
        let mut compl_aff = 0.0;
        for k in 0..nb {
            compl_aff += (&x[k] + &da.dx[k] * apa).dot(&(&z[k] + &da.dz[k] * ada));
        }
        for j in 0..nl {
            compl_aff += (xl[j] + apa * da.dxl[j]) * (zl[j] + ada * da.dzl[j]);
        }
        let mu_aff = (compl_aff / nu).max(0.0);
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        // corrector
        let mut rc: Vec<DMatrix<f64>> = Vec::with_capacity(nb);
        for k in 0..nb {
            let nt = &nts[k];
            let n = nt.d.len();
            let dxs = &nt.ginv * &da.dx[k] * nt.ginv.transpose();
            let dzs = nt.g.transpose() * &da.dz[k] * &nt.g;
            let prod = sym(&(&dxs * &dzs));
            let mut yk = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let mut r = -prod[(i, j)];
                    if i == j {
                        r += sigma * mu - nt.d[i] * nt.d[i];
                    }
                    yk[(i, j)] = 2.0 * r / (nt.d[i] + nt.d[j]);
                }
            }
            rc.push(&nt.g * yk * nt.g.transpose());
        }
        let rcl: Vec<f64> = (0..nl).map(|j| (sigma * mu - xl[j] * zl[j] - da.dxl[j] * da.dzl[j]) / zl[j]).collect();
        let dir = direction(&rc, &rcl);
        let (ap, ad) = steps(&dir);
        let gamma = 0.9 + 0.09 * apa.min(ada);
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);

        // backtrack until both iterates factor
        let (mut ap, mut ad) = (ap, ad);
        let mut accepted = None;
        for _ in 0..BACKTRACKS {
            let xn: Vec<DMatrix<f64>> = (0..nb).map(|k| sym(&(&x[k] + &dir.dx[k] * ap))).collect();
            let zn: Vec<DMatrix<f64>> = (0..nb).map(|k| sym(&(&z[k] + &dir.dz[k] * ad))).collect();
            let xln: Vec<f64> = (0..nl).map(|j| xl[j] + ap * dir.dxl[j]).collect();
            let zln: Vec<f64> = (0..nl).map(|j| zl[j] + ad * dir.dzl[j]).collect();
            let pd = xn.iter().chain(&zn).all(|v| Cholesky::new(v.clone()).is_some())
                && xln.iter().chain(&zln).all(|v| *v > 0.0);
            if pd {
                accepted = Some((xn, zn, xln, zln));
                break;
            }
            ap *= 0.5;
            ad *= 0.5;
        }
        let Some((xn, zn, xln, zln)) = accepted else {
            message = "iterate lost positive definiteness".into();
            break;
        };
        x = xn;
        z = zn;
        xl = xln;
        zl = zln;
        for j in 0..nf {
            xf[j] += ap * dir.dxf[j];
        }
        for i in 0..m {
            y[i] += ad * dir.dy[i];
        }
        if ap < STALL_STEP && ad < STALL_STEP {
            stalls += 1;
            if stalls >= STALL_LIMIT {
                message = "step length stalled".into();
                break;
            }
        } else {
            stalls = 0;
        }
    }

    if status == SdpStatus::NumericalTrouble {
        if let Some((bx, bz, bxl, bzl, bxf, by, bmu, bp, bd)) = best {
            (x, z, xl, zl, xf, y, mu, pinf, dinf) = (bx, bz, bxl, bzl, bxf, by, bmu, bp, bd);
        }
    }
    let primal_obj = p.objective(&x, &xl, &xf);
    let dual_obj = b.dot(&DVector::from_column_slice(&y));
    SdpSolution {
        status,
        x,
        x_lp: xl,
        x_free: xf,
        y: DVector::from_vec(y),
        z,
        z_lp: zl,
        primal_obj,
        dual_obj,
        mu_final: mu,
        iterations,
        primal_residual: pinf,
        dual_residual: dinf,
        message,
    }
}
