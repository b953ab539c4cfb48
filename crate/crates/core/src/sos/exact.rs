//! Rounding of float certificates to exact rational ones.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{Reduction, SosProblem};
use crate::poly::{reduce_mod_simplex_ideal, reduce_mod_sphere_ideal, Monomial, Polynomial};
use crate::scalar::best_rational;

type Q = BigRational;

/// Largest denominator used when rounding float entries.
pub const MAX_DENOMINATOR: i64 = 10_000;

fn reduce(p: &Polynomial<Q>, kind: Reduction) -> Polynomial<Q> {
    match kind {
        Reduction::None => p.clone(),
        Reduction::Sphere => reduce_mod_sphere_ideal(p),
        Reduction::Simplex => reduce_mod_simplex_ideal(p),
    }
}

/// Rounds, projects exactly onto the coefficient equations and checks PSD
/// exactly. Returns `None` when any step fails.
pub(crate) fn rationalize(p: &SosProblem, gram: &[DMatrix<f64>], mult: &[f64]) -> Option<(Vec<DMatrix<Q>>, Vec<Q>)> {
    let target = reduce(p.target.exact.as_ref()?, p.reduction);
    let mut rows: HashMap<Monomial, usize> = HashMap::new();
    let row_of = |m: &Monomial, rows: &mut HashMap<Monomial, usize>| -> usize {
        let k = rows.len();
        *rows.entry(m.clone()).or_insert(k)
    };

    // per block: raw monomial -> (entry positions, lift)
    struct Raw {
        entries: Vec<(usize, usize)>,
        lift: Vec<(usize, Q)>,
    }
    let mut blocks: Vec<Vec<Raw>> = Vec::new();
    for blk in &p.blocks {
        let n = blk.dim();
        let mut ids: BTreeMap<Monomial, usize> = BTreeMap::new();
        let mut raws: Vec<Raw> = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let gamma = blk.basis[i].mul(&blk.basis[j]);
                let id = match ids.get(&gamma) {
                    Some(&id) => id,
                    None => {
                        let lifted = reduce(&blk.multiplier.mul_monomial(&gamma), p.reduction);
                        let lift = lifted.terms().map(|(m, c)| (row_of(m, &mut rows), c.clone())).collect();
                        raws.push(Raw { entries: Vec::new(), lift });
                        ids.insert(gamma, raws.len() - 1);
                        raws.len() - 1
                    }
                };
                raws[id].entries.push((i, j));
            }
        }
        blocks.push(raws);
    }
    let free: Vec<Vec<(usize, Q)>> = p
        .free_scalars
        .iter()
        .map(|f| reduce(&f.multiplier, p.reduction).terms().map(|(m, c)| (row_of(m, &mut rows), c.clone())).collect())
        .collect();
    let target_rows: Vec<(usize, Q)> = target.terms().map(|(m, c)| (row_of(m, &mut rows), c.clone())).collect();
    let m = rows.len();

    // rounding
    let mut g: Vec<DMatrix<Q>> = gram
        .iter()
        .map(|gf| {
            let n = gf.nrows();
            let mut out = DMatrix::from_element(n, n, Q::zero());
            for i in 0..n {
                for j in i..n {
                    let v = best_rational(0.5 * (gf[(i, j)] + gf[(j, i)]), MAX_DENOMINATOR);
                    out[(i, j)] = v.clone();
                    out[(j, i)] = v;
                }
            }
            out
        })
        .collect();
    let mut c: Vec<Q> = mult.iter().map(|v| best_rational(*v, MAX_DENOMINATOR)).collect();

    // residual r = target - A(G) - H c
    let mut r = vec![Q::zero(); m];
    for (row, v) in &target_rows {
        r[*row] += v;
    }
    for (raws, gk) in blocks.iter().zip(&g) {
        for raw in raws {
            let s: Q = raw.entries.iter().fold(Q::zero(), |a, &(i, j)| a + &gk[(i, j)]);
            if s.is_zero() {
                continue;
            }
            for (row, coef) in &raw.lift {
                r[*row] -= &s * coef;
            }
        }
    }
    for (col, cj) in free.iter().zip(&c) {
        for (row, coef) in col {
            r[*row] -= cj * coef;
        }
    }

    // normal equations N u = r with N = A A^T
    let mut nmat: Vec<BTreeMap<usize, Q>> = vec![BTreeMap::new(); m];
    let add_outer = |col: &[(usize, Q)], w: &Q, nmat: &mut Vec<BTreeMap<usize, Q>>| {
        for (p1, a) in col {
            for (p2, b) in col {
                let e = nmat[*p1].entry(*p2).or_insert_with(Q::zero);
                *e += a * b * w;
            }
        }
    };
    for raws in &blocks {
        for raw in raws {
            let cnt = Q::from_integer((raw.entries.len() as i64).into());
            add_outer(&raw.lift, &cnt, &mut nmat);
        }
    }
    let one = Q::from_integer(1.into());
    for col in &free {
        add_outer(col, &one, &mut nmat);
    }
    let u = solve_sparse(nmat, r)?;

    // G += A^*(u), c += H^T u
    for (raws, gk) in blocks.iter().zip(g.iter_mut()) {
        for raw in raws {
            let w: Q = raw.lift.iter().fold(Q::zero(), |a, (row, coef)| a + coef * &u[*row]);
            if w.is_zero() {
                continue;
            }
            for &(i, j) in &raw.entries {
                gk[(i, j)] += &w;
            }
        }
    }
    for (col, cj) in free.iter().zip(c.iter_mut()) {
        let w: Q = col.iter().fold(Q::zero(), |a, (row, coef)| a + coef * &u[*row]);
        *cj += w;
    }
    if g.iter().all(is_psd_exact) {
        Some((g, c))
    } else {
        None
    }
}

/// Gauss-Jordan elimination on sparse rational rows. Singular systems are
/// accepted when consistent (free unknowns set to zero).
fn solve_sparse(mut rows: Vec<BTreeMap<usize, Q>>, mut rhs: Vec<Q>) -> Option<Vec<Q>> {
    let m = rows.len();
    for r in rows.iter_mut() {
        r.retain(|_, v| !v.is_zero());
    }
    let mut pivot_row_of_col: Vec<Option<usize>> = vec![None; m];
    let mut used = vec![false; m];
    for col in 0..m {
        let Some(piv) = (0..m).filter(|&i| !used[i] && rows[i].contains_key(&col)).min_by_key(|&i| rows[i].len())
        else {
            continue;
        };
        used[piv] = true;
        pivot_row_of_col[col] = Some(piv);
        let inv = Q::from_integer(1.into()) / rows[piv][&col].clone();
        let prow: Vec<(usize, Q)> = rows[piv].iter().map(|(k, v)| (*k, v * &inv)).collect();
        let prhs = &rhs[piv] * &inv;
        rows[piv] = prow.iter().cloned().collect();
        rhs[piv] = prhs.clone();
        for i in 0..m {
            if i == piv {
                continue;
            }
            let Some(f) = rows[i].get(&col).cloned() else { continue };
            for (k, v) in &prow {
                let e = rows[i].entry(*k).or_insert_with(Q::zero);
                *e -= &f * v;
                if e.is_zero() {
                    rows[i].remove(k);
                }
            }
            let t = &f * &prhs;
            rhs[i] -= t;
        }
    }
    for i in 0..m {
        if !used[i] && !rhs[i].is_zero() {
            return None;
        }
    }
    let mut u = vec![Q::zero(); m];
    for col in 0..m {
        if let Some(r) = pivot_row_of_col[col] {
            u[col] = rhs[r].clone();
        }
    }
    Some(u)
}

/// Exact PSD test by symmetric Gaussian elimination (LDL^T without pivoting;
/// a zero pivot requires a zero remaining row).
pub(crate) fn is_psd_exact(a: &DMatrix<Q>) -> bool {
    let n = a.nrows();
    let mut m: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)].clone()).collect()).collect();
    for k in 0..n {
        let d = m[k][k].clone();
        if d.is_negative() {
            return false;
        }
        if d.is_zero() {
            if (k + 1..n).any(|j| !m[k][j].is_zero()) {
                return false;
            }
            continue;
        }
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let f = &m[i][k] / &d;
            for j in i..n {
                if m[k][j].is_zero() {
                    continue;
                }
                let t = &f * &m[k][j];
                m[i][j] -= t;
                if j != i {
                    m[j][i] = m[i][j].clone();
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::SymMatrix;
    use crate::scalar::{rat, rat_int};
    use crate::sos::{formulate, ConeId};

    #[test]
    fn exact_psd_test() {
        let psd = DMatrix::from_row_slice(2, 2, &[rat_int(1), rat_int(-1), rat_int(-1), rat_int(1)]);
        assert!(is_psd_exact(&psd));
        let ind = DMatrix::from_row_slice(2, 2, &[rat_int(1), rat_int(2), rat_int(2), rat_int(1)]);
        assert!(!is_psd_exact(&ind));
        let zero_pivot = DMatrix::from_row_slice(2, 2, &[rat_int(0), rat(1, 2), rat(1, 2), rat_int(1)]);
        assert!(!is_psd_exact(&zero_pivot));
    }

    #[test]
    fn identity_in_k0_rationalizes() {
        // x^T I x in squared form: sum x_i^4 with Gram = identity on the squares
        let m = SymMatrix::identity(3);
        let p = formulate(&m, ConeId::k(0)).unwrap();
        let n = p.blocks[0].dim();
        let mut g = DMatrix::zeros(n, n);
        for (i, z) in p.blocks[0].basis.iter().enumerate() {
            if z.exponents().contains(&2) {
                g[(i, i)] = 1.0 + 1e-9;
            }
        }
        let (ge, _) = rationalize(&p, &[g], &[]).unwrap();
        let res = crate::sos::certificate::exact_residual(&p, &ge, &[]).unwrap();
        assert_eq!(res, 0.0);
    }
}
