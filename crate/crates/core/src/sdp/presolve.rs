//! Redundant equality-row removal.
//!
//! Rows owning a private column (a column with no other nonzero among the
//! remaining rows) are independent of everything else and are peeled first.
//! The rest goes through Gram-Schmidt with largest-norm pivoting; dependent
//! rows are checked for consistency by carrying `b` along the elimination.

use std::collections::BTreeMap;

use super::SdpProblem;

pub(crate) struct Presolve {
    /// Original row -> reduced row, `None` for dropped rows.
    pub row_map: Vec<Option<usize>>,
    pub kept: usize,
    /// Farkas vector over the original rows when the rows are inconsistent:
    /// `A^T w = 0`, `b^T w = -1`.
    pub inconsistency: Option<Vec<f64>>,
}

fn sparse_rows(p: &SdpProblem) -> Vec<Vec<(usize, f64)>> {
    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); p.m()];
    let mut col = 0usize;
    for blk in &p.psd {
        for r in 0..blk.n_raw() {
            for &(row, c) in blk.lift(r) {
                *rows[row].entry(col).or_insert(0.0) += c;
            }
            col += 1;
        }
    }
    for lin in [&p.lp, &p.free] {
        for j in 0..lin.len() {
            for &(row, c) in lin.col(j) {
                *rows[row].entry(col).or_insert(0.0) += c;
            }
            col += 1;
        }
    }
    rows.into_iter().map(|r| r.into_iter().filter(|(_, v)| *v != 0.0).collect()).collect()
}

pub(crate) fn reduce(p: &SdpProblem, rank_tol: f64) -> Presolve {
    let m = p.m();
    let rows = sparse_rows(p);
    let ncols = rows.iter().flatten().map(|(c, _)| c + 1).max().unwrap_or(0);
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); ncols];
    for (i, r) in rows.iter().enumerate() {
        for &(c, _) in r {
            col_rows[c].push(i);
        }
    }
    let mut active = vec![true; m];
    let mut count: Vec<usize> = col_rows.iter().map(Vec::len).collect();
    let mut independent = vec![false; m];
    let mut stack: Vec<usize> = (0..ncols).filter(|&c| count[c] == 1).collect();
    stack.reverse();
    while let Some(c) = stack.pop() {
        if count[c] != 1 {
            continue;
        }
        let Some(&row) = col_rows[c].iter().find(|&&r| active[r]) else { continue };
        active[row] = false;
        independent[row] = true;
        for &(c2, _) in &rows[row] {
            count[c2] -= 1;
            if count[c2] == 1 {
                stack.push(c2);
            }
        }
    }

    let rest: Vec<usize> = (0..m).filter(|&i| active[i]).collect();
    let mut inconsistency = None;
    if !rest.is_empty() {
        let (indep, bad) = eliminate(&rows, &rest, &p.b, rank_tol);
        for i in indep {
            independent[i] = true;
        }
        if let Some(w_local) = bad {
            let mut w = vec![0.0; m];
            for (k, &i) in rest.iter().enumerate() {
                w[i] = w_local[k];
            }
            inconsistency = Some(w);
        }
    }

    let mut row_map = vec![None; m];
    let mut kept = 0;
    for i in 0..m {
        if independent[i] {
            row_map[i] = Some(kept);
            kept += 1;
        }
    }
    Presolve { row_map, kept, inconsistency }
}

/// Gram-Schmidt with pivoting on the rows `rest`. Returns independent rows and,
/// if some dependent row has a mismatched right-hand side, a Farkas vector
/// indexed like `rest`.
fn eliminate(rows: &[Vec<(usize, f64)>], rest: &[usize], b: &[f64], rank_tol: f64) -> (Vec<usize>, Option<Vec<f64>>) {
    let k = rest.len();
    let mut local: BTreeMap<usize, usize> = BTreeMap::new();
    for &i in rest {
        for &(c, _) in &rows[i] {
            let next = local.len();
            local.entry(c).or_insert(next);
        }
    }
    let nc = local.len();
    let mut v: Vec<Vec<f64>> = rest
        .iter()
        .map(|&i| {
            let mut d = vec![0.0; nc];
            for &(c, x) in &rows[i] {
                d[local[&c]] = x;
            }
            d
        })
        .collect();
    let mut rhs: Vec<f64> = rest.iter().map(|&i| b[i]).collect();
    let mut comb: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            e
        })
        .collect();
    let norm = |x: &[f64]| x.iter().map(|t| t * t).sum::<f64>().sqrt();
    let max0 = v.iter().map(|x| norm(x)).fold(0.0, f64::max);
    let bscale = b.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut done = vec![false; k];
    let mut indep = Vec::new();
    loop {
        let mut best = None;
        let mut best_n = 0.0;
        for j in 0..k {
            if !done[j] {
                let nj = norm(&v[j]);
                if nj > best_n {
                    best_n = nj;
                    best = Some(j);
                }
            }
        }
        let Some(piv) = best else { break };
        if best_n <= rank_tol * max0 || max0 == 0.0 {
            break;
        }
        done[piv] = true;
        indep.push(rest[piv]);
        let inv = 1.0 / best_n;
        v[piv].iter_mut().for_each(|x| *x *= inv);
        rhs[piv] *= inv;
        comb[piv].iter_mut().for_each(|x| *x *= inv);
        let (q, qb, qc) = (v[piv].clone(), rhs[piv], comb[piv].clone());
        for j in 0..k {
            if done[j] {
                continue;
            }
            let t: f64 = q.iter().zip(&v[j]).map(|(a, b)| a * b).sum();
            if t != 0.0 {
                v[j].iter_mut().zip(&q).for_each(|(x, y)| *x -= t * y);
                rhs[j] -= t * qb;
                comb[j].iter_mut().zip(&qc).for_each(|(x, y)| *x -= t * y);
            }
        }
    }
    let mut witness = None;
    for j in 0..k {
        if done[j] {
            continue;
        }
        let c1: f64 = comb[j].iter().map(|x| x.abs()).sum();
        if rhs[j].abs() > 1e-9 * (1.0 + bscale) * c1.max(1.0) {
            let s = -1.0 / rhs[j];
            witness = Some(comb[j].iter().map(|x| x * s).collect());
            break;
        }
    }
    indep.sort_unstable();
    (indep, witness)
}
