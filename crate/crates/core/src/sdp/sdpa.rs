//! Problem dump in the SDPA sparse format (`.dat-s`).
//!
//! The file encodes the SDPA dual form `max <F0, Y> s.t. <Fi, Y> = c_i,
//! Y PSD` with `F0 = -C`, `Fi = A_i`, `c = b`, so the SDPA optimum is the
//! negated optimum of this crate's primal. LP variables become one diagonal
//! block; each free variable is split into a nonnegative pair `x+ - x-` in a
//! trailing diagonal block.

use std::collections::BTreeMap;
use std::fmt::Write;

use nalgebra::DMatrix;

use super::{LinearBlock, PsdBlock, SdpProblem};
use crate::error::{Error, Result};

pub fn write(p: &SdpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\"coposhier SDP dump: SDPA F0 = -C\"");
    let _ = writeln!(out, "{}", p.m());
    let mut structure: Vec<i64> = p.psd.iter().map(|b| b.dim() as i64).collect();
    if !p.lp.is_empty() {
        structure.push(-(p.lp.len() as i64));
    }
    if !p.free.is_empty() {
        structure.push(-(2 * p.free.len() as i64));
    }
    let _ = writeln!(out, "{}", structure.len());
    let _ = writeln!(out, "{}", structure.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "));
    let _ = writeln!(out, "{}", p.b.iter().map(|v| fmt(*v)).collect::<Vec<_>>().join(" "));

    // entries keyed by (matno, blkno, i, j) for deterministic order
    let mut entries: BTreeMap<(usize, usize, usize, usize), f64> = BTreeMap::new();
    for (k, blk) in p.psd.iter().enumerate() {
        let n = blk.dim();
        let c = blk.objective();
        for i in 0..n {
            for j in i..n {
                if c[(i, j)] != 0.0 {
                    *entries.entry((0, k + 1, i + 1, j + 1)).or_insert(0.0) -= c[(i, j)];
                }
                if let Some(r) = blk.raw_of(i, j) {
                    for &(row, coef) in blk.lift(r) {
                        *entries.entry((row + 1, k + 1, i + 1, j + 1)).or_insert(0.0) += coef;
                    }
                }
            }
        }
    }
    let mut blkno = p.psd.len();
    if !p.lp.is_empty() {
        blkno += 1;
        for j in 0..p.lp.len() {
            if p.lp.cost(j) != 0.0 {
                *entries.entry((0, blkno, j + 1, j + 1)).or_insert(0.0) -= p.lp.cost(j);
            }
            for &(row, coef) in p.lp.col(j) {
                *entries.entry((row + 1, blkno, j + 1, j + 1)).or_insert(0.0) += coef;
            }
        }
    }
    if !p.free.is_empty() {
        blkno += 1;
        for j in 0..p.free.len() {
            for (pos, sign) in [(2 * j + 1, 1.0), (2 * j + 2, -1.0)] {
                if p.free.cost(j) != 0.0 {
                    *entries.entry((0, blkno, pos, pos)).or_insert(0.0) -= sign * p.free.cost(j);
                }
                for &(row, coef) in p.free.col(j) {
                    *entries.entry((row + 1, blkno, pos, pos)).or_insert(0.0) += sign * coef;
                }
            }
        }
    }
    for ((mat, blk, i, j), v) in entries {
        if v != 0.0 {
            let _ = writeln!(out, "{mat} {blk} {i} {j} {}", fmt(v));
        }
    }
    out
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

/// Parses a `.dat-s` file back into a problem. PSD blocks use the generic
/// entry constructor; diagonal blocks become LP variables.
pub fn parse(text: &str) -> Result<SdpProblem> {
    let err = |m: &str| Error::Parse(format!("SDPA: {m}"));
    let mut lines =
        text.lines().map(|l| l.trim()).filter(|l| !l.is_empty() && !l.starts_with('"') && !l.starts_with('*'));
    let nums = |l: &str| -> Vec<String> {
        l.replace([',', '{', '}', '(', ')'], " ").split_whitespace().map(str::to_string).collect()
    };
    let m: usize = lines
        .next()
        .ok_or_else(|| err("missing m"))?
        .split_whitespace()
        .next()
        .unwrap_or("")
        .parse()
        .map_err(|_| err("bad m"))?;
    let nblocks: usize = lines
        .next()
        .ok_or_else(|| err("missing block count"))?
        .split_whitespace()
        .next()
        .unwrap_or("")
        .parse()
        .map_err(|_| err("bad block count"))?;
    let structure: Vec<i64> = nums(lines.next().ok_or_else(|| err("missing block structure"))?)
        .iter()
        .take(nblocks)
        .map(|s| s.parse().map_err(|_| err("bad block structure")))
        .collect::<Result<_>>()?;
    if structure.len() != nblocks {
        return Err(err("block structure length"));
    }
    let b: Vec<f64> = nums(lines.next().ok_or_else(|| err("missing c vector"))?)
        .iter()
        .take(m)
        .map(|s| s.parse().map_err(|_| err("bad c vector")))
        .collect::<Result<_>>()?;
    if b.len() != m {
        return Err(err("c vector length"));
    }
    let mut psd_entries: Vec<Vec<(usize, usize, usize, f64)>> = vec![Vec::new(); nblocks];
    let mut psd_obj: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); nblocks];
    let mut diag: Vec<BTreeMap<usize, (Vec<(usize, f64)>, f64)>> = vec![BTreeMap::new(); nblocks];
    for l in lines {
        let f = nums(l);
        if f.len() < 5 {
            return Err(err(&format!("bad entry line `{l}`")));
        }
        let ints: Vec<usize> =
            f[..4].iter().map(|s| s.parse().map_err(|_| err("bad entry index"))).collect::<Result<_>>()?;
        let v: f64 = f[4].parse().map_err(|_| err("bad entry value"))?;
        let (mat, blk, i, j) = (ints[0], ints[1], ints[2], ints[3]);
        if blk == 0 || blk > nblocks || mat > m || i == 0 || j == 0 {
            return Err(err(&format!("entry out of range `{l}`")));
        }
        let size = structure[blk - 1];
        if size < 0 {
            if i != j || i as i64 > -size {
                return Err(err("off-diagonal entry in diagonal block"));
            }
            let e = diag[blk - 1].entry(i).or_insert((Vec::new(), 0.0));
            if mat == 0 {
                e.1 -= v;
            } else {
                e.0.push((mat - 1, v));
            }
        } else {
            if i as i64 > size || j as i64 > size {
                return Err(err("entry outside block"));
            }
            if mat == 0 {
                psd_obj[blk - 1].push((i - 1, j - 1, -v));
            } else {
                psd_entries[blk - 1].push((mat - 1, i - 1, j - 1, v));
            }
        }
    }
    let mut p = SdpProblem::new(b);
    let mut lp = LinearBlock::new();
    for (k, &size) in structure.iter().enumerate() {
        if size > 0 {
            let n = size as usize;
            let mut c = DMatrix::zeros(n, n);
            for &(i, j, v) in &psd_obj[k] {
                c[(i, j)] = v;
                c[(j, i)] = v;
            }
            p.psd.push(PsdBlock::from_entries(n, psd_entries[k].clone()).with_objective(c));
        } else {
            for i in 1..=(-size) as usize {
                let (col, cost) = diag[k].remove(&i).unwrap_or((Vec::new(), 0.0));
                lp.push(col, cost);
            }
        }
    }
    p.lp = lp;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::{solve, SdpOptions, SdpStatus};

    #[test]
    fn round_trip_preserves_optimum() {
        let blk = PsdBlock::from_entries(2, [(0, 0, 0, 1.0), (1, 0, 1, 1.0), (1, 1, 1, 0.5)])
            .with_objective(DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]));
        let mut p = SdpProblem::new(vec![1.0, 0.25]);
        p.psd.push(blk);
        p.lp.push(vec![(1, 1.0)], 0.3);
        p.free.push(vec![(0, 1.0), (1, -1.0)], 0.1);
        let text = write(&p);
        let q = parse(&text).unwrap();
        assert_eq!(q.m(), 2);
        assert_eq!(q.lp.len(), 3);
        let a = solve(&p, &SdpOptions::default()).unwrap();
        let b = solve(&q, &SdpOptions::default()).unwrap();
        assert_eq!(a.status, SdpStatus::Optimal);
        assert_eq!(b.status, SdpStatus::Optimal);
        assert!((a.primal_obj - b.primal_obj).abs() < 1e-7, "{} vs {}", a.primal_obj, b.primal_obj);
        assert_eq!(write(&q).lines().nth(3).unwrap(), "2 -3");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("").is_err());
        assert!(parse("1\n1\n2\n1.0\n1 2 1 1 1.0\n").is_err());
    }
}
