use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{Reduction, SosProblem};
use crate::poly::{reduce_mod_simplex_ideal, reduce_mod_sphere_ideal, Monomial, Polynomial};
use crate::sdp::{LinearBlock, PsdBlock, SdpProblem, NO_RAW};

type Terms = Vec<(Monomial, f64)>;

/// Where an SOS block ended up in the SDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Psd(usize),
    Lp(usize),
}

/// An SOS problem lowered to an SDP, with the right-hand side divided by
/// `scale` (the largest target coefficient).
#[derive(Debug, Clone)]
pub struct Lowered {
    pub sdp: SdpProblem,
    pub rows: Vec<Monomial>,
    pub scale: f64,
    pub block_slot: Vec<Slot>,
    /// Free-block index of each free scalar.
    pub free_slot: Vec<usize>,
}

struct Reducer {
    kind: Reduction,
    cache: HashMap<Monomial, Terms>,
}

impl Reducer {
    fn new(kind: Reduction) -> Self {
        Reducer { kind, cache: HashMap::new() }
    }

    fn monomial(&mut self, m: &Monomial) -> Terms {
        match self.kind {
            Reduction::None => vec![(m.clone(), 1.0)],
            Reduction::Sphere | Reduction::Simplex => {
                if let Some(t) = self.cache.get(m) {
                    return t.clone();
                }
                let mono = Polynomial::monomial(m.clone(), 1.0f64);
                let p = if self.kind == Reduction::Sphere {
                    reduce_mod_sphere_ideal(&mono)
                } else {
                    reduce_mod_simplex_ideal(&mono)
                };
                let t: Terms = p.terms().map(|(k, c)| (k.clone(), *c)).collect();
                self.cache.insert(m.clone(), t.clone());
                t
            }
        }
    }

    fn poly(&mut self, p: &Polynomial<f64>) -> Terms {
        let mut acc: BTreeMap<Monomial, f64> = BTreeMap::new();
        for (m, c) in p.terms() {
            for (k, v) in self.monomial(m) {
                *acc.entry(k).or_insert(0.0) += c * v;
            }
        }
        acc.into_iter().filter(|(_, v)| *v != 0.0).collect()
    }
}

struct BlockLift {
    raw_of: Vec<u32>,
    lifts: Vec<Terms>,
}

struct Built {
    blocks: Vec<BlockLift>,
    free: Vec<Terms>,
    target: Terms,
}

fn build(p: &SosProblem) -> Built {
    let mut red = Reducer::new(p.reduction);
    let mut blocks = Vec::with_capacity(p.blocks.len());
    for blk in &p.blocks {
        let g = blk.multiplier.to_f64();
        let n = blk.dim();
        let mut raw_ids: HashMap<Monomial, u32> = HashMap::new();
        let mut raw_of = vec![NO_RAW; n * n];
        let mut lifts: Vec<Terms> = Vec::new();
        for i in 0..n {
            for j in i..n {
                let gamma = blk.basis[i].mul(&blk.basis[j]);
                let id = match raw_ids.get(&gamma) {
                    Some(&id) => id,
                    None => {
                        let id = lifts.len() as u32;
                        lifts.push(red.poly(&g.mul_monomial(&gamma)));
                        raw_ids.insert(gamma, id);
                        id
                    }
                };
                raw_of[i * n + j] = id;
                raw_of[j * n + i] = id;
            }
        }
        blocks.push(BlockLift { raw_of, lifts });
    }
    let free = p.free_scalars.iter().map(|f| red.poly(&f.multiplier.to_f64())).collect();
    let target = red.poly(&p.target.float);
    Built { blocks, free, target }
}

fn rows_of(b: &Built) -> Vec<Monomial> {
    let mut set: BTreeSet<Monomial> = BTreeSet::new();
    for blk in &b.blocks {
        for l in &blk.lifts {
            set.extend(l.iter().map(|(m, _)| m.clone()));
        }
    }
    for f in &b.free {
        set.extend(f.iter().map(|(m, _)| m.clone()));
    }
    set.extend(b.target.iter().map(|(m, _)| m.clone()));
    set.into_iter().collect()
}

pub(crate) fn row_monomials(p: &SosProblem) -> Vec<Monomial> {
    rows_of(&build(p))
}

pub fn lower(p: &SosProblem) -> Lowered {
    let built = build(p);
    let rows = rows_of(&built);
    let index: HashMap<&Monomial, usize> = rows.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let to_rows = |t: &Terms| -> Vec<(usize, f64)> { t.iter().map(|(m, c)| (index[m], *c)).collect() };

    let scale = built.target.iter().fold(0.0f64, |a, (_, c)| a.max(c.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut b = vec![0.0; rows.len()];
    for (m, c) in &built.target {
        b[index[m]] = c / scale;
    }
    let mut sdp = SdpProblem::new(b);
    let mut lp = LinearBlock::new();
    let mut block_slot = Vec::with_capacity(p.blocks.len());
    for (blk, bl) in p.blocks.iter().zip(&built.blocks) {
        if blk.dim() == 1 {
            let j = lp.push(to_rows(&bl.lifts[0]), 0.0);
            block_slot.push(Slot::Lp(j));
        } else {
            let lift = bl.lifts.iter().map(&to_rows).collect();
            sdp.psd.push(PsdBlock::structured(blk.dim(), bl.raw_of.clone(), lift));
            block_slot.push(Slot::Psd(sdp.psd.len() - 1));
        }
    }
    sdp.lp = lp;
    let mut free = LinearBlock::new();
    let mut free_slot = Vec::new();
    for (k, f) in built.free.iter().enumerate() {
        let cost = if p.maximize == Some(k) { -1.0 } else { 0.0 };
        free_slot.push(free.push(to_rows(f), cost));
    }
    sdp.free = free;
    Lowered { sdp, rows, scale, block_slot, free_slot }
}
