//! Symmetric matrices and the constructors for the matrix families studied
//! here: the Horn matrix, the `T(psi)` family, graph matrices, positive
//! diagonal scalings and simultaneous row/column permutations.
//!
//! Matrices built from rational data (Horn, graph matrices, rational
//! scalings) are stored exactly; `T(psi)` is stored in binary64.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, rat_int, rational_to_f64, Coeff};

/// Storage mode of a [`SymMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rational,
    Float,
}

#[derive(Debug, Clone, PartialEq)]
enum Entries {
    Rational(Vec<BigRational>),
    Float(Vec<f64>),
}

/// Dense symmetric `n x n` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    entries: Entries,
}

impl SymMatrix {
    pub fn from_rational(n: usize, entries: Vec<BigRational>) -> Result<Self> {
        check_shape(n, entries.len())?;
        for i in 0..n {
            for j in (i + 1)..n {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        Ok(SymMatrix { n, entries: Entries::Rational(entries) })
    }

    pub fn from_f64(n: usize, entries: Vec<f64>) -> Result<Self> {
        check_shape(n, entries.len())?;
        for (k, v) in entries.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Parse(format!("non-finite entry at index {k}")));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        Ok(SymMatrix { n, entries: Entries::Float(entries) })
    }

    /// Integer matrix, stored exactly.
    pub fn from_i64(n: usize, entries: &[i64]) -> Result<Self> {
        Self::from_rational(n, entries.iter().map(|&v| rat_int(v)).collect())
    }

    /// Builds a float matrix from a function on the upper triangle.
    pub fn from_fn_f64(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                e[i * n + j] = v;
                e[j * n + i] = v;
            }
        }
        SymMatrix { n, entries: Entries::Float(e) }
    }

    fn from_fn_rational(n: usize, f: impl Fn(usize, usize) -> BigRational) -> Self {
        let mut e = vec![BigRational::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                e[j * n + i] = v.clone();
                e[i * n + j] = v;
            }
        }
        SymMatrix { n, entries: Entries::Rational(e) }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn_rational(n, |i, j| if i == j { BigRational::one() } else { BigRational::zero() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        match self.entries {
            Entries::Rational(_) => Mode::Rational,
            Entries::Float(_) => Mode::Float,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.mode() == Mode::Rational
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.entries {
            Entries::Rational(e) => rational_to_f64(&e[i * self.n + j]),
            Entries::Float(e) => e[i * self.n + j],
        }
    }

    /// Exact value of an entry; float entries convert exactly to dyadic rationals.
    pub fn get_exact(&self, i: usize, j: usize) -> BigRational {
        match &self.entries {
            Entries::Rational(e) => e[i * self.n + j].clone(),
            Entries::Float(e) => BigRational::from_f64(e[i * self.n + j]),
        }
    }

    pub fn entry<C: Coeff>(&self, i: usize, j: usize) -> C {
        match &self.entries {
            Entries::Rational(e) => C::from_rational(&e[i * self.n + j]),
            Entries::Float(e) => C::from_f64(e[i * self.n + j]),
        }
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Converts to float storage.
    pub fn to_float(&self) -> SymMatrix {
        Self::from_fn_f64(self.n, |i, j| self.get(i, j))
    }

    pub fn principal_submatrix(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        (0..self.n * self.n).map(|k| self.get(k / self.n, k % self.n).abs()).fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum()).collect()
    }

    pub fn quad_value(&self, x: &[f64]) -> f64 {
        let mx = self.mul_vec(x);
        x.iter().zip(&mx).map(|(a, b)| a * b).sum()
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = match &self.entries {
            Entries::Rational(e) => e.iter().map(|q| Value::String(format_rational(q))).collect(),
            Entries::Float(e) => e.iter().map(|&v| serde_json::json!(v)).collect(),
        };
        serde_json::json!({ "n": self.n, "entries": entries, "mode": self.mode() })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("matrix JSON: missing integer field `n`".into()))? as usize;
        let entries = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("matrix JSON: missing array field `entries`".into()))?;
        let mode = match v.get("mode").and_then(Value::as_str) {
            Some("rational") => Mode::Rational,
            Some("float") | None => Mode::Float,
            Some(other) => return Err(Error::Parse(format!("matrix JSON: unknown mode `{other}`"))),
        };
        match mode {
            Mode::Rational => {
                let e = entries
                    .iter()
                    .map(|x| match x {
                        Value::String(s) => parse_rational(s),
                        Value::Number(num) => {
                            num.as_i64().map(rat_int).or_else(|| num.as_f64().map(BigRational::from_f64))
                        }
                        _ => None,
                    })
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::Parse("matrix JSON: bad rational entry".into()))?;
                Self::from_rational(n, e)
            }
            Mode::Float => {
                let e = entries
                    .iter()
                    .map(|x| match x {
                        Value::Number(num) => num.as_f64(),
                        Value::String(s) => parse_rational(s).map(|q| rational_to_f64(&q)),
                        _ => None,
                    })
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::Parse("matrix JSON: bad float entry".into()))?;
                Self::from_f64(n, e)
            }
        }
    }
}

fn check_shape(n: usize, len: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Parse("matrix dimension must be positive".into()));
    }
    if len != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: len });
    }
    Ok(())
}

/// Parameters of the `T(psi)` family: five positive angles with sum below pi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiParams {
    psi: [f64; 5],
}

/// Distance to the boundary of the parameter set below which `PsiParams`
/// rejects its input.
pub const PSI_BOUNDARY_GUARD: f64 = 1e-6;

impl PsiParams {
    pub fn new(psi: [f64; 5]) -> Result<Self> {
        if psi.iter().any(|p| !p.is_finite()) {
            return Err(Error::PsiOutOfRange("non-finite angle".into()));
        }
        if let Some(i) = psi.iter().position(|&p| p <= PSI_BOUNDARY_GUARD) {
            return Err(Error::PsiOutOfRange(format!("psi_{} = {} is not positive", i + 1, psi[i])));
        }
        let sum: f64 = psi.iter().sum();
        if sum >= PI - PSI_BOUNDARY_GUARD {
            return Err(Error::PsiOutOfRange(format!("sum of angles {sum} is not below pi")));
        }
        Ok(PsiParams { psi })
    }

    /// `psi_i = pi/10` for all `i`.
    pub fn uniform_tenth() -> Self {
        PsiParams { psi: [PI / 10.0; 5] }
    }

    pub fn angles(&self) -> [f64; 5] {
        self.psi
    }

    /// One-based accessor matching the usual indexing of the angles.
    pub fn get(&self, i: usize) -> f64 {
        self.psi[i - 1]
    }

    /// Uniform sample from the parameter set shrunk by `margin`: every angle
    /// and the slack `pi - sum` are at least `margin`.
    pub fn sample<R: rand::Rng + ?Sized>(rng: &mut R, margin: f64) -> Result<Self> {
        let free = PI - 6.0 * margin;
        if !(margin > PSI_BOUNDARY_GUARD) || free <= 0.0 {
            return Err(Error::PsiOutOfRange(format!("sampling margin {margin} leaves no room")));
        }
        // normalized exponentials are uniform on the simplex
        let e: Vec<f64> = (0..6).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = e.iter().sum();
        let mut psi = [0.0; 5];
        for (p, x) in psi.iter_mut().zip(&e) {
            *p = margin + free * x / total;
        }
        PsiParams::new(psi)
    }

    /// Smallest distance to the boundary of the admissible set.
    pub fn margin(&self) -> f64 {
        let min = self.psi.iter().cloned().fold(f64::INFINITY, f64::min);
        min.min(PI - self.psi.iter().sum::<f64>())
    }
}

/// Positive diagonal scaling `D = Diag(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagScaling {
    d: Vec<f64>,
    exact: Option<Vec<BigRational>>,
}

impl DiagScaling {
    pub fn new(d: Vec<f64>) -> Result<Self> {
        if d.is_empty() || d.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::NonPositiveScaling);
        }
        Ok(DiagScaling { d, exact: None })
    }

    pub fn from_rational(d: Vec<BigRational>) -> Result<Self> {
        if d.is_empty() || d.iter().any(|v| !v.is_positive()) {
            return Err(Error::NonPositiveScaling);
        }
        Ok(DiagScaling { d: d.iter().map(rational_to_f64).collect(), exact: Some(d) })
    }

    pub fn ones(n: usize) -> Self {
        Self::from_rational(vec![BigRational::one(); n]).expect("ones are positive")
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.d
    }

    pub fn inverse(&self) -> DiagScaling {
        DiagScaling {
            d: self.d.iter().map(|v| 1.0 / v).collect(),
            exact: self.exact.as_ref().map(|e| e.iter().map(|q| q.recip()).collect()),
        }
    }
}

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    alpha: Option<usize>,
}

/// Largest vertex count for which the stability number is computed by search.
pub const ALPHA_BRUTE_FORCE_CAP: usize = 20;

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one vertex".into()));
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a},{b}) outside 0..{n}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Graph { n, edges: set, alpha: None })
    }

    pub fn with_alpha(mut self, alpha: usize) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn cycle(n: usize) -> Result<Self> {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::new(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        Self::new(n, &edges)
    }

    /// Parses `"0-1,1-2,2-0"`; the vertex count is one more than the largest label
    /// unless `n` is given.
    pub fn parse_edge_list(s: &str, n: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (a, b) =
                part.split_once('-').ok_or_else(|| Error::Parse(format!("bad edge `{part}`, expected `a-b`")))?;
            let a: usize = a.trim().parse().map_err(|_| Error::Parse(format!("bad vertex `{a}`")))?;
            let b: usize = b.trim().parse().map_err(|_| Error::Parse(format!("bad vertex `{b}`")))?;
            edges.push((a, b));
        }
        let max_label = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(1);
        Self::new(n.unwrap_or(max_label), &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn edges(&self) -> impl Iterator<Item = &(usize, usize)> {
        self.edges.iter()
    }

    /// Stability number: the stored value, or exhaustive branch and bound for
    /// at most [`ALPHA_BRUTE_FORCE_CAP`] vertices.
    pub fn stability_number(&self) -> Result<usize> {
        if let Some(a) = self.alpha {
            return Ok(a);
        }
        if self.n > ALPHA_BRUTE_FORCE_CAP {
            return Err(Error::GraphTooLarge(self.n));
        }
        let nbr: Vec<u32> =
            (0..self.n).map(|v| (0..self.n).filter(|&u| self.adjacent(u, v)).fold(0u32, |m, u| m | (1 << u))).collect();
        let mut best = 0;
        max_stable(&nbr, (1u32 << self.n) - 1, 0, &mut best);
        Ok(best)
    }
}

fn max_stable(nbr: &[u32], candidates: u32, size: usize, best: &mut usize) {
    if candidates == 0 {
        *best = (*best).max(size);
        return;
    }
    if size + candidates.count_ones() as usize <= *best {
        return;
    }
    let v = candidates.trailing_zeros() as usize;
    // branch: take v, or drop v
    max_stable(nbr, candidates & !(1 << v) & !nbr[v], size + 1, best);
    max_stable(nbr, candidates & !(1 << v), size, best);
}

/// The 5x5 Horn matrix.
pub fn horn() -> SymMatrix {
    #[rustfmt::skip]
    let h = [
         1,  1, -1, -1,  1,
         1,  1,  1, -1, -1,
        -1,  1,  1,  1, -1,
        -1, -1,  1,  1,  1,
         1, -1, -1,  1,  1,
    ];
    SymMatrix::from_i64(5, &h).expect("Horn matrix is symmetric")
}

/// The matrix `T(psi)`: unit diagonal, `-cos psi` on the cyclic neighbours and
/// `cos(psi_a + psi_b)` on the remaining pairs.
pub fn t_psi(psi: &PsiParams) -> SymMatrix {
    let p = |i: usize| psi.get(i);
    let mut e = [[1.0f64; 5]; 5];
    let mut set = |i: usize, j: usize, v: f64| {
        e[i - 1][j - 1] = v;
        e[j - 1][i - 1] = v;
    };
    set(1, 2, -p(4).cos());
    set(1, 3, (p(4) + p(5)).cos());
    set(1, 4, (p(2) + p(3)).cos());
    set(1, 5, -p(3).cos());
    set(2, 3, -p(5).cos());
    set(2, 4, (p(5) + p(1)).cos());
    set(2, 5, (p(3) + p(4)).cos());
    set(3, 4, -p(1).cos());
    set(3, 5, (p(1) + p(2)).cos());
    set(4, 5, -p(2).cos());
    SymMatrix::from_fn_f64(5, |i, j| e[i][j])
}

/// Random symmetric test matrix `G G^T / n + N - s (J - I)` with `G` uniform
/// in `[-1, 1]`, `N` nonnegative with zero diagonal and `s` in `[0, 0.6]`,
/// rounded to rationals with denominator 100. Depending on the draw it lies
/// inside, near the boundary of, or outside the copositive cone.
pub fn random_mixture<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> SymMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
    let p = &g * g.transpose() / n as f64;
    let mut nn = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = rng.gen_range(0.0..=1.0);
            nn[(i, j)] = v;
            nn[(j, i)] = v;
        }
    }
    let s: f64 = rng.gen_range(0.0..=0.6);
    SymMatrix::from_fn_rational(n, |i, j| {
        let off = if i == j { 0.0 } else { nn[(i, j)] - s };
        let v = p[(i, j)] + off;
        BigRational::new(((v * 100.0).round() as i64).into(), 100.into())
    })
}

/// Graph matrix `alpha(G) (A_G + I) - J`. With vertices labelled so that the
/// 5-cycle has edges `{i, i+1 mod 5}`, `graph_matrix(C_5)` equals [`horn`].
pub fn graph_matrix(g: &Graph) -> Result<SymMatrix> {
    let alpha = rat_int(g.stability_number()? as i64);
    Ok(SymMatrix::from_fn_rational(g.n(), |i, j| {
        let a_plus_i = if i == j || g.adjacent(i, j) { BigRational::one() } else { BigRational::zero() };
        &alpha * a_plus_i - BigRational::one()
    }))
}

/// `D M D`.
pub fn scale(m: &SymMatrix, d: &DiagScaling) -> Result<SymMatrix> {
    if d.len() != m.n() {
        return Err(Error::DimensionMismatch { expected: m.n(), got: d.len() });
    }
    match (&m.entries, &d.exact) {
        (Entries::Rational(_), Some(dx)) => {
            Ok(SymMatrix::from_fn_rational(m.n(), |i, j| m.get_exact(i, j) * &dx[i] * &dx[j]))
        }
        _ => {
            let dv = d.values();
            Ok(SymMatrix::from_fn_f64(m.n(), |i, j| dv[i] * m.get(i, j) * dv[j]))
        }
    }
}

/// `P^T M P` for the permutation with `result[i][j] = m[perm[i]][perm[j]]`.
pub fn permute(m: &SymMatrix, perm: &[usize]) -> Result<SymMatrix> {
    let n = m.n();
    if perm.len() != n {
        return Err(Error::InvalidPermutation(format!("length {} for dimension {n}", perm.len())));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(format!("{perm:?} is not a bijection on 0..{n}")));
        }
        seen[p] = true;
    }
    Ok(match &m.entries {
        Entries::Rational(_) => SymMatrix::from_fn_rational(n, |i, j| m.get_exact(perm[i], perm[j])),
        Entries::Float(_) => SymMatrix::from_fn_f64(n, |i, j| m.get(perm[i], perm[j])),
    })
}

pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use approx::assert_abs_diff_eq;

    #[test]
    fn psi_samples_respect_margin() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p = PsiParams::sample(&mut rng, 0.05).unwrap();
            assert!(p.margin() >= 0.05 - 1e-12);
        }
        assert!(PsiParams::sample(&mut rng, 1.0).is_err());
    }

    fn sorted_eigs(m: &DMatrix<f64>) -> Vec<f64> {
        let mut e: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().cloned().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    #[test]
    fn horn_entries() {
        let h = horn();
        assert_eq!(h.mode(), Mode::Rational);
        assert_eq!(h.get_exact(0, 0), rat_int(1));
        assert_eq!(h.get_exact(0, 2), rat_int(-1));
        assert_eq!(h.get_exact(1, 2), rat_int(1));
        for i in 0..5 {
            assert_eq!(h.get_exact(i, i), rat_int(1));
            for j in 0..5 {
                assert_eq!(h.get_exact(i, j), h.get_exact(j, i));
            }
        }
    }

    #[test]
    fn horn_is_c5_graph_matrix() {
        let c5 = Graph::cycle(5).unwrap();
        assert_eq!(c5.stability_number().unwrap(), 2);
        assert_eq!(graph_matrix(&c5).unwrap(), horn());
    }

    #[test]
    fn graph_matrix_small_cases() {
        let single = Graph::new(1, &[]).unwrap();
        let m = graph_matrix(&single).unwrap();
        assert_eq!(m.get_exact(0, 0), rat_int(0));

        let k3 = Graph::complete(3).unwrap();
        assert_eq!(k3.stability_number().unwrap(), 1);
        let m = graph_matrix(&k3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(m.get_exact(i, j).is_zero());
            }
        }
    }

    #[test]
    fn stability_number_brute_force() {
        assert_eq!(Graph::cycle(7).unwrap().stability_number().unwrap(), 3);
        assert_eq!(Graph::new(6, &[]).unwrap().stability_number().unwrap(), 6);
        // Petersen graph
        let mut edges = vec![];
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        assert_eq!(Graph::new(10, &edges).unwrap().stability_number().unwrap(), 4);
        assert!(matches!(Graph::new(21, &[]).unwrap().stability_number(), Err(Error::GraphTooLarge(21))));
        assert_eq!(Graph::new(21, &[]).unwrap().with_alpha(21).stability_number().unwrap(), 21);
        assert!(Graph::new(3, &[(1, 1)]).is_err());
        assert!(Graph::new(3, &[(1, 3)]).is_err());
    }

    #[test]
    fn t_psi_entries() {
        let psi = PsiParams::uniform_tenth();
        let t = t_psi(&psi);
        assert_abs_diff_eq!(t.get(0, 1), -(PI / 10.0).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(t.get(0, 1), -0.9510565, epsilon = 1e-7);
        let psi = PsiParams::new([0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let t = t_psi(&psi);
        for i in 0..5 {
            assert_eq!(t.get(i, i), 1.0);
        }
        assert_eq!(t.get(0, 4), -(0.4f64).cos());
        assert_eq!(t.get(4, 0), t.get(0, 4));
        assert_eq!(t.get(1, 3), (0.6f64 + 0.2).cos());
    }

    #[test]
    fn psi_rejects_out_of_range() {
        assert!(PsiParams::new([0.0, 0.1, 0.1, 0.1, 0.1]).is_err());
        assert!(PsiParams::new([-0.1, 0.1, 0.1, 0.1, 0.1]).is_err());
        assert!(PsiParams::new([1.0, 1.0, 0.6, 0.3, 0.3]).is_err());
        assert!(PsiParams::new([PI / 5.0 - 1e-8; 5]).is_err());
        assert!(PsiParams::new([0.5; 5]).is_ok());
    }

    #[test]
    fn scale_examples() {
        let h = horn();
        assert_eq!(scale(&h, &DiagScaling::ones(5)).unwrap(), h);
        let d = DiagScaling::from_rational(vec![rat_int(2), rat_int(1), rat_int(1), rat_int(1), rat_int(1)]).unwrap();
        let s = scale(&h, &d).unwrap();
        assert_eq!(s.get_exact(0, 1), rat_int(2));
        assert_eq!(s.get_exact(0, 0), rat_int(4));
        assert_eq!(scale(&s, &d.inverse()).unwrap(), h);
        let d = DiagScaling::from_rational(vec![rat(1, 3), rat(7, 2), rat_int(1), rat_int(5), rat(2, 9)]).unwrap();
        assert_eq!(scale(&scale(&h, &d).unwrap(), &d.inverse()).unwrap(), h);
        assert!(scale(&h, &DiagScaling::ones(4)).is_err());
        assert!(DiagScaling::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn permute_examples() {
        let h = horn();
        let id: Vec<usize> = (0..5).collect();
        assert_eq!(permute(&h, &id).unwrap(), h);
        let shift = vec![1, 2, 3, 4, 0];
        assert_eq!(permute(&h, &shift).unwrap(), h);
        let p = vec![2, 0, 4, 1, 3];
        let back = permute(&permute(&h, &p).unwrap(), &inverse_permutation(&p)).unwrap();
        assert_eq!(back, h);
        assert!(permute(&h, &[0, 0, 1, 2, 3]).is_err());
        assert!(permute(&h, &[0, 1, 2]).is_err());
    }

    #[test]
    fn permute_preserves_spectrum() {
        let t = t_psi(&PsiParams::new([0.3, 0.2, 0.5, 0.4, 0.6]).unwrap());
        let p = vec![3, 1, 4, 0, 2];
        let a = sorted_eigs(&t.to_dmatrix());
        let b = sorted_eigs(&permute(&t, &p).unwrap().to_dmatrix());
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn json_round_trip() {
        let h = scale(
            &horn(),
            &DiagScaling::from_rational(vec![rat(1, 2), rat_int(1), rat_int(3), rat_int(1), rat_int(1)]).unwrap(),
        )
        .unwrap();
        assert_eq!(SymMatrix::from_json(&h.to_json()).unwrap(), h);
        let t = t_psi(&PsiParams::uniform_tenth());
        let text = serde_json::to_string(&t.to_json()).unwrap();
        let back = SymMatrix::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, t);
        let bad = serde_json::json!({"n": 2, "entries": [1, 2, 3, 4], "mode": "rational"});
        assert!(matches!(SymMatrix::from_json(&bad), Err(Error::NotSymmetric(0, 1))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn psi_strategy() -> impl Strategy<Value = PsiParams> {
            proptest::array::uniform5(0.01f64..1.0).prop_filter_map("inside psi", |raw| {
                let s: f64 = raw.iter().sum();
                let f = (PI - 0.05) / s.max(PI - 0.05);
                PsiParams::new(raw.map(|v| v * f)).ok()
            })
        }

        proptest! {
            #[test]
            fn scale_is_entrywise(d in proptest::collection::vec(0.1f64..5.0, 5)) {
                let t = t_psi(&PsiParams::uniform_tenth());
                let s = scale(&t, &DiagScaling::new(d.clone()).unwrap()).unwrap();
                for i in 0..5 {
                    for j in 0..5 {
                        prop_assert_eq!(s.get(i, j), s.get(j, i));
                        prop_assert!((s.get(i, j) - d[i] * d[j] * t.get(i, j)).abs() <= 1e-12 * (1.0 + s.get(i, j).abs()));
                    }
                }
            }

            #[test]
            fn t_psi_unit_diagonal_bounded_entries(psi in psi_strategy()) {
                let t = t_psi(&psi);
                for i in 0..5 {
                    prop_assert_eq!(t.get(i, i), 1.0);
                    for j in 0..5 {
                        prop_assert!(t.get(i, j).abs() <= 1.0);
                    }
                }
            }
        }
    }
}
