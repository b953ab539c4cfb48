//! Sparse multivariate polynomials keyed by exponent vectors, plus the
//! homogenization and ideal-reduction helpers used to move between the
//! simplex-ideal and homogeneous forms of a certificate.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrices::SymMatrix;
use crate::scalar::{format_rational, parse_rational, Coeff};

/// Exponent vector. Ordered graded-lexicographically: by total degree, then
/// lexicographically with `x1 > x2 > ... > xn`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product()
    }

    /// All monomials in `nvars` variables of total degree exactly `d`, in
    /// graded-lex order.
    pub fn all_of_degree(nvars: usize, d: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; nvars];
        fill_degree(&mut cur, 0, d, &mut out);
        out.sort();
        out
    }

    /// All monomials of total degree at most `d`, in graded-lex order.
    pub fn all_up_to_degree(nvars: usize, d: u32) -> Vec<Monomial> {
        (0..=d).flat_map(|k| Monomial::all_of_degree(nvars, k)).collect()
    }

    /// Square-free monomial `x^S`.
    pub fn square_free(nvars: usize, set: &[usize]) -> Monomial {
        let mut e = vec![0; nvars];
        for &i in set {
            e[i] = 1;
        }
        Monomial(e)
    }
}

fn fill_degree(cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Monomial>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(Monomial(cur.clone()));
        cur[pos] = 0;
        return;
    }
    if cur.is_empty() {
        if left == 0 {
            out.push(Monomial(vec![]));
        }
        return;
    }
    for e in 0..=left {
        cur[pos] = e;
        fill_degree(cur, pos + 1, left - e, out);
    }
    cur[pos] = 0;
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial over `C`. No stored coefficient is zero (for `f64`,
/// coefficients below `1e-14` times the largest magnitude are pruned).
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<C: Coeff> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> Polynomial<C> {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::from_terms(nvars, vec![(Monomial::one(nvars), c)])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::from_terms(nvars, vec![(Monomial::var(nvars, i), C::one())])
    }

    pub fn monomial(m: Monomial, c: C) -> Self {
        let n = m.nvars();
        Self::from_terms(n, vec![(m, c)])
    }

    /// Sums duplicate monomials and prunes zeros.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut map: BTreeMap<Monomial, C> = BTreeMap::new();
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial arity");
            match map.get_mut(&m) {
                Some(v) => *v = v.clone() + c,
                None => {
                    map.insert(m, c);
                }
            }
        }
        let mut p = Polynomial { nvars, terms: map };
        p.prune();
        p
    }

    /// `x_1 + ... + x_n`.
    pub fn simplex_sum(nvars: usize) -> Self {
        Self::from_terms(nvars, (0..nvars).map(|i| (Monomial::var(nvars, i), C::one())))
    }

    /// `x_1^2 + ... + x_n^2`.
    pub fn sphere_sum(nvars: usize) -> Self {
        Self::from_terms(
            nvars,
            (0..nvars).map(|i| {
                let mut e = vec![0; nvars];
                e[i] = 2;
                (Monomial(e), C::one())
            }),
        )
    }

    fn prune(&mut self) {
        let scale = self.max_abs_coeff();
        self.terms.retain(|_, c| !c.negligible(scale));
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// Coefficient by exponent slice.
    pub fn coeff_of(&self, exps: &[u32]) -> C {
        self.coeff(&Monomial(exps.to_vec()))
    }

    /// Maximum total degree over stored terms; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_homogeneous_of(&self, d: u32) -> bool {
        self.terms.keys().all(|m| m.degree() == d)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.abs_f64()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().map(|(m, v)| (m.clone(), v.clone() * c.clone())))
    }

    pub fn add_ref(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "polynomial arity");
        let mut map = self.terms.clone();
        for (m, c) in &other.terms {
            match map.get_mut(m) {
                Some(v) => *v = v.clone() + c.clone(),
                None => {
                    map.insert(m.clone(), c.clone());
                }
            }
        }
        let mut p = Polynomial { nvars: self.nvars, terms: map };
        p.prune();
        p
    }

    pub fn sub_ref(&self, other: &Self) -> Self {
        self.add_ref(&other.neg_ref())
    }

    pub fn neg_ref(&self) -> Self {
        Polynomial { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "polynomial arity");
        let mut map: BTreeMap<Monomial, C> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca.clone() * cb.clone();
                match map.get_mut(&m) {
                    Some(v) => *v = v.clone() + c,
                    None => {
                        map.insert(m, c);
                    }
                }
            }
        }
        let mut p = Polynomial { nvars: self.nvars, terms: map };
        p.prune();
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.nvars, C::one());
        for _ in 0..k {
            out = out.mul_ref(self);
        }
        out
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Polynomial { nvars: self.nvars, terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect() }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c.to_f64() * m.eval(x)).sum()
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        Polynomial::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    pub fn to_f64(&self) -> Polynomial<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    /// JSON term list `[{"exp": [...], "coef": ...}, ...]`; exact coefficients
    /// are written as `"p/q"` strings.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let coef = if C::EXACT { json!(format!("{c}")) } else { json!(c.to_f64()) };
                json!({ "exp": m.exponents(), "coef": coef })
            })
            .collect();
        json!({ "nvars": self.nvars, "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let nvars = v
            .get("nvars")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("polynomial JSON: missing `nvars`".into()))? as usize;
        let arr = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("polynomial JSON: missing `terms`".into()))?;
        let mut terms = Vec::with_capacity(arr.len());
        for t in arr {
            let exp: Vec<u32> = t
                .get("exp")
                .and_then(Value::as_array)
                .and_then(|a| a.iter().map(|e| e.as_u64().map(|x| x as u32)).collect())
                .ok_or_else(|| Error::Parse("polynomial JSON: bad `exp`".into()))?;
            if exp.len() != nvars {
                return Err(Error::VariableMismatch(nvars, exp.len()));
            }
            let c = match t.get("coef") {
                Some(Value::String(s)) => parse_rational(s).map(|q| C::from_rational(&q)),
                Some(Value::Number(x)) => x.as_f64().map(C::from_f64),
                _ => None,
            }
            .ok_or_else(|| Error::Parse("polynomial JSON: bad `coef`".into()))?;
            terms.push((Monomial(exp), c));
        }
        Ok(Self::from_terms(nvars, terms))
    }
}

impl Polynomial<BigRational> {
    /// Parses the textual format written by `Display`, e.g.
    /// `"2 * x1^2 x2 - 1/2 * x3 + 4"`.
    pub fn parse(s: &str, nvars: usize) -> Result<Self> {
        parse_poly(s, nvars)
    }
}

impl<C: Coeff> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest degree first
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let s = format!("{c}");
            let (neg, mag) = match s.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, s),
            };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            write!(f, "{mag}")?;
            let vars: Vec<String> = m
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, e) })
                .collect();
            if !vars.is_empty() {
                write!(f, " * {}", vars.join(" "))?;
            }
        }
        Ok(())
    }
}

fn parse_poly(s: &str, nvars: usize) -> Result<Polynomial<BigRational>> {
    let err = |msg: &str| Error::Parse(format!("polynomial `{s}`: {msg}"));
    // split into signed terms at top-level + / - that follow whitespace
    let mut terms_src: Vec<(bool, String)> = Vec::new();
    let mut cur = String::new();
    let mut sign_neg = false;
    let toks: Vec<&str> = s.split_whitespace().collect();
    let mut i = 0;
    if toks.is_empty() {
        return Err(err("empty"));
    }
    while i < toks.len() {
        let mut t = toks[i];
        if cur.is_empty() && t.len() > 1 && (t.starts_with('-') || t.starts_with('+')) {
            if t.starts_with('-') {
                sign_neg = !sign_neg;
            }
            t = &t[1..];
        }
        if (t == "+" || t == "-") && !cur.is_empty() {
            terms_src.push((sign_neg, std::mem::take(&mut cur)));
            sign_neg = t == "-";
        } else if t == "-" && cur.is_empty() {
            sign_neg = !sign_neg;
        } else if t == "+" && cur.is_empty() {
        } else {
            if !cur.is_empty() {
                cur.push(' ');
            }
            cur.push_str(t);
        }
        i += 1;
    }
    if !cur.is_empty() {
        terms_src.push((sign_neg, cur));
    }
    let mut terms = Vec::new();
    for (neg, body) in terms_src {
        let (coef_src, vars_src) = match body.split_once('*') {
            Some((c, v)) => (c.trim().to_string(), v.trim().to_string()),
            None => {
                if body.trim_start().starts_with('x') {
                    ("1".to_string(), body.trim().to_string())
                } else {
                    (body.trim().to_string(), String::new())
                }
            }
        };
        let mut c = parse_rational(&coef_src).ok_or_else(|| err(&format!("bad coefficient `{coef_src}`")))?;
        if neg {
            c = -c;
        }
        let mut exps = vec![0u32; nvars];
        for v in vars_src.split_whitespace() {
            let v = v.strip_prefix('x').ok_or_else(|| err(&format!("bad variable `{v}`")))?;
            let (idx, e) = match v.split_once('^') {
                Some((a, b)) => (a, b.parse::<u32>().map_err(|_| err("bad exponent"))?),
                None => (v, 1),
            };
            let idx: usize = idx.parse().map_err(|_| err("bad variable index"))?;
            if idx == 0 || idx > nvars {
                return Err(err(&format!("variable x{idx} out of range")));
            }
            exps[idx - 1] += e;
        }
        terms.push((Monomial(exps), c));
    }
    Ok(Polynomial::from_terms(nvars, terms))
}

impl<C: Coeff> Add for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn add(self, rhs: Self) -> Polynomial<C> {
        self.add_ref(rhs)
    }
}

impl<C: Coeff> Sub for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn sub(self, rhs: Self) -> Polynomial<C> {
        self.sub_ref(rhs)
    }
}

impl<C: Coeff> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn mul(self, rhs: Self) -> Polynomial<C> {
        self.mul_ref(rhs)
    }
}

impl<C: Coeff> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        self.neg_ref()
    }
}

/// `x^T M x`.
pub fn quad_form<C: Coeff>(m: &SymMatrix) -> Polynomial<C> {
    let n = m.n();
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            terms.push((Monomial::var(n, i).mul(&Monomial::var(n, j)), m.entry::<C>(i, j)));
        }
    }
    Polynomial::from_terms(n, terms)
}

/// `(x∘x)^T M (x∘x) = sum_ij M_ij x_i^2 x_j^2`.
pub fn squared_vars_form<C: Coeff>(m: &SymMatrix) -> Polynomial<C> {
    let n = m.n();
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mut e = vec![0; n];
            e[i] += 2;
            e[j] += 2;
            terms.push((Monomial(e), m.entry::<C>(i, j)));
        }
    }
    Polynomial::from_terms(n, terms)
}

/// `(x_1 + ... + x_n)^r * p`.
pub fn mul_simplex_power<C: Coeff>(p: &Polynomial<C>, r: u32) -> Polynomial<C> {
    Polynomial::simplex_sum(p.nvars()).pow(r).mul_ref(p)
}

/// Homogenization with respect to the simplex: each term `x^b` of `g` is
/// multiplied by `(sum x_i)^(target_deg - |b|)`.
pub fn homogenize_tilde<C: Coeff>(g: &Polynomial<C>, target_deg: u32) -> Result<Polynomial<C>> {
    if g.degree() > target_deg {
        return Err(Error::DegreeTooLow { target: target_deg, degree: g.degree() });
    }
    let n = g.nvars();
    let s = Polynomial::<C>::simplex_sum(n);
    let mut powers = vec![Polynomial::constant(n, C::one())];
    for k in 1..=target_deg as usize {
        let next = powers[k - 1].mul_ref(&s);
        powers.push(next);
    }
    let mut out = Polynomial::zero(n);
    for (m, c) in g.terms() {
        let k = (target_deg - m.degree()) as usize;
        out = out.add_ref(&powers[k].mul_monomial(m).scale(c));
    }
    Ok(out)
}

/// Canonical normal form modulo the ideal generated by `sum x_i - 1`:
/// substitutes `x_n = 1 - x_1 - ... - x_{n-1}`.
pub fn reduce_mod_simplex_ideal<C: Coeff>(p: &Polynomial<C>) -> Polynomial<C> {
    let n = p.nvars();
    if n == 0 {
        return p.clone();
    }
    let mut sub = Polynomial::constant(n, C::one());
    for i in 0..n - 1 {
        sub = sub.sub_ref(&Polynomial::var(n, i));
    }
    reduce_last_var(p, &sub, 1)
}

/// Division by `sum x_i - 1` with `x_n` as leading variable: returns `(q, r)`
/// with `p = q (sum x_i - 1) + r` and `r` free of `x_n`.
pub fn divide_by_simplex_generator<C: Coeff>(p: &Polynomial<C>) -> (Polynomial<C>, Polynomial<C>) {
    let n = p.nvars();
    let mut work: BTreeMap<Monomial, C> = p.terms.clone();
    let mut quot: BTreeMap<Monomial, C> = BTreeMap::new();
    fn add<C: Coeff>(map: &mut BTreeMap<Monomial, C>, k: Monomial, v: C) {
        match map.get_mut(&k) {
            Some(x) => *x = x.clone() + v,
            None => {
                map.insert(k, v);
            }
        }
    }
    if n == 0 {
        return (Polynomial::zero(0), p.clone());
    }
    loop {
        // highest x_n power first keeps the process finite
        let Some((m, c)) = work
            .iter()
            .filter(|(m, c)| m.0[n - 1] > 0 && !c.is_zero())
            .max_by_key(|(m, _)| m.0[n - 1])
            .map(|(m, c)| (m.clone(), c.clone()))
        else {
            break;
        };
        work.remove(&m);
        let mut e = m.0.clone();
        e[n - 1] -= 1;
        let base = Monomial(e);
        // c x^base x_n = c x^base (g - sum_{i<n} x_i + 1)
        for i in 0..n - 1 {
            let mut f = base.0.clone();
            f[i] += 1;
            add(&mut work, Monomial(f), -c.clone());
        }
        add(&mut work, base.clone(), c.clone());
        add(&mut quot, base, c);
    }
    (Polynomial::from_terms(n, quot), Polynomial::from_terms(n, work))
}

/// Canonical normal form modulo `sum x_i^2 - 1`: substitutes
/// `x_n^2 = 1 - x_1^2 - ... - x_{n-1}^2`, leaving `x_n` with exponent <= 1.
pub fn reduce_mod_sphere_ideal<C: Coeff>(p: &Polynomial<C>) -> Polynomial<C> {
    let n = p.nvars();
    if n == 0 {
        return p.clone();
    }
    let mut sub = Polynomial::constant(n, C::one());
    for i in 0..n - 1 {
        let mut e = vec![0; n];
        e[i] = 2;
        sub = sub.sub_ref(&Polynomial::monomial(Monomial(e), C::one()));
    }
    reduce_last_var(p, &sub, 2)
}

/// Replaces `x_n^step` by `sub` throughout.
fn reduce_last_var<C: Coeff>(p: &Polynomial<C>, sub: &Polynomial<C>, step: u32) -> Polynomial<C> {
    let n = p.nvars();
    let mut powers: Vec<Polynomial<C>> = vec![Polynomial::constant(n, C::one())];
    let mut acc: BTreeMap<Monomial, C> = BTreeMap::new();
    for (m, c) in p.terms() {
        let e = m.exponents()[n - 1];
        let (q, rem) = (e / step, e % step);
        while powers.len() <= q as usize {
            let next = powers[powers.len() - 1].mul_ref(sub);
            powers.push(next);
        }
        let mut base = m.exponents().to_vec();
        base[n - 1] = rem;
        let base = Monomial(base);
        for (pm, pc) in powers[q as usize].terms() {
            let key = pm.mul(&base);
            let v = pc.clone() * c.clone();
            match acc.get_mut(&key) {
                Some(x) => *x = x.clone() + v,
                None => {
                    acc.insert(key, v);
                }
            }
        }
    }
    Polynomial::from_terms(n, acc)
}

/// Float tolerance used by [`congruent_mod_ideal`].
pub const CONGRUENCE_TOL: f64 = 1e-9;

/// Whether `p - q` lies in the simplex ideal.
pub fn congruent_mod_ideal<C: Coeff>(p: &Polynomial<C>, q: &Polynomial<C>) -> Result<bool> {
    if p.nvars() != q.nvars() {
        return Err(Error::VariableMismatch(p.nvars(), q.nvars()));
    }
    let r = reduce_mod_simplex_ideal(&p.sub_ref(q));
    Ok(if C::EXACT { r.is_zero() } else { r.max_abs_coeff() <= CONGRUENCE_TOL })
}

/// Exact rational coefficient formatting for JSON output.
pub fn coeff_string<C: Coeff>(c: &C) -> String {
    if C::EXACT {
        format!("{c}")
    } else {
        format!("{}", c.to_f64())
    }
}

#[doc(hidden)]
pub fn format_rat(q: &BigRational) -> String {
    format_rational(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::horn;
    use crate::scalar::{rat, rat_int};
    use num_traits::{One, Zero};

    type Q = BigRational;

    fn x(n: usize, i: usize) -> Polynomial<Q> {
        Polynomial::var(n, i)
    }

    #[test]
    fn monomial_order_is_graded_lex() {
        let a = Monomial::new(vec![0, 2]);
        let b = Monomial::new(vec![1, 1]);
        let c = Monomial::new(vec![3, 0]);
        assert!(a < b);
        assert!(b < c);
        assert!(Monomial::new(vec![5, 0]) > Monomial::new(vec![0, 4]));
        let all = Monomial::all_of_degree(3, 2);
        assert_eq!(all.len(), 6);
        assert_eq!(all.last().unwrap(), &Monomial::new(vec![2, 0, 0]));
        assert_eq!(Monomial::all_of_degree(5, 3).len(), 35);
        assert_eq!(Monomial::all_up_to_degree(5, 4).len(), 126);
    }

    #[test]
    fn quad_form_examples() {
        let id = SymMatrix::identity(2);
        let q = quad_form::<Q>(&id);
        assert_eq!(q, &(&x(2, 0) * &x(2, 0)) + &(&x(2, 1) * &x(2, 1)));
        let h = quad_form::<Q>(&horn());
        assert_eq!(h.coeff_of(&[1, 1, 0, 0, 0]), rat_int(2));
        assert_eq!(h.coeff_of(&[1, 0, 1, 0, 0]), rat_int(-2));
        assert_eq!(h.coeff_of(&[2, 0, 0, 0, 0]), rat_int(1));
        let z = SymMatrix::from_i64(3, &[0; 9]).unwrap();
        assert!(quad_form::<Q>(&z).is_zero());
    }

    #[test]
    fn squared_vars_form_examples() {
        let id = SymMatrix::identity(2);
        let q = squared_vars_form::<Q>(&id);
        assert_eq!(q.coeff_of(&[4, 0]), Q::one());
        assert_eq!(q.coeff_of(&[0, 4]), Q::one());
        assert_eq!(q.len(), 2);
        let h = squared_vars_form::<Q>(&horn());
        assert_eq!(h.coeff_of(&[2, 2, 0, 0, 0]), rat_int(2));
        assert!(h.is_homogeneous_of(4));
    }

    #[test]
    fn mul_simplex_power_examples() {
        let p = x(2, 0);
        assert_eq!(mul_simplex_power(&p, 0), p);
        let r = mul_simplex_power(&p, 1);
        assert_eq!(r, &(&x(2, 0) * &x(2, 0)) + &(&x(2, 0) * &x(2, 1)));
        let q = quad_form::<Q>(&horn());
        assert_eq!(mul_simplex_power(&q, 3).degree(), 5);
    }

    #[test]
    fn homogenize_tilde_examples() {
        let g = &Polynomial::constant(2, Q::one()) + &x(2, 0);
        let h = homogenize_tilde(&g, 1).unwrap();
        assert_eq!(h, &(&x(2, 0) * &Polynomial::constant(2, rat_int(2))) + &x(2, 1));
        let q = quad_form::<Q>(&horn());
        assert_eq!(homogenize_tilde(&q, 2).unwrap(), q);
        assert!(matches!(homogenize_tilde(&q, 1), Err(Error::DegreeTooLow { .. })));
    }

    #[test]
    fn reduce_mod_simplex_examples() {
        let n = 3;
        let gen = &Polynomial::<Q>::simplex_sum(n) - &Polynomial::constant(n, Q::one());
        assert!(reduce_mod_simplex_ideal(&gen).is_zero());
        assert_eq!(reduce_mod_simplex_ideal(&Polynomial::<Q>::simplex_sum(n)), Polynomial::constant(n, Q::one()));
        let one_var = &x(1, 0) * &x(1, 0);
        assert_eq!(reduce_mod_simplex_ideal(&one_var), Polynomial::constant(1, Q::one()));
    }

    #[test]
    fn reduce_mod_sphere_examples() {
        let n = 2;
        let p = &Polynomial::<Q>::sphere_sum(n) - &Polynomial::constant(n, Q::one());
        assert!(reduce_mod_sphere_ideal(&p).is_zero());
        let x2_4 = Polynomial::monomial(Monomial::new(vec![0, 4]), Q::one());
        // x2^4 = (1 - x1^2)^2
        let expect = Polynomial::from_terms(
            2,
            vec![
                (Monomial::new(vec![0, 0]), Q::one()),
                (Monomial::new(vec![2, 0]), rat_int(-2)),
                (Monomial::new(vec![4, 0]), Q::one()),
            ],
        );
        assert_eq!(reduce_mod_sphere_ideal(&x2_4), expect);
        let x2_3 = Polynomial::monomial(Monomial::new(vec![1, 3]), Q::one());
        assert!(reduce_mod_sphere_ideal(&x2_3).terms().all(|(m, _)| m.exponents()[1] <= 1));
    }

    #[test]
    fn congruence_examples() {
        let q = quad_form::<Q>(&horn());
        assert!(congruent_mod_ideal(&q, &q).unwrap());
        let a = x(3, 0);
        let b = x(3, 1);
        assert!(!congruent_mod_ideal(&a, &b).unwrap());
        // x^T H x against the homogenized degree-4 form
        let lifted = homogenize_tilde(&q, 4).unwrap();
        assert!(congruent_mod_ideal(&q, &lifted).unwrap());
        assert_eq!(lifted, mul_simplex_power(&q, 2));
        assert!(congruent_mod_ideal(&a, &x(2, 0)).is_err());
    }

    #[test]
    fn text_format_round_trip() {
        let p = Polynomial::from_terms(
            3,
            vec![
                (Monomial::new(vec![2, 1, 0]), rat_int(2)),
                (Monomial::new(vec![0, 0, 1]), rat(-1, 2)),
                (Monomial::new(vec![0, 0, 0]), rat_int(4)),
            ],
        );
        let s = p.to_string();
        assert_eq!(s, "2 * x1^2 x2 - 1/2 * x3 + 4");
        assert_eq!(Polynomial::parse(&s, 3).unwrap(), p);
        assert_eq!(Polynomial::parse("-x1 + x2^3", 2).unwrap().coeff_of(&[1, 0]), rat_int(-1));
        assert!(Polynomial::parse("2 * x4", 3).is_err());
        let back = Polynomial::<Q>::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn float_pruning() {
        let a = Polynomial::from_terms(2, vec![(Monomial::new(vec![1, 0]), 1.0), (Monomial::new(vec![0, 1]), 1e-16)]);
        assert_eq!(a.len(), 1);
        let b = Polynomial::from_terms(2, vec![(Monomial::new(vec![1, 0]), -1.0 + 1e-17)]);
        let s = &a + &b;
        assert!(s.max_abs_coeff() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_poly(n: usize, max_deg: u32) -> impl Strategy<Value = Polynomial<Q>> {
            proptest::collection::vec((proptest::collection::vec(0u32..=max_deg, n), -5i64..=5, 1i64..=3), 0..6)
                .prop_map(move |terms| {
                    Polynomial::from_terms(n, terms.into_iter().map(|(e, a, b)| (Monomial::new(e), rat(a, b))))
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn distributivity(p in small_poly(3, 2), q in small_poly(3, 2), s in small_poly(3, 2)) {
                let lhs = &(&p + &q) * &s;
                let rhs = &(&p * &s) + &(&q * &s);
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn homogenize_is_homogeneous(p in small_poly(3, 2), extra in 0u32..3) {
                let d = p.degree() + extra;
                let h = homogenize_tilde(&p, d).unwrap();
                prop_assert!(h.is_homogeneous_of(d));
            }

            #[test]
            fn simplex_reduction_idempotent_and_absorbs_sum(p in small_poly(3, 3)) {
                let r = reduce_mod_simplex_ideal(&p);
                prop_assert_eq!(reduce_mod_simplex_ideal(&r), r.clone());
                let ps = mul_simplex_power(&p, 1);
                prop_assert_eq!(reduce_mod_simplex_ideal(&ps), r);
            }

            #[test]
            fn simplex_division_reconstructs(p in small_poly(3, 3)) {
                let (q, r) = divide_by_simplex_generator(&p);
                let g = Polynomial::simplex_sum(3).sub_ref(&Polynomial::constant(3, rat_int(1)));
                prop_assert_eq!(q.mul_ref(&g).add_ref(&r), p.clone());
                prop_assert!(r.terms().all(|(m, _)| m.exponents()[2] == 0));
                prop_assert_eq!(r, reduce_mod_simplex_ideal(&p));
            }

            #[test]
            fn sphere_reduction_idempotent(p in small_poly(3, 4)) {
                let r = reduce_mod_sphere_ideal(&p);
                prop_assert_eq!(reduce_mod_sphere_ideal(&r), r.clone());
                let lifted = &p * &Polynomial::sphere_sum(3);
                prop_assert_eq!(reduce_mod_sphere_ideal(&lifted), r);
            }

            // For homogeneous f of degree d and g with f - g in the simplex ideal,
            // (sum x)^(k-d) f equals the degree-k homogenization of g.
            #[test]
            fn homogenization_matches_ideal_representative(
                m in proptest::collection::vec(-4i64..=4, 6),
                q in small_poly(3, 1),
                extra in 0u32..3,
            ) {
                let mat = SymMatrix::from_i64(3, &[m[0], m[1], m[2], m[1], m[3], m[4], m[2], m[4], m[5]]).unwrap();
                let f = quad_form::<Q>(&mat);
                let gen = &Polynomial::simplex_sum(3) - &Polynomial::constant(3, Q::one());
                let g = &f + &(&q * &gen);
                let k = g.degree().max(2) + extra;
                let lhs = mul_simplex_power(&f, k - 2);
                let rhs = homogenize_tilde(&g, k).unwrap();
                prop_assert_eq!(lhs, rhs);
                prop_assert!(congruent_mod_ideal(&f, &g).unwrap());
            }

            #[test]
            fn squared_vars_is_substitution(m in proptest::collection::vec(-3.0f64..3.0, 6), x in proptest::collection::vec(-2.0f64..2.0, 3)) {
                let mat = SymMatrix::from_fn_f64(3, |i, j| {
                    let idx = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
                    m[idx[i][j]]
                });
                let q = quad_form::<f64>(&mat);
                let s = squared_vars_form::<f64>(&mat);
                let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
                prop_assert!((q.eval(&sq) - s.eval(&x)).abs() <= 1e-9 * (1.0 + s.eval(&x).abs()));
            }
        }
    }

    #[test]
    fn zero_coefficients_never_stored() {
        let p = &x(2, 0) - &x(2, 0);
        assert!(p.is_zero());
        assert_eq!(Polynomial::<Q>::zero(2).degree(), 0);
        assert!(Q::zero().negligible(0.0));
    }
}
