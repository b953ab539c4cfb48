//! Coefficient fields: exact rationals and binary64.

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A coefficient type usable in [`crate::poly::Polynomial`].
pub trait Coeff:
    Clone
    + Debug
    + Display
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// `true` for the exact rational field.
    const EXACT: bool;

    fn from_rational(q: &BigRational) -> Self;
    fn from_f64(x: f64) -> Self;
    fn from_i64(k: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }
    /// Whether a coefficient should be dropped from a sparse map whose
    /// largest coefficient magnitude is `scale`.
    fn negligible(&self, scale: f64) -> bool;
}

/// Relative pruning threshold for float polynomials.
pub const FLOAT_PRUNE_REL: f64 = 1e-14;

impl Coeff for f64 {
    const EXACT: bool = false;

    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q)
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(k: i64) -> Self {
        k as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn negligible(&self, scale: f64) -> bool {
        *self == 0.0 || self.abs() <= FLOAT_PRUNE_REL * scale
    }
}

impl Coeff for BigRational {
    const EXACT: bool = true;

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }
    fn from_i64(k: i64) -> Self {
        BigRational::from_integer(BigInt::from(k))
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(q) {
        if v.is_finite() {
            return v;
        }
    }
    // Huge numerators/denominators: scale down before dividing.
    let n = q.numer().to_f64().unwrap_or(f64::NAN);
    let d = q.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `"3"`, `"-1/2"` or a decimal such as `"0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Ok(n) = BigInt::from_str(s) {
        return Some(BigRational::from_integer(n));
    }
    // decimal literal, exact
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    let d = num_traits::pow(BigInt::from(10), frac_part.len());
    let q = BigRational::new(n, d);
    Some(if neg { -q } else { q })
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued-fraction convergents and semiconvergents).
pub fn best_rational(x: f64, max_den: i64) -> BigRational {
    assert!(x.is_finite());
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1): (i128, i128, i128, i128) = (0, 1, 1, 0);
    let max_den = max_den as i128;
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e18 {
            break;
        }
        let a = a as i128;
        let q2 = q0 + a * q1;
        if q2 > max_den {
            // semiconvergent
            let k = (max_den - q0) / q1;
            let (ps, qs) = (p0 + k * p1, q0 + k * q1);
            let cand_a = ps as f64 / qs as f64;
            let cand_b = p1 as f64 / q1 as f64;
            let (p, q) = if (cand_a - x.abs()).abs() < (cand_b - x.abs()).abs() { (ps, qs) } else { (p1, q1) };
            return signed_ratio(neg, p, q);
        }
        let p2 = p0 + a * p1;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a as f64;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    signed_ratio(neg, p1, q1)
}

fn signed_ratio(neg: bool, p: i128, q: i128) -> BigRational {
    let r = BigRational::new(BigInt::from(p), BigInt::from(q));
    if neg {
        -r
    } else {
        r
    }
}

/// Formats a rational as `"p"` or `"p/q"`.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational_abs(q: &BigRational) -> BigRational {
    q.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("-1/2").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-.5").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), rat_int(7));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("abc").is_none());
    }

    #[test]
    fn best_rational_recovers_simple_fractions() {
        assert_eq!(best_rational(1.0 / 3.0, 10_000), rat(1, 3));
        assert_eq!(best_rational(-0.75, 10_000), rat(-3, 4));
        assert_eq!(best_rational(2.0, 10_000), rat_int(2));
        let pi = best_rational(std::f64::consts::PI, 10_000);
        assert!(pi.denom() <= &BigInt::from(10_000));
        assert!((rational_to_f64(&pi) - std::f64::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn float_pruning_is_relative() {
        assert!(1e-15_f64.negligible(1.0));
        assert!(!1e-13_f64.negligible(1.0));
        assert!(!BigRational::from_f64(1e-300).negligible(1.0));
    }
}
