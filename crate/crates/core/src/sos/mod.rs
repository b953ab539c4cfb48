//! Sum-of-squares formulations of the copositive inner approximations, their
//! lowering to SDPs, and certificate handling.

mod bound;
mod certificate;
mod exact;
mod formulate;
mod lower;
mod membership;

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial};

pub use bound::{lasserre_bound, BoundResult};
pub use certificate::{verify_certificate, CertCone, Certificate};
pub use formulate::{formulate, formulate_bound};
pub use lower::{lower, Lowered, Slot};
pub use membership::{
    check_batch, check_membership, find_min_level, Diagnostics, LevelSearch, MembershipOptions, MembershipResult,
    Verdict, VerdictKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    K,
    LasSimplex,
    LasPreordering,
    LasSphere,
    Q,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::K, Family::LasSimplex, Family::LasPreordering, Family::LasSphere, Family::Q];

    /// Short tag used on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            Family::K => "K",
            Family::LasSimplex => "LASD",
            Family::LasPreordering => "LASP",
            Family::LasSphere => "LASS",
            Family::Q => "Q",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::K => "K",
            Family::LasSimplex => "LAS_simplex",
            Family::LasPreordering => "LAS_preordering",
            Family::LasSphere => "LAS_sphere",
            Family::Q => "Q",
        }
    }

    pub fn min_level(self) -> u32 {
        match self {
            Family::K | Family::Q => 0,
            Family::LasSimplex | Family::LasPreordering => 2,
            Family::LasSphere => 4,
        }
    }

    /// Distance between consecutive admissible levels.
    pub fn level_step(self) -> u32 {
        if self == Family::LasSphere {
            2
        } else {
            1
        }
    }

    /// Admissible levels up to and including `r_max`.
    pub fn levels_up_to(self, r_max: u32) -> Vec<u32> {
        (self.min_level()..=r_max).step_by(self.level_step() as usize).collect()
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        Family::ALL
            .into_iter()
            .find(|f| f.tag().eq_ignore_ascii_case(t) || f.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::UnsupportedCone(format!("unknown cone family `{s}`")))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A cone of one of the five families at a given level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConeId {
    family: Family,
    r: u32,
}

impl ConeId {
    pub fn new(family: Family, r: u32) -> Result<Self> {
        let ok = match family {
            Family::K | Family::Q => true,
            Family::LasSimplex | Family::LasPreordering => r >= 2,
            Family::LasSphere => r >= 4 && r.is_multiple_of(2),
        };
        if !ok {
            return Err(Error::UnsupportedCone(format!(
                "{}({r}): level must be {}",
                family.name(),
                match family {
                    Family::LasSphere => "even and at least 4",
                    _ => "at least 2",
                }
            )));
        }
        Ok(ConeId { family, r })
    }

    pub fn k(r: u32) -> Self {
        ConeId { family: Family::K, r }
    }

    pub fn q(r: u32) -> Self {
        ConeId { family: Family::Q, r }
    }

    pub fn las_simplex(r: u32) -> Result<Self> {
        Self::new(Family::LasSimplex, r)
    }

    pub fn las_preordering(r: u32) -> Result<Self> {
        Self::new(Family::LasPreordering, r)
    }

    pub fn las_sphere(r: u32) -> Result<Self> {
        Self::new(Family::LasSphere, r)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn level(&self) -> u32 {
        self.r
    }
}

impl fmt::Display for ConeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.family.name(), self.r)
    }
}

impl FromStr for ConeId {
    type Err = Error;
    /// Accepts `K(1)`, `LAS_simplex(3)`, `LASD(3)`, `LASD3`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let split = t
            .find(|c: char| c == '(' || c.is_ascii_digit())
            .ok_or_else(|| Error::UnsupportedCone(format!("missing level in `{s}`")))?;
        let (fam, rest) = t.split_at(split);
        let lvl = rest.trim_start_matches('(').trim_end_matches(')');
        let r: u32 = lvl.parse().map_err(|_| Error::UnsupportedCone(format!("bad level in `{s}`")))?;
        ConeId::new(fam.parse()?, r)
    }
}

/// How both sides of the identity are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reduction {
    /// Plain coefficient matching.
    None,
    /// Matching of normal forms modulo `sum x_i^2 - 1`.
    Sphere,
    /// Matching of normal forms modulo `sum x_i - 1`.
    Simplex,
}

/// One SOS term `g * z^T G z` with `G` PSD. A one-element basis is a
/// nonnegative scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct GramBlock {
    pub label: String,
    pub multiplier: Polynomial<BigRational>,
    pub basis: Vec<Monomial>,
}

impl GramBlock {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// A free scalar `c` contributing `c * multiplier`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeScalar {
    pub label: String,
    pub multiplier: Polynomial<BigRational>,
}

/// Target polynomial in float form, plus the exact form when the matrix is
/// rational.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub float: Polynomial<f64>,
    pub exact: Option<Polynomial<BigRational>>,
}

/// A coefficient-matching problem: `target = sum_k g_k z_k^T G_k z_k +
/// sum_j c_j h_j` (after the reduction), `G_k` PSD, `c_j` free.
#[derive(Debug, Clone)]
pub struct SosProblem {
    pub nvars: usize,
    pub target: Target,
    pub reduction: Reduction,
    pub blocks: Vec<GramBlock>,
    pub free_scalars: Vec<FreeScalar>,
    /// Index into `free_scalars` of the quantity to maximize, if any.
    pub maximize: Option<usize>,
}

impl SosProblem {
    pub fn max_block_dim(&self) -> usize {
        self.blocks.iter().map(GramBlock::dim).max().unwrap_or(0)
    }

    /// The matched monomial space, one equality per element.
    pub fn constraint_monomials(&self) -> Vec<Monomial> {
        lower::row_monomials(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_ids_validate_levels() {
        assert!(ConeId::las_simplex(1).is_err());
        assert!(ConeId::las_sphere(5).is_err());
        assert!(ConeId::las_sphere(2).is_err());
        assert!(ConeId::las_sphere(6).is_ok());
        assert_eq!(ConeId::k(0).to_string(), "K(0)");
        assert_eq!("LASD(3)".parse::<ConeId>().unwrap(), ConeId::las_simplex(3).unwrap());
        assert_eq!("LAS_sphere(8)".parse::<ConeId>().unwrap(), ConeId::las_sphere(8).unwrap());
        assert_eq!("q2".parse::<ConeId>().unwrap(), ConeId::q(2));
        assert!("X(1)".parse::<ConeId>().is_err());
        assert_eq!(Family::LasSphere.levels_up_to(9), vec![4, 6, 8]);
    }
}
