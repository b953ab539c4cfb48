use std::fmt;

use nalgebra::DMatrix;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{formulate, formulate_bound, ConeId, Reduction, SosProblem};
use crate::error::{Error, Result};
use crate::matrices::SymMatrix;
use crate::poly::{reduce_mod_simplex_ideal, reduce_mod_sphere_ideal, Monomial, Polynomial};
use crate::scalar::{format_rational, parse_rational, rational_to_f64, Coeff};
use crate::sdp::min_eigenvalue;

/// What a certificate certifies: cone membership, or a Lasserre bound level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertCone {
    Cone(ConeId),
    Bound(u32),
}

impl fmt::Display for CertCone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertCone::Cone(c) => write!(f, "{c}"),
            CertCone::Bound(r) => write!(f, "lasserre({r})"),
        }
    }
}

impl std::str::FromStr for CertCone {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.trim().strip_prefix("lasserre(") {
            let r =
                rest.trim_end_matches(')').parse().map_err(|_| Error::Parse(format!("bad bound level in `{s}`")))?;
            return Ok(CertCone::Bound(r));
        }
        Ok(CertCone::Cone(s.parse()?))
    }
}

/// Gram matrices (one per SOS block, in formulation order) and free
/// multiplier values witnessing the cone identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub cone: CertCone,
    pub labels: Vec<String>,
    pub basis: Vec<Vec<Monomial>>,
    pub gram: Vec<DMatrix<f64>>,
    pub gram_exact: Option<Vec<DMatrix<BigRational>>>,
    /// Free scalars: ideal-multiplier coefficients, then λ for bounds.
    pub multipliers: Vec<f64>,
    pub multipliers_exact: Option<Vec<BigRational>>,
    pub residual: f64,
    pub min_eig: f64,
    pub exact: bool,
}

impl Certificate {
    pub fn to_json(&self) -> Value {
        let basis: Vec<Vec<&[u32]>> = self.basis.iter().map(|b| b.iter().map(Monomial::exponents).collect()).collect();
        let gram: Vec<Vec<f64>> = self.gram.iter().map(row_major).collect();
        let mut v = json!({
            "cone": self.cone.to_string(),
            "labels": self.labels,
            "basis": basis,
            "gram": gram,
            "multipliers": self.multipliers,
            "residual": self.residual,
            "min_eig": self.min_eig,
            "exact": self.exact,
        });
        if let Some(ge) = &self.gram_exact {
            let s: Vec<Vec<String>> = ge
                .iter()
                .map(|g| {
                    let n = g.nrows();
                    (0..n * n).map(|k| format_rational(&g[(k / n, k % n)])).collect()
                })
                .collect();
            v["gram_exact"] = json!(s);
        }
        if let Some(me) = &self.multipliers_exact {
            v["multipliers_exact"] = json!(me.iter().map(format_rational).collect::<Vec<_>>());
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("certificate JSON: {what}"));
        let cone: CertCone = v.get("cone").and_then(Value::as_str).ok_or_else(|| bad("missing `cone`"))?.parse()?;
        let labels: Vec<String> = match v.get("labels") {
            Some(l) => serde_json::from_value(l.clone()).map_err(|_| bad("bad `labels`"))?,
            None => Vec::new(),
        };
        let basis_raw: Vec<Vec<Vec<u32>>> =
            serde_json::from_value(v.get("basis").cloned().ok_or_else(|| bad("missing `basis`"))?)
                .map_err(|_| bad("bad `basis`"))?;
        let basis: Vec<Vec<Monomial>> =
            basis_raw.into_iter().map(|b| b.into_iter().map(Monomial::new).collect()).collect();
        let gram_raw: Vec<Vec<f64>> =
            serde_json::from_value(v.get("gram").cloned().ok_or_else(|| bad("missing `gram`"))?)
                .map_err(|_| bad("bad `gram`"))?;
        if gram_raw.len() != basis.len() {
            return Err(Error::CertificateShape(format!("{} Gram blocks for {} bases", gram_raw.len(), basis.len())));
        }
        let mut gram = Vec::with_capacity(gram_raw.len());
        for (g, b) in gram_raw.iter().zip(&basis) {
            let n = b.len();
            if g.len() != n * n {
                return Err(Error::CertificateShape(format!("Gram of length {} for basis of size {n}", g.len())));
            }
            gram.push(DMatrix::from_row_slice(n, n, g));
        }
        let gram_exact = match v.get("gram_exact") {
            None | Some(Value::Null) => None,
            Some(ge) => {
                let s: Vec<Vec<String>> = serde_json::from_value(ge.clone()).map_err(|_| bad("bad `gram_exact`"))?;
                let mut out = Vec::new();
                for (g, b) in s.iter().zip(&basis) {
                    let n = b.len();
                    if g.len() != n * n {
                        return Err(Error::CertificateShape("exact Gram size".into()));
                    }
                    let vals: Vec<BigRational> = g
                        .iter()
                        .map(|t| parse_rational(t).ok_or_else(|| bad("bad rational")))
                        .collect::<Result<_>>()?;
                    out.push(DMatrix::from_row_slice(n, n, &vals));
                }
                Some(out)
            }
        };
        let multipliers: Vec<f64> = match v.get("multipliers") {
            Some(m) => serde_json::from_value(m.clone()).map_err(|_| bad("bad `multipliers`"))?,
            None => Vec::new(),
        };
        let multipliers_exact = match v.get("multipliers_exact") {
            None | Some(Value::Null) => None,
            Some(me) => {
                let s: Vec<String> = serde_json::from_value(me.clone()).map_err(|_| bad("bad `multipliers_exact`"))?;
                Some(s.iter().map(|t| parse_rational(t).ok_or_else(|| bad("bad rational"))).collect::<Result<_>>()?)
            }
        };
        Ok(Certificate {
            cone,
            labels,
            basis,
            gram,
            gram_exact,
            multipliers,
            multipliers_exact,
            residual: v.get("residual").and_then(Value::as_f64).unwrap_or(f64::NAN),
            min_eig: v.get("min_eig").and_then(Value::as_f64).unwrap_or(f64::NAN),
            exact: v.get("exact").and_then(Value::as_bool).unwrap_or(false),
        })
    }
}

fn row_major(g: &DMatrix<f64>) -> Vec<f64> {
    let n = g.nrows();
    (0..n * g.ncols()).map(|k| g[(k / g.ncols(), k % g.ncols())]).collect()
}

pub(crate) fn problem_for(cone: CertCone, m: &SymMatrix) -> Result<SosProblem> {
    match cone {
        CertCone::Cone(c) => formulate(m, c),
        CertCone::Bound(r) => formulate_bound(m, r),
    }
}

fn check_shape(cert: &Certificate, p: &SosProblem) -> Result<()> {
    if cert.gram.len() != p.blocks.len() {
        return Err(Error::CertificateShape(format!(
            "{} Gram blocks, formulation has {}",
            cert.gram.len(),
            p.blocks.len()
        )));
    }
    for (k, (g, blk)) in cert.gram.iter().zip(&p.blocks).enumerate() {
        if g.nrows() != blk.dim() || g.ncols() != blk.dim() {
            return Err(Error::CertificateShape(format!(
                "block {k}: Gram {}x{}, basis size {}",
                g.nrows(),
                g.ncols(),
                blk.dim()
            )));
        }
        if let Some(b) = cert.basis.get(k) {
            if b != &blk.basis {
                return Err(Error::CertificateShape(format!("block {k}: basis differs from the formulation")));
            }
        }
    }
    if cert.multipliers.len() != p.free_scalars.len() {
        return Err(Error::CertificateShape(format!(
            "{} multipliers, formulation has {}",
            cert.multipliers.len(),
            p.free_scalars.len()
        )));
    }
    Ok(())
}

/// `sum_k g_k z_k^T G_k z_k + sum_j c_j h_j` minus the target, reduced.
pub(crate) fn identity_defect<C: Coeff>(
    p: &SosProblem,
    target: &Polynomial<C>,
    gram: &[DMatrix<C>],
    mult: &[C],
) -> Polynomial<C>
where
    C: nalgebra::Scalar,
{
    let n = p.nvars;
    let mut rhs = Polynomial::<C>::zero(n);
    for (blk, g) in p.blocks.iter().zip(gram) {
        let d = blk.dim();
        let mut terms = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                terms.push((blk.basis[i].mul(&blk.basis[j]), g[(i, j)].clone()));
            }
        }
        let sq = Polynomial::from_terms(n, terms);
        let gk = blk.multiplier.map_coeffs(|c| C::from_rational(c));
        rhs = rhs.add_ref(&gk.mul_ref(&sq));
    }
    for (f, c) in p.free_scalars.iter().zip(mult) {
        let h = f.multiplier.map_coeffs(|q| C::from_rational(q));
        rhs = rhs.add_ref(&h.scale(c));
    }
    let diff = rhs.sub_ref(target);
    match p.reduction {
        Reduction::None => diff,
        Reduction::Sphere => reduce_mod_sphere_ideal(&diff),
        Reduction::Simplex => reduce_mod_simplex_ideal(&diff),
    }
}

pub(crate) fn min_block_eig(gram: &[DMatrix<f64>]) -> f64 {
    gram.iter().map(min_eigenvalue).fold(f64::INFINITY, f64::min)
}

pub(crate) fn float_residual(p: &SosProblem, gram: &[DMatrix<f64>], mult: &[f64]) -> f64 {
    identity_defect(p, &p.target.float, gram, mult).max_abs_coeff()
}

pub(crate) fn exact_residual(p: &SosProblem, gram: &[DMatrix<BigRational>], mult: &[BigRational]) -> Option<f64> {
    let target = p.target.exact.as_ref()?;
    Some(identity_defect(p, target, gram, mult).max_abs_coeff())
}

/// Re-expands the certificate's identity and returns `(residual, min_eig)`.
/// Exact data is used when present and the matrix is rational.
pub fn verify_certificate(cert: &Certificate, m: &SymMatrix) -> Result<(f64, f64)> {
    let p = problem_for(cert.cone, m)?;
    check_shape(cert, &p)?;
    if let (Some(ge), Some(me)) = (&cert.gram_exact, &cert.multipliers_exact) {
        if ge.len() == cert.gram.len() && me.len() == cert.multipliers.len() {
            if let Some(res) = exact_residual(&p, ge, me) {
                let gf: Vec<DMatrix<f64>> = ge.iter().map(|g| g.map(|q| rational_to_f64(&q))).collect();
                return Ok((res, min_block_eig(&gf)));
            }
        }
    }
    Ok((float_residual(&p, &cert.gram, &cert.multipliers), min_block_eig(&cert.gram)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;
    use num_traits::Zero;

    /// x^T M x = (x1 - x2)^2 (x1 + x2) mod the simplex ideal, for M = [[1,-1],[-1,1]].
    fn hand_built() -> (SymMatrix, Certificate) {
        let m = SymMatrix::from_i64(2, &[1, -1, -1, 1]).unwrap();
        let cone = ConeId::las_simplex(3).unwrap();
        let p = formulate(&m, cone).unwrap();
        // sigma_i = (x1 - x2)^2 for both multipliers x1, x2
        let g = DMatrix::from_row_slice(2, 2, &[rat_int(1), rat_int(-1), rat_int(-1), rat_int(1)]);
        let gram_exact = vec![g.clone(), g];
        let cert = Certificate {
            cone: CertCone::Cone(cone),
            labels: p.blocks.iter().map(|b| b.label.clone()).collect(),
            basis: p.blocks.iter().map(|b| b.basis.clone()).collect(),
            gram: gram_exact.iter().map(|g| g.map(|q| rational_to_f64(&q))).collect(),
            gram_exact: Some(gram_exact),
            multipliers: vec![],
            multipliers_exact: Some(vec![]),
            residual: 0.0,
            min_eig: 0.0,
            exact: true,
        };
        (m, cert)
    }

    #[test]
    fn hand_built_certificate_is_exact() {
        let (m, cert) = hand_built();
        let (res, eig) = verify_certificate(&cert, &m).unwrap();
        assert_eq!(res, 0.0);
        assert!(eig.abs() < 1e-12);
    }

    #[test]
    fn corrupted_gram_detected() {
        let (m, mut cert) = hand_built();
        cert.gram_exact = None;
        cert.gram[0][(0, 0)] += 1.0;
        let (res, _) = verify_certificate(&cert, &m).unwrap();
        assert!(res > 0.5);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let (m, mut cert) = hand_built();
        cert.gram.pop();
        assert!(matches!(verify_certificate(&cert, &m), Err(Error::CertificateShape(_))));
        let (m, mut cert) = hand_built();
        cert.cone = CertCone::Cone(ConeId::k(0));
        assert!(verify_certificate(&cert, &m).is_err());
    }

    #[test]
    fn json_round_trip() {
        let (m, cert) = hand_built();
        let back = Certificate::from_json(&cert.to_json()).unwrap();
        assert_eq!(back, cert);
        assert_eq!(verify_certificate(&back, &m).unwrap().0, 0.0);
        assert!(BigRational::zero().is_zero());
    }
}
