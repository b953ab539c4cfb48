use serde_json::{json, Value};

use nalgebra::DMatrix;

use super::certificate::{identity_defect, CertCone, Certificate};
use super::lower::lower;
use super::membership::{build_certificate, check_dims, extract, MembershipOptions};
use super::{formulate_bound, Reduction, SosProblem};
use crate::error::{Error, Result};
use crate::matrices::SymMatrix;
use crate::poly::divide_by_simplex_generator;
use crate::sdp::{self, SdpStatus};

/// Residual and gap level at which a stalled solve is still accepted.
const NEAR_OPTIMAL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub r: u32,
    /// `-inf` when no `λ` satisfies the coefficient equations.
    pub value: f64,
    pub certificate: Option<Certificate>,
    pub iterations: usize,
    /// Relative duality gap reported by the solver at termination.
    pub gap: f64,
}

impl BoundResult {
    pub fn to_json(&self, with_certificate: bool) -> Value {
        let value = if self.value.is_finite() { json!(self.value) } else { json!("-inf") };
        let mut v = json!({
            "r": self.r,
            "value": value,
            "iterations": self.iterations,
            "gap": self.gap,
        });
        if let Some(c) = &self.certificate {
            v["residual"] = json!(c.residual);
            v["min_eig"] = json!(c.min_eig);
            if with_certificate {
                v["certificate"] = c.to_json();
            }
        }
        v
    }
}

/// Level-`r` Lasserre lower bound for `min x^T M x` over the standard simplex.
/// The value is `-inf` when a dual witness shows that no `λ` admits a
/// certificate.
///
/// The SDP is solved modulo `sum x_i - 1` with `λ` as the only free unknown;
/// `q` is then recovered by division, so the certificate satisfies the
/// explicit identity with `deg q ≤ r`.
pub fn lasserre_bound(m: &SymMatrix, r: u32, opts: &MembershipOptions) -> Result<BoundResult> {
    let explicit = formulate_bound(m, r)?;
    check_dims(&explicit, opts, &format!("lasserre({r})"))?;
    let lam_label = explicit.maximize.expect("bound problem maximizes lambda");
    let reduced = SosProblem {
        reduction: Reduction::Simplex,
        free_scalars: vec![explicit.free_scalars[lam_label].clone()],
        maximize: Some(0),
        ..explicit.clone()
    };
    let l = lower(&reduced);
    // phase one: is any λ admissible at all?
    let f = sdp::feasibility(&l.sdp, &opts.sdp, opts.sep_tol)?;
    if f.lambda == f64::NEG_INFINITY || (f.dual_bound <= -opts.sep_tol && f.witness_residual <= opts.witness_tol) {
        return Ok(BoundResult { r, value: f64::NEG_INFINITY, certificate: None, iterations: f.iterations, gap: 0.0 });
    }
    if f.lambda <= -opts.sep_tol {
        return Err(Error::Solver(format!(
            "lasserre({r}): feasibility undecided (lambda {:.3e}, dual bound {:.3e}, witness residual {:.1e})",
            f.lambda, f.dual_bound, f.witness_residual
        )));
    }
    let sol = sdp::solve(&l.sdp, &opts.sdp)?;
    let gap = (sol.primal_obj - sol.dual_obj).abs() / (1.0 + sol.primal_obj.abs() + sol.dual_obj.abs());
    let near = sol.primal_residual <= NEAR_OPTIMAL && sol.dual_residual <= NEAR_OPTIMAL && gap <= NEAR_OPTIMAL;
    if sol.status != SdpStatus::Optimal && !near {
        return Err(Error::Solver(format!(
            "lasserre({r}): {:?} after {} iterations, {}",
            sol.status, sol.iterations, sol.message
        )));
    }
    let (gram, lam) = extract(&reduced, &l, &sol.x, &sol.x_lp, &sol.x_free);
    let value = lam[0];
    let mult = recover_ideal_multiplier(&explicit, &gram, value);
    let certificate = build_certificate(&explicit, CertCone::Bound(r), gram, mult, false);
    Ok(BoundResult { r, value, certificate: Some(certificate), iterations: sol.iterations, gap })
}

/// Coefficients of `q` (in the order of `p.free_scalars`) followed by `λ`.
fn recover_ideal_multiplier(p: &SosProblem, gram: &[DMatrix<f64>], lambda: f64) -> Vec<f64> {
    let lam = p.maximize.expect("bound problem maximizes lambda");
    let mut mult = vec![0.0; p.free_scalars.len()];
    mult[lam] = lambda;
    // target - λ - Σ blocks = -(defect with q = 0)
    let defect = identity_defect(p, &p.target.float, gram, &mult);
    let (q, _) = divide_by_simplex_generator(&defect.neg_ref());
    for (k, fs) in p.free_scalars.iter().enumerate() {
        if k == lam {
            continue;
        }
        // multiplier is x^β (Σx - 1); its lowest-degree term is -x^β
        let beta = fs.multiplier.terms().map(|(m, _)| m).min_by_key(|m| m.degree()).expect("nonzero multiplier");
        mult[k] = q.coeff_of(beta.exponents());
    }
    mult
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_two_bound_is_one_half() {
        let b = lasserre_bound(&SymMatrix::identity(2), 2, &MembershipOptions::default()).unwrap();
        assert!((b.value - 0.5).abs() < 1e-6, "{}", b.value);
        assert!(b.certificate.unwrap().residual < 1e-7);
    }

    #[test]
    fn horn_low_levels_are_unbounded_below() {
        let b = lasserre_bound(&crate::matrices::horn(), 2, &MembershipOptions::default()).unwrap();
        assert_eq!(b.value, f64::NEG_INFINITY);
        assert!(b.certificate.is_none());
    }

    #[test]
    fn level_zero_rejected() {
        assert!(lasserre_bound(&SymMatrix::identity(2), 0, &MembershipOptions::default()).is_err());
    }
}
