use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::certificate::{float_residual, min_block_eig, CertCone, Certificate};
use super::exact::rationalize;
use super::lower::{lower, Lowered, Slot};
use super::{formulate, ConeId, Family, SosProblem};
use crate::error::{Error, Result};
use crate::matrices::SymMatrix;
use crate::parallel;
use crate::sdp::{self, Feasibility, SdpOptions, SdpStatus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipOptions {
    /// Max coefficient residual of a feasible certificate, relative to the
    /// largest target coefficient.
    pub res_tol: f64,
    /// Allowed negative eigenvalue of a feasible certificate (relative).
    pub eig_tol: f64,
    /// Minimal dual margin for an infeasibility verdict (relative).
    pub sep_tol: f64,
    /// Max dual-feasibility violation of an infeasibility witness.
    pub witness_tol: f64,
    /// Try to round feasible certificates to exact rationals.
    pub rational: bool,
    /// Largest Gram block the solver accepts.
    pub max_block_dim: usize,
    pub sdp: SdpOptions,
}

impl Default for MembershipOptions {
    fn default() -> Self {
        MembershipOptions {
            res_tol: 1e-7,
            eig_tol: 1e-8,
            sep_tol: 1e-6,
            witness_tol: 1e-8,
            rational: false,
            max_block_dim: 200,
            sdp: SdpOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Optimal value of the max-λ problem on the normalized target.
    pub lambda: f64,
    /// `b'w` of the normalized dual witness; the infeasibility margin is its negative.
    pub dual_bound: f64,
    /// Certificate residual and min eigenvalue, relative to the target scale.
    pub rel_residual: f64,
    pub rel_min_eig: f64,
    pub witness_residual: f64,
    pub sdp_status: SdpStatus,
    pub iterations: usize,
    pub rows: usize,
    pub max_block_dim: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Feasible(Box<Certificate>),
    /// `margin` is `-b'w` for the normalized witness; infinite when the
    /// coefficient equations alone are inconsistent. `dual_witness` pairs
    /// each matched monomial with its pseudo-moment value.
    Infeasible {
        margin: f64,
        dual_witness: Vec<(Vec<u32>, f64)>,
    },
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    Feasible,
    Infeasible,
    Unknown,
}

impl Verdict {
    pub fn kind(&self) -> VerdictKind {
        match self {
            Verdict::Feasible(_) => VerdictKind::Feasible,
            Verdict::Infeasible { .. } => VerdictKind::Infeasible,
            Verdict::Unknown => VerdictKind::Unknown,
        }
    }
}

impl std::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VerdictKind::Feasible => "feasible",
            VerdictKind::Infeasible => "infeasible",
            VerdictKind::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipResult {
    pub cone: ConeId,
    pub verdict: Verdict,
    pub diagnostics: Diagnostics,
}

impl MembershipResult {
    pub fn kind(&self) -> VerdictKind {
        self.verdict.kind()
    }

    pub fn is_feasible(&self) -> bool {
        self.kind() == VerdictKind::Feasible
    }

    pub fn is_infeasible(&self) -> bool {
        self.kind() == VerdictKind::Infeasible
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match &self.verdict {
            Verdict::Feasible(c) => Some(c),
            _ => None,
        }
    }

    pub fn margin(&self) -> Option<f64> {
        match &self.verdict {
            Verdict::Infeasible { margin, .. } => Some(*margin),
            _ => None,
        }
    }

    /// JSON summary; the certificate body is included when `with_certificate`.
    pub fn to_json(&self, with_certificate: bool) -> Value {
        let mut v = json!({
            "cone": self.cone.to_string(),
            "verdict": self.kind().to_string(),
            "diagnostics": serde_json::to_value(&self.diagnostics).unwrap_or(Value::Null),
        });
        match &self.verdict {
            Verdict::Feasible(c) => {
                v["residual"] = json!(c.residual);
                v["min_eig"] = json!(c.min_eig);
                v["exact"] = json!(c.exact);
                if with_certificate {
                    v["certificate"] = c.to_json();
                }
            }
            Verdict::Infeasible { margin, dual_witness } => {
                if margin.is_finite() {
                    v["margin"] = json!(margin);
                } else {
                    v["margin"] = Value::Null;
                    v["structural"] = json!(true);
                }
                if with_certificate {
                    v["dual_witness"] =
                        json!(dual_witness.iter().map(|(e, w)| json!({"exp": e, "value": w})).collect::<Vec<_>>());
                }
            }
            Verdict::Unknown => {}
        }
        v
    }
}

pub(crate) fn check_dims(p: &SosProblem, opts: &MembershipOptions, what: &str) -> Result<()> {
    let d = p.max_block_dim();
    if d > opts.max_block_dim {
        return Err(Error::LevelCap(format!("{what} needs a Gram block of size {d}, cap is {}", opts.max_block_dim)));
    }
    Ok(())
}

/// Splits the solver's variables back into per-block Gram matrices (in the
/// original target scale) and free multipliers.
pub(crate) fn extract(
    p: &SosProblem,
    l: &Lowered,
    x: &[DMatrix<f64>],
    x_lp: &[f64],
    x_free: &[f64],
) -> (Vec<DMatrix<f64>>, Vec<f64>) {
    let gram = l
        .block_slot
        .iter()
        .map(|s| match *s {
            Slot::Psd(k) => &x[k] * l.scale,
            Slot::Lp(j) => DMatrix::from_element(1, 1, x_lp[j] * l.scale),
        })
        .collect();
    let mult = l.free_slot.iter().map(|&j| x_free[j] * l.scale).collect();
    let _ = p;
    (gram, mult)
}

pub(crate) fn build_certificate(
    p: &SosProblem,
    cone: CertCone,
    gram: Vec<DMatrix<f64>>,
    mult: Vec<f64>,
    rational: bool,
) -> Certificate {
    let residual = float_residual(p, &gram, &mult);
    let min_eig = min_block_eig(&gram);
    let mut cert = Certificate {
        cone,
        labels: p.blocks.iter().map(|b| b.label.clone()).collect(),
        basis: p.blocks.iter().map(|b| b.basis.clone()).collect(),
        gram,
        gram_exact: None,
        multipliers: mult,
        multipliers_exact: None,
        residual,
        min_eig,
        exact: false,
    };
    if rational && p.target.exact.is_some() {
        if let Some((ge, me)) = rationalize(p, &cert.gram, &cert.multipliers) {
            if let Some(res) = super::certificate::exact_residual(p, &ge, &me) {
                if res == 0.0 {
                    cert.gram = ge.iter().map(|g| g.map(|q| crate::scalar::rational_to_f64(&q))).collect();
                    cert.multipliers = me.iter().map(crate::scalar::rational_to_f64).collect();
                    cert.residual = 0.0;
                    cert.min_eig = min_block_eig(&cert.gram);
                    cert.gram_exact = Some(ge);
                    cert.multipliers_exact = Some(me);
                    cert.exact = true;
                }
            }
        }
    }
    cert
}

/// Decides membership of `m` in `cone` with the max-λ formulation.
pub fn check_membership(m: &SymMatrix, cone: ConeId, opts: &MembershipOptions) -> Result<MembershipResult> {
    let p = formulate(m, cone)?;
    check_dims(&p, opts, &cone.to_string())?;
    let l = lower(&p);
    let f: Feasibility = sdp::feasibility(&l.sdp, &opts.sdp, opts.sep_tol)?;
    let mut diag = Diagnostics {
        lambda: f.lambda,
        dual_bound: f.dual_bound,
        rel_residual: f64::NAN,
        rel_min_eig: f64::NAN,
        witness_residual: f.witness_residual,
        sdp_status: f.status,
        iterations: f.iterations,
        rows: l.rows.len(),
        max_block_dim: p.max_block_dim(),
        message: f.message.clone(),
    };
    let witness = |w: &nalgebra::DVector<f64>| -> Vec<(Vec<u32>, f64)> {
        l.rows.iter().zip(w.iter()).map(|(m, v)| (m.exponents().to_vec(), *v)).collect()
    };
    if f.lambda == f64::NEG_INFINITY {
        diag.message = "coefficient equations are inconsistent".into();
        return Ok(MembershipResult {
            cone,
            verdict: Verdict::Infeasible { margin: f64::INFINITY, dual_witness: witness(&f.witness) },
            diagnostics: diag,
        });
    }
    let (gram, mult) = extract(&p, &l, &f.x, &f.x_lp, &f.x_free);
    let cert = build_certificate(&p, CertCone::Cone(cone), gram, mult, opts.rational);
    diag.rel_residual = cert.residual / l.scale;
    diag.rel_min_eig = cert.min_eig / l.scale;
    let verdict = if diag.rel_residual <= opts.res_tol && diag.rel_min_eig >= -opts.eig_tol {
        Verdict::Feasible(Box::new(cert))
    } else if f.dual_bound <= -opts.sep_tol && f.witness_residual <= opts.witness_tol {
        Verdict::Infeasible { margin: -f.dual_bound, dual_witness: witness(&f.witness) }
    } else {
        Verdict::Unknown
    };
    log::debug!("{cone}: {:?} lambda={:.3e} iters={}", verdict.kind(), f.lambda, f.iterations);
    Ok(MembershipResult { cone, verdict, diagnostics: diag })
}

/// Outcome of a level search within one family.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSearch {
    pub family: Family,
    pub level: Option<u32>,
    pub per_level: Vec<(u32, VerdictKind)>,
    /// Result at the found level.
    pub result: Option<MembershipResult>,
}

/// Smallest admissible level `r <= r_max` of `family` at which `m` is
/// certified feasible.
pub fn find_min_level(m: &SymMatrix, family: Family, r_max: u32, opts: &MembershipOptions) -> Result<LevelSearch> {
    let mut per_level = Vec::new();
    for r in family.levels_up_to(r_max) {
        let res = check_membership(m, ConeId::new(family, r)?, opts)?;
        per_level.push((r, res.kind()));
        if res.is_feasible() {
            return Ok(LevelSearch { family, level: Some(r), per_level, result: Some(res) });
        }
    }
    Ok(LevelSearch { family, level: None, per_level, result: None })
}

/// Runs independent membership queries, in parallel when enabled.
pub fn check_batch(queries: &[(SymMatrix, ConeId)], opts: &MembershipOptions) -> Vec<Result<MembershipResult>> {
    parallel::map(queries, |(m, c)| check_membership(m, *c, opts))
}
