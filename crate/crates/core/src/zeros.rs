//! Zeros of `x^T M x` on the standard simplex and the first- and second-order
//! optimality conditions at them.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrices::{DiagScaling, PsiParams, SymMatrix};
use crate::parallel;
use crate::sdp::{self, LinearBlock, SdpOptions, SdpProblem, SdpStatus};

/// Largest dimension for which all `2^n - 1` supports are enumerated.
pub const MAX_ENUM_DIM: usize = 12;
/// Relative eigenvalue threshold for kernel membership and PSD tests.
pub const KERNEL_TOL: f64 = 1e-9;
/// Minimal entry of a normalized kernel vector counted as strictly positive.
pub const POSITIVITY_TOL: f64 = 1e-8;
/// `u^T M u` above which a point is not a zero.
pub const ZERO_TOL: f64 = 1e-10;
/// On-support bound for `|(Mu)_i|`.
pub const STATIONARITY_TOL: f64 = 1e-9;
/// Off-support threshold for strict complementarity.
pub const SCC_TOL: f64 = 1e-8;
/// Threshold for the projected Hessian eigenvalue.
pub const SOSC_TOL: f64 = 1e-9;
/// Value of `x^T M x` below which a nonnegative `x` disproves copositivity.
pub const NONCOP_TOL: f64 = 1e-8;

/// A point of the standard simplex with support `support` (zero-based,
/// increasing) and positive coordinates `coords` on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexZero {
    pub n: usize,
    pub support: Vec<usize>,
    pub coords: Vec<f64>,
}

impl SimplexZero {
    /// Builds a zero from a full nonnegative vector, renormalized to sum 1.
    pub fn from_vector(v: &[f64]) -> Self {
        let total: f64 = v.iter().sum();
        let support: Vec<usize> = (0..v.len()).filter(|&i| v[i] > 0.0).collect();
        let coords = support.iter().map(|&i| v[i] / total).collect();
        SimplexZero { n: v.len(), support, coords }
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut u = vec![0.0; self.n];
        for (&i, &c) in self.support.iter().zip(&self.coords) {
            u[i] = c;
        }
        u
    }

    /// One-based support, as usually written.
    pub fn support_one_based(&self) -> Vec<usize> {
        self.support.iter().map(|i| i + 1).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZeroSet {
    Empty,
    Finite(Vec<SimplexZero>),
    /// Supports whose principal kernel has dimension at least two and
    /// contains a positive vector, plus the isolated zeros found elsewhere.
    Infinite {
        supports: Vec<Vec<usize>>,
        isolated: Vec<SimplexZero>,
    },
}

impl ZeroSet {
    pub fn kind(&self) -> &'static str {
        match self {
            ZeroSet::Empty => "empty",
            ZeroSet::Finite(_) => "finite",
            ZeroSet::Infinite { .. } => "infinite",
        }
    }

    pub fn zeros(&self) -> &[SimplexZero] {
        match self {
            ZeroSet::Empty => &[],
            ZeroSet::Finite(z) => z,
            ZeroSet::Infinite { isolated, .. } => isolated,
        }
    }

    pub fn to_json(&self) -> Value {
        let zeros: Vec<Value> =
            self.zeros().iter().map(|z| json!({"support": z.support_one_based(), "point": z.to_vector()})).collect();
        let mut v = json!({"kind": self.kind(), "zeros": zeros});
        if let ZeroSet::Infinite { supports, .. } = self {
            v["infinite_supports"] =
                json!(supports.iter().map(|s| s.iter().map(|i| i + 1).collect::<Vec<_>>()).collect::<Vec<_>>());
        }
        v
    }
}

enum SupportOutcome {
    Nothing,
    Zero(SimplexZero),
    Family(Vec<usize>),
    Negative(Vec<f64>, f64),
}

fn subsets_of(n: usize) -> Vec<Vec<usize>> {
    (1u32..(1u32 << n)).map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect()).collect()
}

/// Unit vector with its largest-magnitude entry made positive.
fn orient(v: DVector<f64>) -> DVector<f64> {
    let imax = v.iamax();
    if v[imax] < 0.0 {
        -v
    } else {
        v
    }
}

fn embed(n: usize, s: &[usize], v: &[f64]) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    let mut u = vec![0.0; n];
    for (&i, &x) in s.iter().zip(v) {
        u[i] = x / total;
    }
    u
}

fn analyse_support(m: &SymMatrix, s: &[usize]) -> SupportOutcome {
    let n = m.n();
    let sub = m.principal_submatrix(s);
    let eig = sub.clone().symmetric_eigen();
    let norm = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let thr = KERNEL_TOL * (1.0 + norm);
    let (imin, lmin) =
        eig.eigenvalues.iter().enumerate().fold((0, f64::INFINITY), |a, (i, &v)| if v < a.1 { (i, v) } else { a });
    if lmin < -thr {
        let v = orient(eig.eigenvectors.column(imin).into_owned());
        if v.iter().all(|&x| x > POSITIVITY_TOL) {
            let u = embed(n, s, v.as_slice());
            let val = m.quad_value(&u);
            if val < -NONCOP_TOL {
                return SupportOutcome::Negative(u, val);
            }
        }
        return SupportOutcome::Nothing;
    }
    let kernel: Vec<usize> = (0..s.len()).filter(|&i| eig.eigenvalues[i] <= thr).collect();
    match kernel.len() {
        0 => SupportOutcome::Nothing,
        1 => {
            let v = orient(eig.eigenvectors.column(kernel[0]).into_owned());
            if v.iter().all(|&x| x > POSITIVITY_TOL) {
                SupportOutcome::Zero(SimplexZero { n, support: s.to_vec(), coords: normalized(v.as_slice()) })
            } else {
                SupportOutcome::Nothing
            }
        }
        _ => {
            let basis = DMatrix::from_fn(s.len(), kernel.len(), |i, j| eig.eigenvectors[(i, kernel[j])]);
            if positive_kernel_vector(&basis).is_some() {
                SupportOutcome::Family(s.to_vec())
            } else {
                SupportOutcome::Nothing
            }
        }
    }
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    v.iter().map(|x| x / total).collect()
}

/// Searches `v = K c` with `sum v = 1` maximizing `min v_i`; returns `v` when
/// that minimum exceeds the positivity threshold.
pub(crate) fn positive_kernel_vector(k: &DMatrix<f64>) -> Option<Vec<f64>> {
    let (rows, d) = (k.nrows(), k.ncols());
    // rows 0..rows: (K c)_i - t - s_i = 0; row `rows`: sum_i (K c)_i = 1
    let mut b = vec![0.0; rows + 1];
    b[rows] = 1.0;
    let mut p = SdpProblem::new(b);
    let mut lp = LinearBlock::new();
    for i in 0..rows {
        lp.push(vec![(i, -1.0)], 0.0);
    }
    let mut free = LinearBlock::new();
    for j in 0..d {
        let mut col: Vec<(usize, f64)> = (0..rows).map(|i| (i, k[(i, j)])).collect();
        col.push((rows, k.column(j).sum()));
        free.push(col, 0.0);
    }
    free.push((0..rows).map(|i| (i, -1.0)).collect(), -1.0);
    p.lp = lp;
    p.free = free;
    let sol = sdp::solve(&p, &SdpOptions::default()).ok()?;
    if sol.status != SdpStatus::Optimal {
        return None;
    }
    let c = DVector::from_column_slice(&sol.x_free[..d]);
    let v = k * c;
    (v.min() > POSITIVITY_TOL).then(|| v.iter().copied().collect())
}

/// All zeros of `x^T M x` on the simplex, by principal-submatrix kernels.
pub fn enumerate_zeros(m: &SymMatrix) -> Result<ZeroSet> {
    let n = m.n();
    if n > MAX_ENUM_DIM {
        return Err(Error::TooManySupports(n));
    }
    let subsets = subsets_of(n);
    let outcomes = parallel::map(&subsets, |s| analyse_support(m, s));
    let mut zeros = Vec::new();
    let mut families = Vec::new();
    for o in outcomes {
        match o {
            SupportOutcome::Nothing => {}
            SupportOutcome::Zero(z) => zeros.push(z),
            SupportOutcome::Family(s) => families.push(s),
            SupportOutcome::Negative(witness, value) => return Err(Error::NonCopositive { witness, value }),
        }
    }
    zeros.sort_by(|a, b| a.support.cmp(&b.support));
    Ok(if !families.is_empty() {
        ZeroSet::Infinite { supports: families, isolated: zeros }
    } else if zeros.is_empty() {
        ZeroSet::Empty
    } else {
        ZeroSet::Finite(zeros)
    })
}

/// The five minimizers of the standard quadratic program for `T(psi)`.
pub fn t_psi_minimizers(psi: &PsiParams) -> Vec<SimplexZero> {
    let p = |i: usize| psi.get(i);
    let sin = f64::sin;
    let us: [[f64; 5]; 5] = [
        [sin(p(5)), sin(p(4) + p(5)), sin(p(4)), 0.0, 0.0],
        [sin(p(3) + p(4)), sin(p(3)), 0.0, 0.0, sin(p(4))],
        [0.0, sin(p(1)), sin(p(1) + p(5)), sin(p(5)), 0.0],
        [0.0, 0.0, sin(p(2)), sin(p(1) + p(2)), sin(p(1))],
        [sin(p(2)), 0.0, 0.0, sin(p(3)), sin(p(2) + p(3))],
    ];
    us.iter().map(|u| SimplexZero::from_vector(u)).collect()
}

/// `sin psi_5 (cos(psi_2 + psi_3) + cos(psi_1 + psi_4 + psi_5))`, the value of
/// `(T(psi) u_1)_4` for the unnormalized first minimizer.
pub fn scc_closed_form(psi: &PsiParams) -> f64 {
    let p = |i: usize| psi.get(i);
    p(5).sin() * ((p(2) + p(3)).cos() + (p(1) + p(4) + p(5)).cos())
}

/// `(T(psi) u_1)_4` computed as a dot product.
pub fn scc_direct(psi: &PsiParams) -> f64 {
    let t = crate::matrices::t_psi(psi);
    let p = |i: usize| psi.get(i);
    let u1 = [p(5).sin(), (p(4) + p(5)).sin(), p(4).sin()];
    (0..3).map(|i| t.get(i, 3) * u1[i]).sum()
}

fn require_zero(m: &SymMatrix, z: &SimplexZero) -> Result<Vec<f64>> {
    if z.n != m.n() {
        return Err(Error::DimensionMismatch { expected: m.n(), got: z.n });
    }
    let u = z.to_vector();
    let val = m.quad_value(&u);
    if val.abs() > ZERO_TOL {
        return Err(Error::NotAZero(val));
    }
    let mu = m.mul_vec(&u);
    if let Some(&i) = z.support.iter().find(|&&i| mu[i].abs() > STATIONARITY_TOL) {
        return Err(Error::NotAZero(mu[i]));
    }
    Ok(mu)
}

/// Strict complementarity: `(Mu)_i > 0` off the support.
pub fn check_scc(m: &SymMatrix, z: &SimplexZero) -> Result<bool> {
    let mu = require_zero(m, z)?;
    Ok((0..m.n()).filter(|i| !z.support.contains(i)).all(|i| mu[i] > SCC_TOL))
}

/// Orthonormal basis (as columns) of `{a : sum a = 0}` in dimension `k`.
fn hyperplane_basis(k: usize) -> DMatrix<f64> {
    // columns e_1 - e_j are a basis; orthonormalize them
    let raw = DMatrix::from_fn(k, k - 1, |i, j| {
        if i == 0 {
            1.0
        } else if i == j + 1 {
            -1.0
        } else {
            0.0
        }
    });
    raw.qr().q()
}

/// Second-order sufficiency: `M[S]` positive definite on `sum a = 0`.
pub fn check_sosc(m: &SymMatrix, z: &SimplexZero) -> Result<bool> {
    require_zero(m, z)?;
    let k = z.support.len();
    if k == 1 {
        return Ok(true);
    }
    let b = hyperplane_basis(k);
    let h = b.transpose() * m.principal_submatrix(&z.support) * &b;
    Ok(sdp::min_eigenvalue(&h) > SOSC_TOL)
}

/// Linear independence of the active constraint gradients: `e` and the
/// `e_i` with `i` off the support.
pub fn check_cqc(z: &SimplexZero) -> bool {
    let off: Vec<usize> = (0..z.n).filter(|i| !z.support.contains(i)).collect();
    let a = DMatrix::from_fn(off.len() + 1, z.n, |r, c| if r == 0 || off[r - 1] == c { 1.0 } else { 0.0 });
    a.rank(1e-12) == off.len() + 1
}

/// The zero of `DMD` corresponding to `z`: `D^{-1} u / |D^{-1} u|_1`.
pub fn scaled_zero(z: &SimplexZero, d: &DiagScaling) -> Result<SimplexZero> {
    if d.len() != z.n {
        return Err(Error::DimensionMismatch { expected: z.n, got: d.len() });
    }
    let v: Vec<f64> = z.coords.iter().zip(&z.support).map(|(c, &i)| c / d.values()[i]).collect();
    Ok(SimplexZero { n: z.n, support: z.support.clone(), coords: normalized(&v) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroFlags {
    pub zero: SimplexZero,
    pub cqc: bool,
    pub scc: bool,
    pub sosc: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptReport {
    pub zeros: ZeroSet,
    pub flags: Vec<ZeroFlags>,
    /// No zeros at all: the matrix is strictly copositive.
    pub interior: bool,
    pub overall: bool,
}

/// Statement licensed by a positive report.
pub const OPT_CLAIM: &str = "DMD lies in the union of the LAS_simplex(r) cones for every positive diagonal D";

impl OptReport {
    pub fn to_json(&self) -> Value {
        json!({
            "zero_set": self.zeros.to_json(),
            "flags": self.flags.iter().map(|f| json!({
                "support": f.zero.support_one_based(),
                "point": f.zero.to_vector(),
                "cqc": f.cqc,
                "scc": f.scc,
                "sosc": f.sosc,
            })).collect::<Vec<_>>(),
            "interior": self.interior,
            "overall": self.overall,
            "claim": if self.overall { Value::from(OPT_CLAIM) } else { Value::Null },
        })
    }
}

/// Enumerates the zeros and evaluates CQC, SCC and SOSC at each of them.
/// An infinite zero set makes the report negative without per-zero claims.
pub fn opt_dmd_report(m: &SymMatrix) -> Result<OptReport> {
    let zeros = enumerate_zeros(m)?;
    match &zeros {
        ZeroSet::Empty => Ok(OptReport { zeros, flags: Vec::new(), interior: true, overall: true }),
        ZeroSet::Infinite { .. } => Ok(OptReport { zeros, flags: Vec::new(), interior: false, overall: false }),
        ZeroSet::Finite(list) => {
            let flags = list
                .iter()
                .map(|z| {
                    Ok(ZeroFlags { zero: z.clone(), cqc: check_cqc(z), scc: check_scc(m, z)?, sosc: check_sosc(m, z)? })
                })
                .collect::<Result<Vec<_>>>()?;
            let overall = flags.iter().all(|f| f.cqc && f.scc && f.sosc);
            Ok(OptReport { zeros, flags, interior: false, overall })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{horn, scale, t_psi};
    use approx::assert_abs_diff_eq;

    fn psi0() -> PsiParams {
        PsiParams::uniform_tenth()
    }

    #[test]
    fn t_psi_has_five_zeros_on_expected_supports() {
        let zs = enumerate_zeros(&t_psi(&psi0())).unwrap();
        let ZeroSet::Finite(list) = &zs else { panic!("{zs:?}") };
        let supports: Vec<Vec<usize>> = list.iter().map(|z| z.support_one_based()).collect();
        assert_eq!(supports, vec![vec![1, 2, 3], vec![1, 2, 5], vec![1, 4, 5], vec![2, 3, 4], vec![3, 4, 5]]);
    }

    #[test]
    fn minimizers_match_enumeration() {
        let mins = t_psi_minimizers(&psi0());
        let zs = enumerate_zeros(&t_psi(&psi0())).unwrap();
        for v in &mins {
            let z = zs.zeros().iter().find(|z| z.support == v.support).expect("support found");
            for (a, b) in z.coords.iter().zip(&v.coords) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-8);
            }
            assert!(t_psi(&psi0()).quad_value(&v.to_vector()) <= 1e-10);
        }
    }

    #[test]
    fn horn_zero_set_is_infinite() {
        let zs = enumerate_zeros(&horn()).unwrap();
        let ZeroSet::Infinite { supports, .. } = &zs else { panic!("{zs:?}") };
        assert!(supports.contains(&vec![0, 2, 3]));
    }

    #[test]
    fn identity_has_no_zeros() {
        assert_eq!(enumerate_zeros(&SymMatrix::identity(4)).unwrap(), ZeroSet::Empty);
        let r = opt_dmd_report(&SymMatrix::identity(4)).unwrap();
        assert!(r.overall && r.interior);
    }

    #[test]
    fn non_copositive_matrix_is_reported() {
        let m = SymMatrix::from_i64(2, &[1, -2, -2, 1]).unwrap();
        assert!(matches!(enumerate_zeros(&m), Err(Error::NonCopositive { .. })));
    }

    #[test]
    fn closed_form_matches_dot_product() {
        let v = scc_closed_form(&psi0());
        assert_abs_diff_eq!(v, scc_direct(&psi0()), epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.4316, epsilon = 1e-4);
    }

    #[test]
    fn horn_family_point_scc_and_sosc() {
        let z = SimplexZero::from_vector(&[0.5, 0.0, 0.25, 0.25, 0.0]);
        // H u = (0, 1/2, 0, 0, 1/2)
        assert!(check_scc(&horn(), &z).unwrap());
        assert!(!check_sosc(&horn(), &z).unwrap());
    }

    #[test]
    fn sosc_vacuous_on_vertex() {
        let m = SymMatrix::from_i64(2, &[0, 1, 1, 1]).unwrap();
        let z = SimplexZero::from_vector(&[1.0, 0.0]);
        assert!(check_sosc(&m, &z).unwrap());
        assert!(check_cqc(&z));
    }

    #[test]
    fn non_zero_is_rejected() {
        let z = SimplexZero::from_vector(&[0.5, 0.5]);
        assert!(matches!(check_scc(&SymMatrix::identity(2), &z), Err(Error::NotAZero(_))));
    }

    #[test]
    fn scaling_round_trip() {
        let d = DiagScaling::new(vec![1.0, 2.0, 1.0, 1.0, 1.0]).unwrap();
        let m = t_psi(&psi0());
        let dm = scale(&m, &d).unwrap();
        for z in t_psi_minimizers(&psi0()) {
            let w = scaled_zero(&z, &d).unwrap();
            assert!(dm.quad_value(&w.to_vector()).abs() <= 1e-10);
            let back = scaled_zero(&w, &d.inverse()).unwrap();
            for (a, b) in back.coords.iter().zip(&z.coords) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn t_psi_report_is_positive() {
        let r = opt_dmd_report(&t_psi(&psi0())).unwrap();
        assert!(r.overall);
        assert_eq!(r.flags.len(), 5);
        let h = opt_dmd_report(&horn()).unwrap();
        assert!(!h.overall);
    }
}
