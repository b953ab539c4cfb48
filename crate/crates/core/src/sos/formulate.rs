use num_rational::BigRational;
use num_traits::One;

use super::{ConeId, Family, FreeScalar, GramBlock, Reduction, SosProblem, Target};
use crate::error::{Error, Result};
use crate::matrices::SymMatrix;
use crate::poly::{mul_simplex_power, quad_form, squared_vars_form, Monomial, Polynomial};
use crate::scalar::Coeff;

type Q = BigRational;

fn cone_target<C: Coeff>(m: &SymMatrix, cone: ConeId) -> Polynomial<C> {
    let r = cone.level();
    match cone.family() {
        Family::K => Polynomial::sphere_sum(m.n()).pow(r).mul_ref(&squared_vars_form(m)),
        Family::LasSimplex | Family::LasPreordering => mul_simplex_power(&quad_form(m), r - 2),
        Family::LasSphere => squared_vars_form(m),
        Family::Q => mul_simplex_power(&quad_form(m), r),
    }
}

fn make_target(
    m: &SymMatrix,
    f: impl Fn(&SymMatrix) -> Polynomial<Q>,
    g: impl Fn(&SymMatrix) -> Polynomial<f64>,
) -> Target {
    if m.is_rational() {
        let exact = f(m);
        Target { float: exact.to_f64(), exact: Some(exact) }
    } else {
        Target { float: g(m), exact: None }
    }
}

fn one(n: usize) -> Polynomial<Q> {
    Polynomial::constant(n, Q::one())
}

fn mono(m: Monomial) -> Polynomial<Q> {
    Polynomial::monomial(m, Q::one())
}

fn fmt_set(s: &[usize]) -> String {
    s.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

fn fmt_exp(m: &Monomial) -> String {
    m.exponents().iter().map(|e| e.to_string()).collect::<Vec<_>>().join("")
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Homogeneous coefficient-matching problem for membership of `m` in `cone`.
pub fn formulate(m: &SymMatrix, cone: ConeId) -> Result<SosProblem> {
    let n = m.n();
    if n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    // re-validate in case the id was built from raw parts
    let cone = ConeId::new(cone.family(), cone.level())?;
    let r = cone.level();
    let target = make_target(m, |m| cone_target::<Q>(m, cone), |m| cone_target::<f64>(m, cone));
    let mut blocks = Vec::new();
    let mut reduction = Reduction::None;
    match cone.family() {
        Family::K => blocks.push(GramBlock {
            label: "sigma".into(),
            multiplier: one(n),
            basis: Monomial::all_of_degree(n, r + 2),
        }),
        Family::LasSimplex if r % 2 == 1 => {
            let basis = Monomial::all_of_degree(n, (r - 1) / 2);
            for i in 0..n {
                blocks.push(GramBlock {
                    label: format!("sigma_{}", i + 1),
                    multiplier: Polynomial::var(n, i),
                    basis: basis.clone(),
                });
            }
        }
        Family::LasSimplex => {
            blocks.push(GramBlock {
                label: "sigma_0".into(),
                multiplier: one(n),
                basis: Monomial::all_of_degree(n, r / 2),
            });
            let basis = Monomial::all_of_degree(n, (r - 2) / 2);
            let s = Polynomial::<Q>::simplex_sum(n);
            for i in 0..n {
                blocks.push(GramBlock {
                    label: format!("sigma_{}", i + 1),
                    multiplier: Polynomial::var(n, i).mul_ref(&s),
                    basis: basis.clone(),
                });
            }
        }
        Family::LasPreordering => {
            let mut size = (r % 2) as usize;
            while size <= (r as usize).min(n) {
                let basis = Monomial::all_of_degree(n, (r - size as u32) / 2);
                for set in subsets(n, size) {
                    blocks.push(GramBlock {
                        label: format!("sigma_{{{}}}", fmt_set(&set)),
                        multiplier: mono(Monomial::square_free(n, &set)),
                        basis: basis.clone(),
                    });
                }
                size += 2;
            }
        }
        Family::LasSphere => {
            reduction = Reduction::Sphere;
            blocks.push(GramBlock {
                label: "sigma_0".into(),
                multiplier: one(n),
                basis: Monomial::all_up_to_degree(n, r / 2),
            });
        }
        Family::Q => {
            let quad = Monomial::all_of_degree(n, 1);
            for beta in Monomial::all_of_degree(n, r) {
                blocks.push(GramBlock {
                    label: format!("sigma_{}", fmt_exp(&beta)),
                    multiplier: mono(beta),
                    basis: quad.clone(),
                });
            }
            for beta in Monomial::all_of_degree(n, r + 2) {
                blocks.push(GramBlock {
                    label: format!("c_{}", fmt_exp(&beta)),
                    multiplier: mono(beta),
                    basis: vec![Monomial::one(n)],
                });
            }
        }
    }
    Ok(SosProblem { nvars: n, target, reduction, blocks, free_scalars: Vec::new(), maximize: None })
}

fn reduced_basis(n: usize, d: u32) -> Vec<Monomial> {
    Monomial::all_up_to_degree(n, d).into_iter().filter(|m| m.exponents()[n - 1] == 0).collect()
}

/// `max λ` with `x^T M x - λ = σ_0 + Σ x_i σ_i + q (Σ x_i - 1)`,
/// `σ_0 ∈ Σ_r`, `σ_i ∈ Σ_{r-1}`, `deg q ≤ r`.
///
/// Gram bases omit `x_n`: modulo the simplex ideal they span the same space,
/// and the moment matrices keep an interior.
pub fn formulate_bound(m: &SymMatrix, r: u32) -> Result<SosProblem> {
    let n = m.n();
    if r < 1 {
        return Err(Error::UnsupportedCone("Lasserre bound needs r >= 1".into()));
    }
    if n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    let target = make_target(m, quad_form::<Q>, quad_form::<f64>);
    let mut blocks = vec![GramBlock { label: "sigma_0".into(), multiplier: one(n), basis: reduced_basis(n, r / 2) }];
    let basis_i = reduced_basis(n, (r - 1) / 2);
    for i in 0..n {
        blocks.push(GramBlock {
            label: format!("sigma_{}", i + 1),
            multiplier: Polynomial::var(n, i),
            basis: basis_i.clone(),
        });
    }
    let gen = Polynomial::<Q>::simplex_sum(n).sub_ref(&one(n));
    let mut free_scalars: Vec<FreeScalar> = Monomial::all_up_to_degree(n, r)
        .into_iter()
        .map(|beta| FreeScalar { label: format!("q_{}", fmt_exp(&beta)), multiplier: gen.mul_monomial(&beta) })
        .collect();
    free_scalars.push(FreeScalar { label: "lambda".into(), multiplier: one(n) });
    let lam = free_scalars.len() - 1;
    Ok(SosProblem { nvars: n, target, reduction: Reduction::None, blocks, free_scalars, maximize: Some(lam) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::horn;

    #[test]
    fn k_levels_have_expected_gram_sizes() {
        let h = horn();
        let p0 = formulate(&h, ConeId::k(0)).unwrap();
        assert_eq!(p0.blocks.len(), 1);
        assert_eq!(p0.blocks[0].dim(), 15);
        let p1 = formulate(&h, ConeId::k(1)).unwrap();
        assert_eq!(p1.blocks[0].dim(), 35);
        assert!(p1.target.float.is_homogeneous_of(6));
        assert!(p1.target.exact.is_some());
    }

    #[test]
    fn las_simplex_shapes() {
        let h = horn();
        let p3 = formulate(&h, ConeId::las_simplex(3).unwrap()).unwrap();
        assert_eq!(p3.blocks.len(), 5);
        assert!(p3.blocks.iter().all(|b| b.dim() == 5));
        let p2 = formulate(&h, ConeId::las_simplex(2).unwrap()).unwrap();
        assert_eq!(p2.blocks[0].dim(), 5);
        assert_eq!(p2.blocks.len(), 6);
        assert!(p2.blocks[1..].iter().all(|b| b.dim() == 1));
        let p4 = formulate(&h, ConeId::las_simplex(4).unwrap()).unwrap();
        assert_eq!(p4.blocks[0].dim(), 15);
        assert!(p4.blocks[1..].iter().all(|b| b.dim() == 5));
    }

    #[test]
    fn preordering_uses_parity_subsets() {
        let h = horn();
        let p = formulate(&h, ConeId::las_preordering(4).unwrap()).unwrap();
        // |S| in {0, 2, 4}: 1 + 10 + 5
        assert_eq!(p.blocks.len(), 16);
        assert_eq!(p.blocks[0].dim(), 15);
        assert_eq!(p.blocks.last().unwrap().dim(), 1);
        let p3 = formulate(&h, ConeId::las_preordering(3).unwrap()).unwrap();
        assert_eq!(p3.blocks.len(), 5 + 10);
    }

    #[test]
    fn sphere_and_q_shapes() {
        let h = horn();
        let s = formulate(&h, ConeId::las_sphere(4).unwrap()).unwrap();
        assert_eq!(s.reduction, Reduction::Sphere);
        assert_eq!(s.blocks[0].dim(), 21);
        let q1 = formulate(&h, ConeId::q(1)).unwrap();
        assert_eq!(q1.blocks.iter().filter(|b| b.dim() == 5).count(), 5);
        assert_eq!(q1.blocks.iter().filter(|b| b.dim() == 1).count(), 35);
    }

    #[test]
    fn bound_has_free_multipliers() {
        let p = formulate_bound(&SymMatrix::identity(2), 2).unwrap();
        // {1, x1}
        assert_eq!(p.blocks[0].dim(), 2);
        assert_eq!(p.blocks[1].dim(), 1);
        assert_eq!(p.free_scalars.len(), 6 + 1);
        assert_eq!(p.maximize, Some(6));
        assert!(formulate_bound(&SymMatrix::identity(2), 0).is_err());
    }

    #[test]
    fn subsets_enumerates_combinations() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert!(subsets(2, 3).is_empty());
    }
}
