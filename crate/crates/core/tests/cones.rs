mod common;

use coposhier::matrices::{graph_matrix, horn, permute, scale, t_psi, DiagScaling, Graph, PsiParams, SymMatrix};
use coposhier::sos::{
    check_batch, check_membership, find_min_level, verify_certificate, ConeId, Family, MembershipOptions,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn horn_is_the_five_cycle_graph_matrix() {
    assert_eq!(graph_matrix(&Graph::cycle(5).unwrap()).unwrap(), horn());
}

#[test]
fn strongly_scaled_t_psi_needs_level_seven() {
    let psi = PsiParams::new([0.05, 0.6, 0.2, 0.7, 0.3]).unwrap();
    let d = DiagScaling::new(vec![3.0, 1.0, 0.25, 1.0, 2.0]).unwrap();
    let m = scale(&t_psi(&psi), &d).unwrap();
    let s = find_min_level(&m, Family::LasSimplex, 8, &MembershipOptions::default()).unwrap();
    assert_eq!(s.level, Some(7), "{:?}", s.per_level);
}

#[test]
fn certificates_verify_independently() {
    let opts = MembershipOptions::default();
    for (m, cone) in [
        (horn(), ConeId::k(1)),
        (SymMatrix::identity(3), ConeId::q(1)),
        (t_psi(&PsiParams::uniform_tenth()), ConeId::las_simplex(5).unwrap()),
    ] {
        let r = check_membership(&m, cone, &opts).unwrap();
        let c = r.certificate().unwrap_or_else(|| panic!("{cone}: {:?}", r.diagnostics));
        let (res, eig) = verify_certificate(c, &m).unwrap();
        assert!(res <= 1e-7 * m.max_abs().max(1.0), "{cone}: residual {res}");
        assert!(eig >= -1e-8 * m.max_abs().max(1.0), "{cone}: min eig {eig}");
    }
}

#[test]
fn batch_matches_sequential_queries() {
    let suite = common::matrix_suite(6, 3);
    let queries: Vec<(SymMatrix, ConeId)> =
        suite.iter().flat_map(|m| [(m.clone(), ConeId::k(0)), (m.clone(), ConeId::q(1))]).collect();
    let opts = MembershipOptions::default();
    let batch = check_batch(&queries, &opts);
    for ((m, c), b) in queries.iter().zip(batch) {
        let single = check_membership(m, *c, &opts).unwrap();
        assert_eq!(b.unwrap(), single);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn k0_verdict_is_permutation_invariant(seed in 0u64..1000, shift in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = coposhier::matrices::random_mixture(&mut rng, 4);
        let perm: Vec<usize> = (0..4).map(|i| (i + shift) % 4).collect();
        let opts = MembershipOptions::default();
        let a = check_membership(&m, ConeId::k(0), &opts).unwrap();
        let b = check_membership(&permute(&m, &perm).unwrap(), ConeId::k(0), &opts).unwrap();
        prop_assert_eq!(a.kind(), b.kind());
    }
}
