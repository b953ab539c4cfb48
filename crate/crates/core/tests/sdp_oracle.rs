mod common;

use common::{admm_oracle, DenseSdp};
use coposhier::sdp::{solve, SdpOptions, SdpStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn interior_point_matches_first_order_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..20 {
        let n = rng.gen_range(2..=6);
        let m = rng.gen_range(1..=n * (n + 1) / 2 - 1);
        let p = DenseSdp::random(&mut rng, n, m);
        let s = solve(&p.to_problem(), &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal, "problem {k}");
        let oracle = admm_oracle(&p, 1e-12, 200_000).expect("oracle converges");
        let err = (s.primal_obj - oracle).abs() / (1.0 + oracle.abs());
        assert!(err <= 1e-8, "problem {k}: ipm {} oracle {oracle}", s.primal_obj);
    }
}

#[test]
fn scaling_b_and_c_scales_the_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let p = DenseSdp::random(&mut rng, 4, 5);
        let mut q = p.clone();
        q.b.iter_mut().for_each(|v| *v *= 1e3);
        q.c *= 1e3;
        let a = solve(&p.to_problem(), &SdpOptions::default()).unwrap();
        let b = solve(&q.to_problem(), &SdpOptions::default()).unwrap();
        let expected = a.primal_obj * 1e6;
        assert!((b.primal_obj - expected).abs() <= 1e-6 * expected.abs().max(1.0), "{} vs {expected}", b.primal_obj);
    }
}
