//! Graph and synthesis invariants.

use proptest::prelude::*;
use sdcons::graph::{is_nonsingular_m, GroundedLaplacian, SwitchingSignal, Topology};
use sdcons::numerics::{sym_eig_extremes, DenseMatrix};
use sdcons::sim::{SamplingSchedule, SplitMix64};
use sdcons::synthesis::{
    construct_d, contraction_factor, enumerate_reachable, synthesize, verify_comparison_lemma, worst_case_params,
};
use sdcons::Error;

fn example_a() -> DenseMatrix<f64> {
    DenseMatrix::from_rows(&[[-0.38, 0.72], [-0.68, 0.42]]).unwrap()
}

fn example_b() -> DenseMatrix<f64> {
    DenseMatrix::from_rows(&[[0.26], [0.31]]).unwrap()
}

fn topology() -> impl Strategy<Value = Topology> {
    (1..=6usize).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..=n).flat_map(|j| (1..=n).map(move |i| (j, i))).filter(|(j, i)| j != i).collect();
        prop::sample::subsequence(pairs.clone(), 0..=pairs.len()).prop_map(move |e| Topology::new(n, e).unwrap())
    })
}

fn scaled_margin(d: &[f64], h: &GroundedLaplacian<f64>) -> f64 {
    let dm = DenseMatrix::from_diagonal(d);
    let dh = &dm * h.matrix();
    sym_eig_extremes(&(&dh + &dh.transpose())).unwrap().lambda_min
}

/// Reachability by transitive closure of the adjacency relation.
fn reachable_by_closure(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut r = vec![vec![false; n + 1]; n + 1];
    for &(j, i) in edges {
        r[j][i] = true;
    }
    for k in 0..=n {
        for a in 0..=n {
            for b in 0..=n {
                if r[a][k] && r[k][b] {
                    r[a][b] = true;
                }
            }
        }
    }
    (1..=n).all(|i| r[0][i])
}

proptest! {
    #[test]
    fn m_matrix_iff_reachable(t in topology()) {
        let h = t.grounded_laplacian::<f64>();
        prop_assert_eq!(is_nonsingular_m(&h), t.leader_reachable());
        prop_assert_eq!(t.leader_reachable(), t.unreachable_follower().is_none());
    }

    #[test]
    fn construct_d_certifies_reachable(t in topology()) {
        prop_assume!(t.leader_reachable());
        let h = t.grounded_laplacian::<f64>();
        let d = construct_d(&h).unwrap();
        prop_assert!(d.iter().all(|&x| x > 0.0 && x <= 1.0));
        prop_assert_eq!(d.iter().copied().fold(0.0, f64::max), 1.0);
        prop_assert!(scaled_margin(&d, &h) > 0.0);
    }

    #[test]
    fn construct_d_rejects_unreachable(t in topology()) {
        prop_assume!(!t.leader_reachable());
        prop_assert!(construct_d(&t.grounded_laplacian::<f64>()).is_err());
    }

    #[test]
    fn topology_text_round_trip(t in topology()) {
        prop_assert_eq!(Topology::parse(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn bound_and_gain_invariant_under_d_scaling(c in 0.1..10.0f64) {
        let h = Topology::new(4, [(0, 1), (0, 2), (3, 2), (1, 3), (4, 3), (2, 4)]).unwrap().grounded_laplacian();
        let d = construct_d(&h).unwrap();
        let scaled: Vec<f64> = d.iter().map(|x| x * c).collect();
        let r1 = synthesize(&example_a(), &example_b(), 1.0, 1.0, &d, std::slice::from_ref(&h)).unwrap();
        let r2 = synthesize(&example_a(), &example_b(), 1.0, 1.0, &scaled, &[h]).unwrap();
        prop_assert!((r1.t_bar() - r2.t_bar()).abs() <= 1e-10 * r1.t_bar());
        prop_assert!((&r1.k - &r2.k).max_abs() <= 1e-10 * r1.k.max_abs());
    }

    #[test]
    fn contraction_factor_monotone(beta1 in 0.1..10.0f64, q in 0.01..0.98f64, h in 0.001..2.0f64, dh in 0.001..1.0f64, dq in 0.001..0.01f64) {
        let beta2 = q * beta1;
        let base = contraction_factor(beta1, beta2, h).unwrap();
        prop_assert!(base.rho > 0.0 && base.rho < 1.0);
        prop_assert!(contraction_factor(beta1, beta2, h + dh).unwrap().rho < base.rho);
        prop_assert!(contraction_factor(beta1, beta2 + dq * beta1, h).unwrap().rho > base.rho);
    }

    #[test]
    fn periodic_signal_text_round_trip(d1 in 1u32..50, d2 in 1u32..50) {
        let (a, b) = (d1 as f64 / 8.0, d2 as f64 / 8.0);
        let s = SwitchingSignal::periodic(a + b, vec![(1, a), (2, b)]).unwrap();
        prop_assert_eq!(SwitchingSignal::parse(&s.to_text()).unwrap(), s);
    }
}

#[test]
fn construct_d_on_thousand_random_topologies() {
    let mut rng = SplitMix64::new(2024);
    let mut checked = 0;
    while checked < 1000 {
        let n = 1 + (rng.next_u64() % 6) as usize;
        let density = rng.next_f64();
        let mut edges = Vec::new();
        for j in 0..=n {
            for i in 1..=n {
                if i != j && rng.next_f64() < density {
                    edges.push((j, i));
                }
            }
        }
        let t = Topology::new(n, edges).unwrap();
        if !t.leader_reachable() {
            continue;
        }
        let h = t.grounded_laplacian::<f64>();
        let d = construct_d(&h).unwrap();
        assert!(scaled_margin(&d, &h) > 0.0, "{}", t.to_text());
        checked += 1;
    }
}

#[test]
fn lemma_ratios_equal_closed_form() {
    let mut rng = SplitMix64::new(7);
    for _ in 0..100 {
        let beta1 = 0.01 + 10.0 * rng.next_f64();
        let beta2 = beta1 * (0.001 + 0.998 * rng.next_f64());
        let period = 0.001 + 2.0 * rng.next_f64();
        let sched = SamplingSchedule::periodic(period, 40.0 * period).unwrap();
        let check = verify_comparison_lemma(beta1, beta2, &sched, 1.0).unwrap();
        assert!(check.passed);
        let q = beta2 / beta1;
        let want = (1.0 - q) * (-beta1 * period).exp() + q;
        assert!(!check.ratios.is_empty());
        for r in check.ratios {
            assert!((r - want).abs() <= 1e-12 * want, "{r} vs {want}");
        }
    }
}

#[test]
fn lemma_rejects_infeasible_rates() {
    let sched = SamplingSchedule::periodic(0.1, 1.0).unwrap();
    assert!(matches!(
        verify_comparison_lemma(1.0, 1.0, &sched, 1.0),
        Err(Error::ContractionInfeasible { .. })
    ));
}

#[test]
fn enumeration_count_matches_brute_force() {
    for n in 1..=3usize {
        let pairs: Vec<(usize, usize)> = (0..=n).flat_map(|j| (0..=n).map(move |i| (j, i))).filter(|(j, i)| j != i).collect();
        let brute = (0u32..1 << pairs.len())
            .filter(|mask| {
                let edges: Vec<_> = pairs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &e)| e).collect();
                reachable_by_closure(n, &edges)
            })
            .count();
        let got = enumerate_reachable(n).unwrap().len();
        assert_eq!(got, brute, "N = {n}");
    }
    assert!(matches!(enumerate_reachable(4), Err(Error::EnumerationTooLarge { .. })));
}

#[test]
fn single_follower_worst_case_is_static() {
    let w = worst_case_params(&example_a(), &example_b(), 1.0, 1.0, 1).unwrap();
    let h = GroundedLaplacian::from_matrix(DenseMatrix::from_rows(&[[1.0]]).unwrap()).unwrap();
    let s = synthesize(&example_a(), &example_b(), 1.0, 1.0, &[1.0], &[h]).unwrap();
    assert_eq!(w.laplacians.len(), 1);
    assert!((w.ladder.t_bar - s.t_bar()).abs() <= 1e-12 * s.t_bar());
    assert!((&w.k - &s.k).max_abs() <= 1e-12);
}
