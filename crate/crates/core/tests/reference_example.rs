//! The four-follower example: published P, K, T̄ and qualitative decay.

use sdcons::graph::{GroundedLaplacian, Network, SwitchingSignal, Topology};
use sdcons::numerics::{solve_care, sym_eig_extremes, DenseMatrix};
use sdcons::sim::{gen_schedule, lyapunov_trace, simulate, InitialState, SystemModel};
use sdcons::synthesis::{find_common_d, synthesize};

fn a() -> DenseMatrix<f64> {
    DenseMatrix::from_rows(&[[-0.38, 0.72], [-0.68, 0.42]]).unwrap()
}

fn b() -> DenseMatrix<f64> {
    DenseMatrix::from_rows(&[[0.26], [0.31]]).unwrap()
}

fn h1() -> GroundedLaplacian<f64> {
    Topology::new(4, [(0, 1), (0, 2), (3, 2), (1, 3), (4, 3), (2, 4)])
        .unwrap()
        .grounded_laplacian()
}

fn h2() -> GroundedLaplacian<f64> {
    Topology::new(4, [(0, 1), (0, 2), (1, 3), (2, 4), (3, 4)])
        .unwrap()
        .grounded_laplacian()
}

fn init() -> InitialState<f64> {
    InitialState {
        leader: vec![1.2, -0.8],
        followers: vec![vec![2.4, -1.6], vec![-1.4, 2.6], vec![1.8, -2.5], vec![-0.2, 1.3]],
    }
}

fn within(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol
}

#[test]
fn laplacians_match_printed_matrices() {
    let want1 = [[1., 0., 0., 0.], [0., 2., -1., 0.], [-1., 0., 2., -1.], [0., -1., 0., 1.]];
    let want2 = [[1., 0., 0., 0.], [0., 1., 0., 0.], [-1., 0., 1., 0.], [0., -1., -1., 2.]];
    assert_eq!(h1().matrix(), &DenseMatrix::from_rows(&want1).unwrap());
    assert_eq!(h2().matrix(), &DenseMatrix::from_rows(&want2).unwrap());
}

#[test]
fn riccati_solution() {
    let sol = solve_care(&a(), &b(), 1.0, 1.0).unwrap();
    let want = [[7.2138, -3.6897], [-3.6897, 6.3388]];
    for i in 0..2 {
        for j in 0..2 {
            assert!(within(sol.p[(i, j)], want[i][j], 5e-4), "P[{i}][{j}] = {}", sol.p[(i, j)]);
        }
    }
    assert!(sol.residual_norm <= 1e-9);
}

#[test]
fn identity_scaling_is_admissible() {
    for h in [h1(), h2()] {
        let m = h.matrix();
        let s = sym_eig_extremes(&(m + &m.transpose())).unwrap();
        assert!(s.lambda_min > 0.0);
    }
    assert_eq!(find_common_d(&[h1(), h2()]).unwrap(), vec![1.0; 4]);
}

#[test]
fn static_bound_and_gain() {
    let r = synthesize(&a(), &b(), 1.0, 1.0, &[1.0; 4], &[h1()]).unwrap();
    assert!(within(r.t_bar(), 0.0186, 5e-4), "T_bar = {}", r.t_bar());
    assert!(within(r.k[(0, 0)], 0.8874, 5e-4) && within(r.k[(0, 1)], 1.2195, 5e-4), "{:?}", r.k);
    assert!(within(r.ladder.lambda_1, 0.824672, 1e-6));
}

#[test]
fn switching_bound_and_gain() {
    let r = synthesize(&a(), &b(), 1.0, 1.0, &[1.0; 4], &[h1(), h2()]).unwrap();
    assert!(within(r.t_bar(), 0.0167, 5e-4), "T_bar = {}", r.t_bar());
    assert!(within(r.k[(0, 0)], 0.9483, 5e-4) && within(r.k[(0, 1)], 1.3033, 5e-4), "{:?}", r.k);
}

#[test]
fn static_run_decays_and_contracts() {
    let model = SystemModel::new(a(), b()).unwrap();
    let synth = synthesize(&a(), &b(), 1.0, 1.0, &[1.0; 4], &[h1()]).unwrap();
    let sched = gen_schedule(0.001, 0.018, 0.001, 30.0, 1).unwrap();
    let r = simulate(&model, &Network::fixed(h1()), &synth.k, &sched, &init(), 0.001, 30.0).unwrap();
    let rep = lyapunov_trace(&r, &synth, &sched).unwrap();
    assert_eq!(rep.interval_violations, 0);
    assert_eq!(rep.ratio_violations, 0);
    assert!(rep.samples_non_increasing());
    let first = r.error_norms(0).into_iter().fold(0.0, f64::max);
    let last = r.error_norms(r.times.len() - 1).into_iter().fold(0.0, f64::max);
    assert!(last < 0.05 * first, "{first} -> {last}");
}

#[test]
fn switching_run_contracts() {
    let model = SystemModel::new(a(), b()).unwrap();
    let synth = synthesize(&a(), &b(), 1.0, 1.0, &[1.0; 4], &[h1(), h2()]).unwrap();
    let signal = SwitchingSignal::periodic(1.0, vec![(1, 2.0 / 3.0), (2, 1.0 / 3.0)]).unwrap();
    let net = Network::new(vec![h1(), h2()], signal).unwrap();
    let sched = gen_schedule(0.001, 0.016, 0.001, 30.0, 2).unwrap();
    let r = simulate(&model, &net, &synth.k, &sched, &init(), 0.001, 30.0).unwrap();
    assert!(r.modes.contains(&1) && r.modes.contains(&2));
    let rep = lyapunov_trace(&r, &synth, &sched).unwrap();
    assert!(rep.passed(), "{} interval, {} ratio violations", rep.interval_violations, rep.ratio_violations);
}

