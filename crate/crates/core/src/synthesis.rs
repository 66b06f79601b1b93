//! Gain and sampling-bound synthesis.
//!
//! Given `(A, B)`, Riccati weights `μ₁, μ₂`, a positive diagonal scaling `D`
//! and one or more grounded Laplacians, [`synthesize`] produces the feedback
//! gain `K = α₁BᵀP` and the bound `T̄ = √(c₁/c₂)`: any aperiodic sampling with
//! every interval below `T̄` drives all tracking errors to zero, for a static
//! graph or for arbitrary switching among the given graphs.
//!
//! The chain of constants is
//!
//! ```text
//! d_m = min dᵢ          λ_m = λmin(D⊗P)      λ₁ = min_p λmin(DH_p + H_pᵀD)
//! d_M = max dᵢ          λ_M = λmax(D⊗P)      α₁ = μ₁ d_M / λ₁
//! α₂ = max_p 2α₁ ‖DH_p‖ ‖PBBᵀP‖             α₃ = α₂² / (2 d_m μ₂)
//! α₄ = max_p (‖A‖ + α₁‖H_p ⊗ BBᵀP‖)² / λ_m
//! c₁ = d_m μ₂ / (2λ_M)  c₂ = α₃ α₄
//! ```
//!
//! [`worst_case_params`] evaluates the same chain with per-graph scalings and
//! min/max aggregation over every leader-reachable digraph on `N + 1` nodes,
//! yielding a graph-independent gain and bound.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::graph::{GroundedLaplacian, Topology};
use crate::numerics::{kron, solve_care, spectral_norm, sym_eig_extremes, DenseMatrix};
use crate::scalar::Real;
use crate::sim::SamplingSchedule;

/// Largest follower count accepted by [`worst_case_params`].
pub const ENUMERATION_CAP: usize = 3;

const COMMON_D_ASCENT_ITERATIONS: usize = 500;

/// Scalar constants of the synthesis chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ladder<T> {
    pub d_min: T,
    pub d_max: T,
    /// `λmin(D⊗P)`.
    pub lambda_lo: T,
    /// `λmax(D⊗P)`.
    pub lambda_hi: T,
    /// `min_p λmin(DH_p + H_pᵀD)`.
    pub lambda_1: T,
    pub alpha1: T,
    pub alpha2: T,
    pub alpha3: T,
    pub alpha4: T,
    pub c1: T,
    pub c2: T,
    /// `√(c₁/c₂)`.
    pub t_bar: T,
}

/// Gain, scaling and sampling bound for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult<T> {
    pub p: DenseMatrix<T>,
    pub care_residual: T,
    pub d: Vec<T>,
    pub k: DenseMatrix<T>,
    pub ladder: Ladder<T>,
    pub mu1: T,
    pub mu2: T,
}

impl<T: Real> SynthesisResult<T> {
    pub fn t_bar(&self) -> T {
        self.ladder.t_bar
    }

    pub fn d_matrix(&self) -> DenseMatrix<T> {
        DenseMatrix::from_diagonal(&self.d)
    }

    /// `D ⊗ P`, the weight of the Lyapunov function `V(x̄) = x̄ᵀ(D⊗P)x̄`.
    pub fn lyapunov_weight(&self) -> DenseMatrix<T> {
        kron(&self.d_matrix(), &self.p)
    }
}

/// Graph-independent gain and bound over all admissible topologies.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseResult<T> {
    pub p: DenseMatrix<T>,
    pub k: DenseMatrix<T>,
    pub ladder: Ladder<T>,
    /// Leader-reachable digraphs on `N + 1` nodes, counting every edge subset.
    pub topology_count: usize,
    /// Distinct grounded Laplacians among them (edges into the leader do not change `H`).
    pub laplacians: Vec<GroundedLaplacian<T>>,
    /// Per-Laplacian scalings, aligned with `laplacians`.
    pub scalings: Vec<Vec<T>>,
    pub mu1: T,
    pub mu2: T,
}

/// Parameters of the per-sample contraction `W(t_{s+1}) ≤ ρ W(t_s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionParams<T> {
    pub beta1: T,
    pub beta2: T,
    pub h: T,
    /// `(1 − β₂/β₁)e^{−β₁h} + β₂/β₁`.
    pub rho: T,
}

fn min_eig_of_scaled<T: Real>(d: &[T], h: &DenseMatrix<T>) -> Result<T> {
    let dm = DenseMatrix::from_diagonal(d);
    let dh = &dm * h;
    Ok(sym_eig_extremes(&(&dh + &dh.transpose()).symmetrized())?.lambda_min)
}

/// `λmin(DH + HᵀD)` for a diagonal `D` given by its entries.
pub fn scaled_margin<T: Real>(d: &[T], h: &GroundedLaplacian<T>) -> Result<T> {
    if d.len() != h.followers() {
        return Err(Error::DimensionMismatch(format!(
            "scaling has {} entries, H is {}x{}",
            d.len(),
            h.followers(),
            h.followers()
        )));
    }
    min_eig_of_scaled(d, h.matrix())
}

/// Positive diagonal `D` with `DH + HᵀD ≻ 0` for a nonsingular M-matrix `H`.
///
/// With `w = H⁻¹1` and `z = H⁻ᵀ1` (both positive), `dᵢ = zᵢ/wᵢ`, rescaled so
/// that `max dᵢ = 1`.
pub fn construct_d<T: Real>(h: &GroundedLaplacian<T>) -> Result<Vec<T>> {
    if !h.is_nonsingular_m() {
        return Err(Error::NotMMatrix);
    }
    let n = h.followers();
    let ones = vec![T::one(); n];
    let lu = h.matrix().lu()?;
    let w = lu.solve_vec(&ones);
    let z = h.matrix().transpose().lu()?.solve_vec(&ones);
    let mut d: Vec<T> = z.iter().zip(&w).map(|(&zi, &wi)| zi / wi).collect();
    let top = d.iter().copied().fold(T::zero(), T::max);
    if !(top > T::zero()) || d.iter().any(|x| !(*x > T::zero()) || !x.is_finite()) {
        return Err(Error::DConstructionFailure { lambda_min: f64::NAN });
    }
    for x in &mut d {
        *x = *x / top;
    }
    let margin = scaled_margin(&d, h)?;
    if !(margin > T::zero()) {
        return Err(Error::DConstructionFailure {
            lambda_min: margin.as_f64(),
        });
    }
    Ok(d)
}

/// Normalized worst-case margin `min_p λmin(DH_p + H_pᵀD) / max dᵢ`.
fn common_score<T: Real>(d: &[T], hs: &[GroundedLaplacian<T>]) -> Result<T> {
    let top = d.iter().copied().fold(T::zero(), T::max);
    let mut worst = T::infinity();
    for h in hs {
        worst = worst.min(scaled_margin(d, h)?);
    }
    Ok(worst / top)
}

/// Searches for one diagonal `D` with `DH_p + H_pᵀD ≻ 0` for every `p`.
///
/// Candidates in order: the identity, each per-graph [`construct_d`], their
/// elementwise geometric mean, then projected ascent on `log dᵢ`. The search
/// is incomplete: [`Error::CommonDNotFound`] does not prove that no common
/// scaling exists.
pub fn find_common_d<T: Real>(hs: &[GroundedLaplacian<T>]) -> Result<Vec<T>> {
    let n = hs
        .first()
        .ok_or_else(|| Error::InvalidTopology("no Laplacians given".into()))?
        .followers();
    if hs.iter().any(|h| h.followers() != n) {
        return Err(Error::DimensionMismatch("Laplacians disagree on size".into()));
    }
    if hs.iter().any(|h| !h.is_nonsingular_m()) {
        return Err(Error::NotMMatrix);
    }

    let mut search = CommonSearch {
        hs,
        best_score: T::neg_infinity(),
        best: vec![T::one(); n],
    };
    if let Some(d) = search.consider(vec![T::one(); n])? {
        return Ok(d);
    }
    let per_graph: Vec<Vec<T>> = hs.iter().map(construct_d).collect::<Result<_>>()?;
    for d in &per_graph {
        if let Some(d) = search.consider(d.clone())? {
            return Ok(d);
        }
    }
    let count = T::from_count(per_graph.len());
    let mean: Vec<T> = (0..n)
        .map(|i| (per_graph.iter().map(|d| d[i].ln()).sum::<T>() / count).exp())
        .collect();
    if let Some(d) = search.consider(normalize_max(mean))? {
        return Ok(d);
    }
    if let Some(d) = search.ascend()? {
        return Ok(d);
    }
    Err(Error::CommonDNotFound {
        best: search.best_score.as_f64(),
    })
}

struct CommonSearch<'a, T> {
    hs: &'a [GroundedLaplacian<T>],
    best_score: T,
    best: Vec<T>,
}

impl<T: Real> CommonSearch<'_, T> {
    fn consider(&mut self, d: Vec<T>) -> Result<Option<Vec<T>>> {
        let score = common_score(&d, self.hs)?;
        if score > T::zero() {
            return Ok(Some(d));
        }
        if score > self.best_score {
            self.best_score = score;
            self.best = d;
        }
        Ok(None)
    }

    /// Finite-difference ascent on `log d` with backtracking, projected onto
    /// `max log dᵢ = 0`, starting from the best candidate so far.
    fn ascend(&mut self) -> Result<Option<Vec<T>>> {
        let n = self.best.len();
        let to_d = |x: &[T]| -> Vec<T> {
            let top = x.iter().copied().fold(T::neg_infinity(), T::max);
            x.iter().map(|&v| (v - top).exp()).collect()
        };
        let mut x: Vec<T> = self.best.iter().map(|v| v.ln()).collect();
        let mut fx = common_score(&to_d(&x), self.hs)?;
        let fd_step = T::lit(1e-6);
        let mut step = T::lit(0.5);
        for _ in 0..COMMON_D_ASCENT_ITERATIONS {
            let mut grad = vec![T::zero(); n];
            for i in 0..n {
                let mut probe = x.clone();
                probe[i] = probe[i] + fd_step;
                grad[i] = (common_score(&to_d(&probe), self.hs)? - fx) / fd_step;
            }
            let gnorm = grad.iter().map(|g| *g * *g).sum::<T>().sqrt();
            if !(gnorm > T::zero()) {
                break;
            }
            let trial: Vec<T> = x.iter().zip(&grad).map(|(&xi, &gi)| xi + step * gi / gnorm).collect();
            let ft = common_score(&to_d(&trial), self.hs)?;
            if ft > fx {
                x = trial;
                fx = ft;
                step = (step * T::lit(1.5)).min(T::lit(2.0));
                if let Some(d) = self.consider(to_d(&x))? {
                    return Ok(Some(d));
                }
            } else {
                step = step * T::lit(0.5);
                if step < T::lit(1e-10) {
                    break;
                }
            }
        }
        Ok(None)
    }
}

fn normalize_max<T: Real>(mut d: Vec<T>) -> Vec<T> {
    let top = d.iter().copied().fold(T::zero(), T::max);
    for x in &mut d {
        *x = *x / top;
    }
    d
}

fn check_scaling<T: Real>(d: &[T], n: usize) -> Result<()> {
    if d.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "scaling has {} entries for {n} followers",
            d.len()
        )));
    }
    if d.iter().any(|x| !(*x > T::zero()) || !x.is_finite()) {
        return Err(Error::InvalidMatrix("diagonal scaling must be positive and finite".into()));
    }
    Ok(())
}

/// Evaluates the constant chain over `(Dⱼ, Hⱼ)` pairs with min/max aggregation.
/// A single shared `D` reduces this to the per-network definitions.
fn evaluate_ladder<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    p: &DenseMatrix<T>,
    pairs: &[(&[T], &GroundedLaplacian<T>)],
    mu1: T,
    mu2: T,
) -> Result<(Ladder<T>, DenseMatrix<T>)> {
    let bbt_p = &(b * &b.transpose()) * p;
    let pbbt_p_norm = spectral_norm(&(p * &bbt_p));
    let a_norm = spectral_norm(a);

    let mut d_min = T::infinity();
    let mut d_max = T::neg_infinity();
    let mut lambda_lo = T::infinity();
    let mut lambda_hi = T::neg_infinity();
    let mut lambda_1 = T::infinity();
    for (idx, &(d, h)) in pairs.iter().enumerate() {
        for &x in d {
            d_min = d_min.min(x);
            d_max = d_max.max(x);
        }
        let dp = sym_eig_extremes(&kron(&DenseMatrix::from_diagonal(d), p).symmetrized())?;
        lambda_lo = lambda_lo.min(dp.lambda_min);
        lambda_hi = lambda_hi.max(dp.lambda_max);
        let margin = scaled_margin(d, h)?;
        if !(margin > T::zero()) {
            return Err(Error::InvalidScaling {
                topology: idx + 1,
                lambda_min: margin.as_f64(),
            });
        }
        lambda_1 = lambda_1.min(margin);
    }
    let two = T::lit(2.0);
    let alpha1 = mu1 * d_max / lambda_1;
    let mut alpha2 = T::neg_infinity();
    let mut alpha4 = T::neg_infinity();
    for &(d, h) in pairs {
        let dh = &DenseMatrix::from_diagonal(d) * h.matrix();
        alpha2 = alpha2.max(two * alpha1 * spectral_norm(&dh) * pbbt_p_norm);
        let reach = a_norm + alpha1 * spectral_norm(&kron(h.matrix(), &bbt_p));
        alpha4 = alpha4.max(reach * reach / lambda_lo);
    }
    let alpha3 = alpha2 * alpha2 / (two * d_min * mu2);
    let c1 = d_min * mu2 / (two * lambda_hi);
    let c2 = alpha3 * alpha4;
    let ladder = Ladder {
        d_min,
        d_max,
        lambda_lo,
        lambda_hi,
        lambda_1,
        alpha1,
        alpha2,
        alpha3,
        alpha4,
        c1,
        c2,
        t_bar: (c1 / c2).sqrt(),
    };
    let k = (&b.transpose() * p).scale(alpha1);
    Ok((ladder, k))
}

/// Gain `K` and sampling bound `T̄` for a static graph (one Laplacian) or a
/// switching network (several Laplacians sharing the scaling `D`).
pub fn synthesize<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    mu1: T,
    mu2: T,
    d: &[T],
    hs: &[GroundedLaplacian<T>],
) -> Result<SynthesisResult<T>> {
    let first = hs
        .first()
        .ok_or_else(|| Error::InvalidTopology("no Laplacians given".into()))?;
    check_scaling(d, first.followers())?;
    if hs.iter().any(|h| h.followers() != first.followers()) {
        return Err(Error::DimensionMismatch("Laplacians disagree on size".into()));
    }
    let care = solve_care(a, b, mu1, mu2)?;
    let pairs: Vec<(&[T], &GroundedLaplacian<T>)> = hs.iter().map(|h| (d, h)).collect();
    let (ladder, k) = evaluate_ladder(a, b, &care.p, &pairs, mu1, mu2)?;
    Ok(SynthesisResult {
        p: care.p,
        care_residual: care.residual_norm,
        d: d.to_vec(),
        k,
        ladder,
        mu1,
        mu2,
    })
}

/// All leader-reachable digraphs on `N + 1` nodes (every subset of the
/// `N(N+1)` ordered pairs, edges into the leader included).
pub fn enumerate_reachable(followers: usize) -> Result<Vec<Topology>> {
    if followers == 0 || followers > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge {
            n: followers,
            cap: ENUMERATION_CAP,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..=followers)
        .flat_map(|j| (0..=followers).filter(move |&i| i != j).map(move |i| (j, i)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << pairs.len()) {
        let edges = pairs
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask & (1 << bit) != 0)
            .map(|(_, &e)| e);
        let t = Topology::new(followers, edges)?;
        if t.leader_reachable() {
            out.push(t);
        }
    }
    Ok(out)
}

/// Graph-independent gain and bound valid for every leader-reachable topology
/// on `N + 1` nodes. Each distinct `H` gets its own [`construct_d`] scaling and
/// the constants are aggregated with min/max over the whole family.
pub fn worst_case_params<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    mu1: T,
    mu2: T,
    followers: usize,
) -> Result<WorstCaseResult<T>> {
    let topologies = enumerate_reachable(followers)?;
    let mut seen = HashSet::new();
    let mut laplacians = Vec::new();
    for t in &topologies {
        let h: GroundedLaplacian<T> = t.grounded_laplacian();
        let key: Vec<i64> = h.matrix().as_slice().iter().map(|x| x.as_f64() as i64).collect();
        if seen.insert(key) {
            laplacians.push(h);
        }
    }
    let scalings: Vec<Vec<T>> = laplacians.iter().map(construct_d).collect::<Result<_>>()?;
    let care = solve_care(a, b, mu1, mu2)?;
    let pairs: Vec<(&[T], &GroundedLaplacian<T>)> =
        scalings.iter().map(Vec::as_slice).zip(laplacians.iter()).collect();
    let (ladder, k) = evaluate_ladder(a, b, &care.p, &pairs, mu1, mu2)?;
    Ok(WorstCaseResult {
        p: care.p,
        k,
        ladder,
        topology_count: topologies.len(),
        laplacians,
        scalings,
        mu1,
        mu2,
    })
}

/// Contraction factor for `Ẇ ≤ −β₁W + β₂W(t_s)` with sampling gaps at least `h`.
pub fn contraction_factor<T: Real>(beta1: T, beta2: T, h: T) -> Result<ContractionParams<T>> {
    let infeasible = || Error::ContractionInfeasible {
        beta1: beta1.as_f64(),
        beta2: beta2.as_f64(),
        h: h.as_f64(),
    };
    if !(beta2 > T::zero() && beta2 < beta1 && h > T::zero()) || !(beta1 * h).is_finite() {
        return Err(infeasible());
    }
    let ratio = beta2 / beta1;
    // 1 − (1 − β₂/β₁)(1 − e^{−β₁h}), written to stay below 1 for small β₁h
    let decay = -(-beta1 * h).exp_m1();
    let rho = T::one() - (T::one() - ratio) * decay;
    Ok(ContractionParams { beta1, beta2, h, rho })
}

/// Outcome of [`verify_comparison_lemma`].
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck<T> {
    /// `W(t_{s+1}) / W(t_s)` from the closed-form solution; empty once `W` hits zero.
    pub ratios: Vec<T>,
    /// Per-interval factors `ρ_s`.
    pub rho_s: Vec<T>,
    /// Uniform factor for the smallest gap of the schedule.
    pub rho: T,
    pub passed: bool,
}

/// Propagates the extremal system `Ẇ = −β₁W + β₂W(t_s)` across every interval
/// of `schedule` and checks `W(t_{s+1}) ≤ ρ_s W(t_s)` and `ρ_s ≤ ρ`.
pub fn verify_comparison_lemma<T: Real>(
    beta1: T,
    beta2: T,
    schedule: &SamplingSchedule<T>,
    w0: T,
) -> Result<LemmaCheck<T>> {
    let instants = schedule.instants();
    let h = instants
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(T::infinity(), T::min);
    let uniform = contraction_factor(beta1, beta2, h)?;
    let slack = T::one() + T::tol(1e-12, 8.0);
    let ratio_q = beta2 / beta1;
    let mut w = w0;
    let mut ratios = Vec::new();
    let mut rho_s = Vec::new();
    let mut passed = true;
    for gap in instants.windows(2).map(|p| p[1] - p[0]) {
        let e = (-beta1 * gap).exp();
        let rs = (T::one() - ratio_q) * e + ratio_q;
        rho_s.push(rs);
        if w == T::zero() {
            continue;
        }
        // W(t) = e^{−β₁(t−t_s)}W(t_s) + (β₂/β₁)(1 − e^{−β₁(t−t_s)})W(t_s)
        let next = e * w + ratio_q * (T::one() - e) * w;
        let r = next / w;
        passed &= r <= rs * slack && rs <= uniform.rho * slack;
        ratios.push(r);
        w = next;
    }
    Ok(LemmaCheck {
        ratios,
        rho_s,
        rho: uniform.rho,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(rows).unwrap()
    }

    fn lap(rows: &[&[f64]]) -> GroundedLaplacian<f64> {
        GroundedLaplacian::from_matrix(m(rows)).unwrap()
    }

    fn h_static() -> GroundedLaplacian<f64> {
        lap(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 2.0, -1.0, 0.0],
            &[-1.0, 0.0, 2.0, -1.0],
            &[0.0, -1.0, 0.0, 1.0],
        ])
    }

    #[test]
    fn scalar_chain_by_hand() {
        let one = m(&[&[1.0]]);
        let r = synthesize(&m(&[&[0.0]]), &one, 1.0, 1.0, &[1.0], &[lap(&[&[1.0]])]).unwrap();
        let l = r.ladder;
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        assert!(close(r.p[(0, 0)], 1.0));
        assert!(close(l.lambda_1, 2.0));
        assert!(close(l.alpha1, 0.5));
        assert!(close(r.k[(0, 0)], 0.5));
        assert!(close(l.alpha2, 1.0));
        assert!(close(l.alpha3, 0.5));
        assert!(close(l.alpha4, 0.25));
        assert!(close(l.c1, 0.5));
        assert!(close(l.c2, 0.125));
        assert!(close(l.t_bar, 2.0));
    }

    #[test]
    fn construct_d_trivial_and_symmetric() {
        assert_eq!(construct_d(&lap(&[&[1.0]])).unwrap(), vec![1.0]);
        let sym = lap(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        let d = construct_d(&sym).unwrap();
        assert!(d.iter().all(|&x| (x - 1.0).abs() < 1e-14));
        assert!(scaled_margin(&[1.0, 1.0], &sym).unwrap() > 0.0);
    }

    #[test]
    fn construct_d_on_static_example() {
        let h = h_static();
        let d = construct_d(&h).unwrap();
        assert!(d.iter().all(|&x| x > 0.0 && x <= 1.0));
        assert!(d.contains(&1.0));
        assert!(scaled_margin(&d, &h).unwrap() > 0.0);
    }

    #[test]
    fn construct_d_rejects_singular() {
        assert_eq!(construct_d(&lap(&[&[0.0]])).unwrap_err(), Error::NotMMatrix);
    }

    #[test]
    fn common_d_cases() {
        assert_eq!(find_common_d(&[lap(&[&[1.0]]), lap(&[&[2.0]])]).unwrap(), vec![1.0]);
        let d = find_common_d(&[h_static()]).unwrap();
        assert!(scaled_margin(&d, &h_static()).unwrap() > 0.0);
    }

    #[test]
    fn common_d_needs_scaling() {
        // directed chain with heavy coupling: identity fails, the per-graph scaling works
        let h = lap(&[&[1.0, 0.0], &[-3.0, 1.0]]);
        assert!(scaled_margin(&[1.0, 1.0], &h).unwrap() < 0.0);
        let d = find_common_d(std::slice::from_ref(&h)).unwrap();
        assert!(scaled_margin(&d, &h).unwrap() > 0.0);
    }

    #[test]
    fn common_d_ascent_path() {
        // feasible ratios d₁/d₂ lie in (9/4, 4/1.44); identity, both per-graph
        // scalings and their geometric mean all fall outside that window
        let h1 = lap(&[&[1.0, 0.0], &[-3.0, 1.0]]);
        let h2 = lap(&[&[1.0, -1.2], &[0.0, 1.0]]);
        for d in [vec![1.0, 1.0], construct_d(&h1).unwrap(), construct_d(&h2).unwrap()] {
            assert!(common_score(&d, &[h1.clone(), h2.clone()]).unwrap() <= 0.0);
        }
        let d = find_common_d(&[h1.clone(), h2.clone()]).unwrap();
        let ratio = d[0] / d[1];
        assert!(ratio > 2.25 && ratio < 4.0 / 1.44, "{ratio}");
        assert!(scaled_margin(&d, &h1).unwrap() > 0.0);
        assert!(scaled_margin(&d, &h2).unwrap() > 0.0);
    }

    #[test]
    fn common_d_not_found() {
        // H1 needs d₁/d₂ > 9/4, H2 needs d₁/d₂ < 4/9
        let h1 = lap(&[&[1.0, 0.0], &[-3.0, 1.0]]);
        let h2 = lap(&[&[1.0, -3.0], &[0.0, 1.0]]);
        assert!(matches!(
            find_common_d(&[h1, h2]),
            Err(Error::CommonDNotFound { .. })
        ));
    }

    #[test]
    fn synthesize_rejects_bad_scaling() {
        let a = m(&[&[0.0]]);
        let b = m(&[&[1.0]]);
        let h = lap(&[&[1.0, 0.0], &[-3.0, 1.0]]);
        assert!(matches!(
            synthesize(&a, &b, 1.0, 1.0, &[1.0, 1.0], std::slice::from_ref(&h)),
            Err(Error::InvalidScaling { topology: 1, .. })
        ));
        assert!(synthesize(&a, &b, 1.0, 1.0, &[1.0, -1.0], std::slice::from_ref(&h)).is_err());
        assert!(synthesize(&a, &b, 1.0, 1.0, &[1.0], &[h]).is_err());
    }

    #[test]
    fn contraction_examples() {
        let c = contraction_factor(1.0, 0.5, 2f64.ln()).unwrap();
        assert!((c.rho - 0.75).abs() < 1e-15);
        let c = contraction_factor(2.0, 1e-15, 0.3).unwrap();
        assert!((c.rho - (-0.6f64).exp()).abs() < 1e-14);
        for h in [1e-3, 1e-6, 1e-9] {
            assert!(contraction_factor(1.0, 0.5, h).unwrap().rho < 1.0);
        }
        assert!(matches!(
            contraction_factor(1.0, 1.0, 0.1),
            Err(Error::ContractionInfeasible { .. })
        ));
        assert!(contraction_factor(1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn lemma_equality_case_and_zero() {
        let s = SamplingSchedule::from_instants((0..20).map(f64::from).collect()).unwrap();
        let chk = verify_comparison_lemma(1.0, 0.5, &s, 3.0).unwrap();
        assert!(chk.passed);
        let want = 0.5 * (-1f64).exp() + 0.5;
        assert!(chk.ratios.iter().all(|r| ((r - want) / want).abs() < 1e-14));
        let zero = verify_comparison_lemma(1.0, 0.5, &s, 0.0).unwrap();
        assert!(zero.passed && zero.ratios.is_empty());
        assert!(verify_comparison_lemma(1.0, 2.0, &s, 1.0).is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_reachable(1).unwrap().len(), 2);
        assert!(matches!(
            enumerate_reachable(4),
            Err(Error::EnumerationTooLarge { n: 4, cap: 3 })
        ));
    }

    #[test]
    fn worst_case_single_follower() {
        let a = m(&[&[-0.38, 0.72], &[-0.68, 0.42]]);
        let b = m(&[&[0.26], &[0.31]]);
        let wc = worst_case_params(&a, &b, 1.0, 1.0, 1).unwrap();
        assert_eq!(wc.laplacians.len(), 1);
        let st = synthesize(&a, &b, 1.0, 1.0, &[1.0], &[lap(&[&[1.0]])]).unwrap();
        assert_eq!(wc.ladder, st.ladder);
        assert_eq!(wc.k, st.k);
    }
}
