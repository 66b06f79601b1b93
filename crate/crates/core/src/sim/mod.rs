//! Exact sampled-data simulation and runtime Lyapunov monitoring.
//!
//! Between two sampling instants the closed loop in error coordinates
//! `x̄ᵢ = xᵢ − x₀` is
//!
//! ```text
//! x̄̇(t) = (I⊗A) x̄(t) − (H_p⊗BK) x̄(t_s),     t ∈ [t_s, t_{s+1})
//! ```
//!
//! which is linear time-invariant with a held input, so it is advanced with
//! the exponential of the augmented generator `[[I⊗A, −(H_p⊗BK)], [0, 0]]`
//! rather than a generic ODE stepper. Propagators are cached per
//! `(mode, elapsed ticks)`.

mod csv;
mod monitor;
mod schedule;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::numerics::{expm, kron, DenseMatrix};
use crate::scalar::Real;

pub use csv::{write_samples_csv, write_trajectory_csv};
pub use monitor::{lyapunov_trace, ContractionReport};
pub use schedule::{gen_schedule, SamplingSchedule, SplitMix64};

/// Follower/leader dynamics `ẋ = Ax + Bu`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel<T> {
    pub a: DenseMatrix<T>,
    pub b: DenseMatrix<T>,
}

impl<T: Real> SystemModel<T> {
    pub fn new(a: DenseMatrix<T>, b: DenseMatrix<T>) -> Result<Self> {
        if !a.is_square() || b.rows() != a.rows() || b.cols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{}, B is {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            )));
        }
        Ok(Self { a, b })
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.cols()
    }
}

/// Dense trajectory produced by [`simulate`].
///
/// `times` holds every multiple of the output step up to the horizon plus
/// every sampling instant, sorted. Per-time vectors are flattened follower by
/// follower (`N·n` entries).
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult<T> {
    pub state_dim: usize,
    pub followers: usize,
    pub times: Vec<T>,
    pub leader: Vec<Vec<T>>,
    pub states: Vec<Vec<T>>,
    pub errors: Vec<Vec<T>>,
    /// Sampling instants `t_s ≤ horizon`.
    pub sample_times: Vec<T>,
    /// Index of each sampling instant in `times`.
    pub sample_indices: Vec<usize>,
    /// Active mode on `[t_s, t_{s+1})`, 1-based.
    pub modes: Vec<usize>,
    /// Held inputs on `[t_s, t_{s+1})`, `N·m` entries.
    pub inputs: Vec<Vec<T>>,
}

impl<T: Real> SimulationResult<T> {
    /// `‖x̄ᵢ(t)‖` for every follower at output index `k`.
    pub fn error_norms(&self, k: usize) -> Vec<T> {
        self.errors[k]
            .chunks(self.state_dim)
            .map(|e| e.iter().map(|&v| v * v).sum::<T>().sqrt())
            .collect()
    }

    /// Largest absolute error entry at output index `k`.
    pub fn max_error_entry(&self, k: usize) -> T {
        self.errors[k].iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Output index whose time is closest to `t`.
    pub fn index_near(&self, t: T) -> usize {
        let pos = self.times.partition_point(|&s| s < t);
        match pos {
            0 => 0,
            p if p == self.times.len() => p - 1,
            p if (self.times[p] - t).abs() < (t - self.times[p - 1]).abs() => p,
            p => p - 1,
        }
    }
}

fn tick_count<T: Real>(value: T, tick: T, what: &str) -> Result<u64> {
    let ratio = (value / tick).round();
    let n = ratio
        .to_u64()
        .ok_or_else(|| Error::InvalidSchedule(format!("{what} = {value} out of range")))?;
    if (ratio * tick - value).abs() > T::tol(1e-9, 64.0) * T::one().max(value.abs()) {
        return Err(Error::InvalidSchedule(format!(
            "{what} = {value} is not a multiple of the simulation tick {tick}"
        )));
    }
    Ok(n)
}

/// `x₀(t) = e^{At} x₀(0)` at each time.
pub fn leader_trajectory<T: Real>(a: &DenseMatrix<T>, x0: &[T], times: &[T]) -> Result<Vec<Vec<T>>> {
    if x0.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "leader state has {} entries, A is {}x{}",
            x0.len(),
            a.rows(),
            a.cols()
        )));
    }
    times.iter().map(|&t| Ok(expm(a, t)?.matvec(x0))).collect()
}

/// Initial leader and follower states.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState<T> {
    pub leader: Vec<T>,
    pub followers: Vec<Vec<T>>,
}

/// Exact zero-order-hold simulation of the leader-following closed loop on `[0, horizon]`.
///
/// The input of follower `i` is held at `uᵢ = K Σⱼ āᵢⱼ(xⱼ(t_s) − xᵢ(t_s))` with the
/// graph active at `t_s`. The schedule's instants and the output step must lie
/// on a common grid (the smaller of `output_dt` and the schedule grid).
pub fn simulate<T: Real>(
    model: &SystemModel<T>,
    network: &Network<T>,
    k: &DenseMatrix<T>,
    schedule: &SamplingSchedule<T>,
    init: &InitialState<T>,
    output_dt: T,
    horizon: T,
) -> Result<SimulationResult<T>> {
    let n = model.state_dim();
    let m = model.input_dim();
    let nf = network.followers();
    if k.shape() != (m, n) {
        return Err(Error::DimensionMismatch(format!(
            "K is {}x{}, expected {m}x{n}",
            k.rows(),
            k.cols()
        )));
    }
    if init.leader.len() != n || init.followers.len() != nf || init.followers.iter().any(|x| x.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "initial state must be one leader and {nf} followers of dimension {n}"
        )));
    }
    if !(output_dt > T::zero()) || !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(Error::InvalidSchedule("output_dt and horizon must be positive".into()));
    }
    let instants = schedule.instants();
    if *instants.last().expect("schedule is non-empty") < horizon {
        return Err(Error::InvalidSchedule(format!(
            "schedule ends at {} before the horizon {horizon}",
            instants.last().expect("schedule is non-empty")
        )));
    }

    let tick = schedule.grid_h().map_or(output_dt, |g| g.min(output_dt));
    let out_every = tick_count(output_dt, tick, "output_dt")?.max(1);
    let end = tick_count(horizon, tick, "horizon")
        .unwrap_or_else(|_| (horizon / tick).floor().to_u64().unwrap_or(0));
    let sample_ticks = instants
        .iter()
        .map(|&t| tick_count(t, tick, "sampling instant"))
        .collect::<Result<Vec<_>>>()?;

    let bk = model.b.matmul(k);
    let a_big = kron(&DenseMatrix::identity(nf), &model.a);
    let at = |ticks: u64| T::from_u64(ticks).expect("tick count representable") * tick;

    let mut cache: HashMap<(usize, u64), DenseMatrix<T>> = HashMap::new();
    let mut err: Vec<T> = init
        .followers
        .iter()
        .flat_map(|x| x.iter().zip(&init.leader).map(|(&xi, &x0)| xi - x0))
        .collect();

    let mut out = SimulationResult {
        state_dim: n,
        followers: nf,
        times: Vec::new(),
        leader: Vec::new(),
        states: Vec::new(),
        errors: Vec::new(),
        sample_times: Vec::new(),
        sample_indices: Vec::new(),
        modes: Vec::new(),
        inputs: Vec::new(),
    };

    let record = |out: &mut SimulationResult<T>, t: T, e: &[T]| -> Result<()> {
        let x0 = expm(&model.a, t)?.matvec(&init.leader);
        let states = e.chunks(n).flat_map(|ei| ei.iter().zip(&x0).map(|(&a, &b)| a + b)).collect();
        out.times.push(t);
        out.leader.push(x0);
        out.states.push(states);
        out.errors.push(e.to_vec());
        Ok(())
    };

    for (s, &ts) in sample_ticks.iter().enumerate() {
        if ts > end {
            break;
        }
        let t_s = instants[s];
        let (mode, h) = network.active(t_s)?;
        out.sample_times.push(t_s);
        out.sample_indices.push(out.times.len());
        out.modes.push(mode);
        let ku = kron(h.matrix(), k);
        out.inputs.push(ku.matvec(&err).into_iter().map(|v| -v).collect());
        record(&mut out, t_s, &err)?;

        let next = sample_ticks.get(s + 1).copied().unwrap_or(u64::MAX).min(end.saturating_add(1));
        let held = std::mem::take(&mut err);
        let coupling = kron(h.matrix(), &bk);
        let stop = next.min(end);
        let mut targets: Vec<u64> = ((ts / out_every + 1) * out_every..=stop)
            .step_by(out_every as usize)
            .collect();
        if targets.last() != Some(&stop) && stop > ts {
            targets.push(stop);
        }
        for tau in targets {
            let key = (mode, tau - ts);
            if !cache.contains_key(&key) {
                cache.insert(key, propagator(&a_big, &coupling, at(tau - ts))?);
            }
            let e = cache[&key].matvec(&held);
            if tau == next {
                err = e;
            } else {
                record(&mut out, at(tau), &e)?;
            }
        }
        if next > end {
            break;
        }
    }
    // the initial row shows the given states rather than x̄ + x₀ re-rounded
    if let Some(first) = out.states.first_mut() {
        *first = init.followers.concat();
    }
    Ok(out)
}

/// `G(δ) = E₁₁ + E₁₂` where `E = exp([[A_N, −C], [0, 0]] δ)` maps the held
/// state `x̄(t_s)` to `x̄(t_s + δ)`.
fn propagator<T: Real>(a_big: &DenseMatrix<T>, coupling: &DenseMatrix<T>, delta: T) -> Result<DenseMatrix<T>> {
    let d = a_big.rows();
    let mut gen = DenseMatrix::zeros(2 * d, 2 * d);
    gen.set_block(0, 0, a_big);
    gen.set_block(0, d, &-coupling);
    let e = expm(&gen, delta)?;
    Ok(&e.block(0, 0, d, d) + &e.block(0, d, d, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GroundedLaplacian;

    fn scalar_net() -> Network<f64> {
        Network::fixed(GroundedLaplacian::from_matrix(DenseMatrix::from_rows(&[[1.0]]).unwrap()).unwrap())
    }

    fn scalar_model() -> SystemModel<f64> {
        SystemModel::new(
            DenseMatrix::from_rows(&[[0.0]]).unwrap(),
            DenseMatrix::from_rows(&[[1.0]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn integrator_with_hold_is_geometric() {
        // ẋ̄ = −k x̄(t_s) with period h gives x̄(t_{s+1}) = (1 − kh) x̄(t_s)
        let k = DenseMatrix::from_rows(&[[0.5]]).unwrap();
        let sched = SamplingSchedule::periodic(0.5, 4.0).unwrap();
        let init = InitialState {
            leader: vec![2.0],
            followers: vec![vec![3.0]],
        };
        let r = simulate(&scalar_model(), &scalar_net(), &k, &sched, &init, 0.25, 4.0).unwrap();
        assert_eq!(r.sample_times.len(), 9);
        for (s, &i) in r.sample_indices.iter().enumerate() {
            let want = 0.75f64.powi(s as i32);
            assert!((r.errors[i][0] - want).abs() < 1e-14, "s = {s}");
            assert_eq!(r.leader[i][0], 2.0);
        }
        // mid-interval the error is linear in time
        let i = r.index_near(0.25);
        assert!((r.errors[i][0] - 0.875).abs() < 1e-14);
        assert_eq!(*r.times.last().unwrap(), 4.0);
    }

    #[test]
    fn output_times_include_samples() {
        let k = DenseMatrix::from_rows(&[[0.5]]).unwrap();
        let sched = SamplingSchedule::generate(0.003, 0.007, 0.001, 0.1, 4).unwrap();
        let init = InitialState {
            leader: vec![0.0],
            followers: vec![vec![1.0]],
        };
        let r = simulate(&scalar_model(), &scalar_net(), &k, &sched, &init, 0.01, 0.1).unwrap();
        for (&t, &i) in r.sample_times.iter().zip(&r.sample_indices) {
            assert_eq!(r.times[i], t);
        }
        assert!(r.times.windows(2).all(|w| w[0] < w[1]));
        for j in 0..=10 {
            let t = j as f64 * 0.01;
            assert!((r.times[r.index_near(t)] - t).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn rejects_short_schedule() {
        let k = DenseMatrix::from_rows(&[[0.5]]).unwrap();
        let sched = SamplingSchedule::periodic(0.5, 1.0).unwrap();
        let init = InitialState {
            leader: vec![0.0],
            followers: vec![vec![1.0]],
        };
        let err = simulate(&scalar_model(), &scalar_net(), &k, &sched, &init, 0.5, 2.0);
        assert!(matches!(err, Err(Error::InvalidSchedule(_))));
    }
}
