use super::{SamplingSchedule, SimulationResult};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::synthesis::{contraction_factor, ContractionParams, SynthesisResult};

/// Runtime check of the Lyapunov function `V(x̄) = x̄ᵀ(D⊗P)x̄` along a simulated trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport<T> {
    /// `V` at every output time.
    pub v: Vec<T>,
    /// `V(x̄(t_s))` for every sampling instant in the trace.
    pub v_samples: Vec<T>,
    /// Intervals where some `V(t)` exceeded `V(t_s)(1 + 1e-9)`.
    pub interval_violations: usize,
    /// Largest `V(t)/V(t_s) − 1` over all intervals (negative when `V` only decreased).
    pub worst_slack: T,
    /// `V(t_{s+1})/V(t_s)`; `None` where `V(t_s) = 0`.
    pub ratios: Vec<Option<T>>,
    /// Ratios above `bound`.
    pub ratio_violations: usize,
    /// Largest observed ratio.
    pub worst_ratio: T,
    /// Factor the ratios are compared with.
    pub bound: T,
    /// Contraction parameters behind `bound`; `None` when `β₂ ≥ β₁` and the bound degenerates to 1.
    pub params: Option<ContractionParams<T>>,
}

impl<T: Real> ContractionReport<T> {
    pub fn passed(&self) -> bool {
        self.interval_violations == 0 && self.ratio_violations == 0
    }

    /// True when `V(t_s)` never increases from one sample to the next.
    pub fn samples_non_increasing(&self) -> bool {
        self.v_samples.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Evaluates `V` at every output time and checks the interval-max and
/// per-sample contraction properties.
///
/// The contraction bound uses `β₁ = c₁`, `β₂ = c₂T²` and `h = T_low`, where `T`
/// is the schedule's largest gap capped at `T̄`. At `T = T̄` exactly the two
/// rates coincide and the bound is 1.
pub fn lyapunov_trace<T: Real>(
    result: &SimulationResult<T>,
    synth: &SynthesisResult<T>,
    schedule: &SamplingSchedule<T>,
) -> Result<ContractionReport<T>> {
    let weight = synth.lyapunov_weight();
    if weight.rows() != result.followers * result.state_dim {
        return Err(Error::DimensionMismatch(format!(
            "Lyapunov weight is {}x{}, trajectory has {} error coordinates",
            weight.rows(),
            weight.cols(),
            result.followers * result.state_dim
        )));
    }
    for (&t, &i) in result.sample_times.iter().zip(&result.sample_indices) {
        if result.times.get(i) != Some(&t) {
            return Err(Error::IncompleteTrace { t: t.as_f64() });
        }
    }
    for &t in schedule.instants() {
        let last = *result.times.last().unwrap_or(&T::zero());
        if t <= last && result.times.binary_search_by(|p| p.partial_cmp(&t).expect("finite times")).is_err() {
            return Err(Error::IncompleteTrace { t: t.as_f64() });
        }
    }

    let v: Vec<T> = result.errors.iter().map(|e| weight.quadratic_form(e)).collect();
    let v_samples: Vec<T> = result.sample_indices.iter().map(|&i| v[i]).collect();

    let (c1, c2) = (synth.ladder.c1, synth.ladder.c2);
    let t_ref = schedule.t_high().min(synth.t_bar());
    let params = contraction_factor(c1, c2 * t_ref * t_ref, schedule.t_low()).ok();
    let bound = params.as_ref().map_or(T::one(), |p| p.rho);

    let slack = T::lit(1e-9);
    let mut interval_violations = 0;
    let mut worst_slack = T::neg_infinity();
    for (s, &start) in result.sample_indices.iter().enumerate() {
        let stop = result.sample_indices.get(s + 1).copied().unwrap_or(v.len());
        let vs = v[start];
        let peak = v[start..stop].iter().copied().fold(T::neg_infinity(), T::max);
        if vs == T::zero() {
            if peak > T::zero() {
                interval_violations += 1;
            }
            continue;
        }
        worst_slack = worst_slack.max(peak / vs - T::one());
        if peak > vs * (T::one() + slack) {
            interval_violations += 1;
        }
    }

    let ratios: Vec<Option<T>> = v_samples
        .windows(2)
        .map(|w| (w[0] != T::zero()).then(|| w[1] / w[0]))
        .collect();
    let worst_ratio = ratios.iter().flatten().copied().fold(T::neg_infinity(), T::max);
    let ratio_violations = ratios.iter().flatten().filter(|&&r| r > bound).count();

    Ok(ContractionReport {
        v,
        v_samples,
        interval_violations,
        worst_slack,
        ratios,
        ratio_violations,
        worst_ratio,
        bound,
        params,
    })
}
