use crate::error::{Error, Result};
use crate::scalar::Real;

/// SplitMix64 generator.
///
/// Pinned so that a `(seed, parameters)` pair reproduces the same schedule in
/// any implementation: the state advances by `0x9E3779B97F4A7C15` and each
/// output is mixed with the multipliers `0xBF58476D1CE4E5B9` and
/// `0x94D049BB133111EB` (shifts 30, 27, 31).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub const fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `lo..=hi` as `lo + next_u64() mod (hi − lo + 1)`.
    pub fn next_in_range(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        match (hi - lo).checked_add(1) {
            Some(span) => lo + self.next_u64() % span,
            None => self.next_u64(),
        }
    }

    /// Uniform float in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Sampling instants `0 = t_0 < t_1 < …`, the last one at or beyond the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSchedule<T> {
    instants: Vec<T>,
    gaps: Vec<T>,
    t_low: T,
    t_high: T,
    grid_h: Option<T>,
    seed: Option<u64>,
}

fn grid_multiple<T: Real>(value: T, grid_h: T, what: &str) -> Result<u64> {
    let ratio = (value / grid_h).round();
    let count = ratio
        .to_u64()
        .filter(|&c| c >= 1)
        .ok_or_else(|| Error::InvalidSchedule(format!("{what} = {value} is not a positive multiple of grid_h = {grid_h}")))?;
    if (ratio * grid_h - value).abs() > T::tol(1e-12, 8.0) {
        return Err(Error::InvalidSchedule(format!(
            "grid_h = {grid_h} does not divide {what} = {value}"
        )));
    }
    Ok(count)
}

impl<T: Real> SamplingSchedule<T> {
    /// Aperiodic schedule with gaps `l_s · grid_h`, `l_s` uniform on
    /// `{T_low/grid_h, …, T_high/grid_h}` drawn from [`SplitMix64`] seeded with `seed`.
    pub fn generate(t_low: T, t_high: T, grid_h: T, horizon: T, seed: u64) -> Result<Self> {
        if !(grid_h > T::zero()) || !grid_h.is_finite() {
            return Err(Error::InvalidSchedule(format!("grid_h must be positive, got {grid_h}")));
        }
        if !(t_low > T::zero()) || !(t_low <= t_high) || !t_high.is_finite() {
            return Err(Error::InvalidSchedule(format!(
                "need 0 < T_low <= T_high, got T_low = {t_low}, T_high = {t_high}"
            )));
        }
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(Error::InvalidSchedule(format!("horizon must be positive, got {horizon}")));
        }
        let lo = grid_multiple(t_low, grid_h, "T_low")?;
        let hi = grid_multiple(t_high, grid_h, "T_high")?;
        let mut rng = SplitMix64::new(seed);
        let count = |c: u64| T::from_u64(c).expect("tick count representable");
        let mut ticks = 0u64;
        let mut instants = vec![T::zero()];
        let mut gaps = Vec::new();
        while *instants.last().expect("non-empty") < horizon {
            let l = rng.next_in_range(lo, hi);
            ticks += l;
            gaps.push(count(l) * grid_h);
            instants.push(count(ticks) * grid_h);
        }
        Ok(Self {
            instants,
            gaps,
            t_low,
            t_high,
            grid_h: Some(grid_h),
            seed: Some(seed),
        })
    }

    /// Periodic schedule `t_s = s·T` covering `horizon`.
    pub fn periodic(period: T, horizon: T) -> Result<Self> {
        if !(period > T::zero()) || !(horizon > T::zero()) {
            return Err(Error::InvalidSchedule("period and horizon must be positive".into()));
        }
        let count = (horizon / period).ceil().to_usize().unwrap_or(0);
        let instants = (0..=count).map(|s| T::from_count(s) * period).collect();
        Ok(Self {
            instants,
            gaps: vec![period; count],
            t_low: period,
            t_high: period,
            grid_h: Some(period),
            seed: None,
        })
    }

    /// Schedule from explicit instants; the first must be 0 and gaps positive.
    pub fn from_instants(instants: Vec<T>) -> Result<Self> {
        if instants.len() < 2 || instants[0] != T::zero() {
            return Err(Error::InvalidSchedule("need at least two instants starting at 0".into()));
        }
        let mut t_low = T::infinity();
        let mut t_high = T::zero();
        let mut gaps = Vec::with_capacity(instants.len() - 1);
        for w in instants.windows(2) {
            let gap = w[1] - w[0];
            gaps.push(gap);
            if !(gap > T::zero()) || !gap.is_finite() {
                return Err(Error::InvalidSchedule(format!(
                    "instants must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
            t_low = t_low.min(gap);
            t_high = t_high.max(gap);
        }
        Ok(Self {
            instants,
            gaps,
            t_low,
            t_high,
            grid_h: None,
            seed: None,
        })
    }

    pub fn instants(&self) -> &[T] {
        &self.instants
    }

    pub fn t_low(&self) -> T {
        self.t_low
    }

    pub fn t_high(&self) -> T {
        self.t_high
    }

    pub fn grid_h(&self) -> Option<T> {
        self.grid_h
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Gaps `T_s = t_{s+1} − t_s`; for generated schedules exactly `l_s·grid_h`.
    pub fn gaps(&self) -> impl Iterator<Item = T> + '_ {
        self.gaps.iter().copied()
    }
}

/// Shorthand for [`SamplingSchedule::generate`].
pub fn gen_schedule<T: Real>(t_low: T, t_high: T, grid_h: T, horizon: T, seed: u64) -> Result<SamplingSchedule<T>> {
    SamplingSchedule::generate(t_low, t_high, grid_h, horizon, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // first outputs for seed 0 from the reference SplitMix64
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(r.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn degenerate_range_is_periodic() {
        let s = gen_schedule(0.5, 0.5, 0.25, 3.0, 9).unwrap();
        for (i, t) in s.instants().iter().enumerate() {
            assert_eq!(*t, 0.25 * (2 * i) as f64);
        }
        assert_eq!(*s.instants().last().unwrap(), 3.0);
    }

    #[test]
    fn example_gaps_within_bounds() {
        let s = gen_schedule(0.001f64, 0.018, 0.001, 30.0, 1).unwrap();
        assert!(*s.instants().last().unwrap() >= 30.0);
        for g in s.gaps() {
            assert!((0.001 - 1e-12..=0.018 + 1e-12).contains(&g), "{g}");
        }
        // every gap length is used eventually
        let mut hist = [0usize; 19];
        for g in s.gaps() {
            hist[(g / 0.001).round() as usize] += 1;
        }
        assert!(hist[1..].iter().all(|&c| c > 0));
    }

    #[test]
    fn determinism() {
        let a = gen_schedule(0.001, 0.016, 0.001, 5.0, 77).unwrap();
        let b = gen_schedule(0.001, 0.016, 0.001, 5.0, 77).unwrap();
        assert_eq!(a, b);
        let c = gen_schedule(0.001, 0.016, 0.001, 5.0, 78).unwrap();
        assert_ne!(a.instants(), c.instants());
    }

    #[test]
    fn invalid_parameters() {
        assert!(gen_schedule(0.02, 0.01, 0.001, 1.0, 0).is_err());
        assert!(gen_schedule(0.0015, 0.01, 0.001, 1.0, 0).is_err());
        assert!(gen_schedule(0.001, 0.01, 0.001, 0.0, 0).is_err());
        assert!(gen_schedule(0.001, 0.01, -0.001, 1.0, 0).is_err());
        assert!(SamplingSchedule::from_instants(vec![0.0, 0.5, 0.5]).is_err());
        assert!(SamplingSchedule::from_instants(vec![0.1, 0.5]).is_err());
    }
}
