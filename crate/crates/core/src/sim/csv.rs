use std::io::{self, Write};

use super::{SamplingSchedule, SimulationResult};
use crate::scalar::Real;

/// Trajectory table: `t, x0_1..x0_n, x{i}_{j}…, err_norm_1..err_norm_N, V`.
///
/// `v` is optional; without it the `V` column is omitted.
pub fn write_trajectory_csv<T: Real, W: Write>(result: &SimulationResult<T>, v: Option<&[T]>, mut w: W) -> io::Result<()> {
    let n = result.state_dim;
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|j| format!("x0_{j}")));
    for i in 1..=result.followers {
        header.extend((1..=n).map(|j| format!("x{i}_{j}")));
    }
    header.extend((1..=result.followers).map(|i| format!("err_norm_{i}")));
    if v.is_some() {
        header.push("V".into());
    }
    writeln!(w, "{}", header.join(","))?;
    for k in 0..result.times.len() {
        let mut row = vec![result.times[k].to_string()];
        row.extend(result.leader[k].iter().map(T::to_string));
        row.extend(result.states[k].iter().map(T::to_string));
        row.extend(result.error_norms(k).iter().map(T::to_string));
        if let Some(v) = v {
            row.push(v[k].to_string());
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Sampling sidecar: `s, t_s, T_s, mode`, one row per instant up to the horizon.
pub fn write_samples_csv<T: Real, W: Write>(
    result: &SimulationResult<T>,
    schedule: &SamplingSchedule<T>,
    mut w: W,
) -> io::Result<()> {
    writeln!(w, "s,t_s,T_s,mode")?;
    let mut gaps = schedule.gaps();
    for (s, (&t, &mode)) in result.sample_times.iter().zip(&result.modes).enumerate() {
        let gap = gaps.next().map(|g| g.to_string()).unwrap_or_default();
        writeln!(w, "{s},{t},{gap},{mode}")?;
    }
    Ok(())
}
