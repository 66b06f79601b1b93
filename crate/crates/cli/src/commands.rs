//! The four subcommands, as functions from parsed inputs to report text.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use sdcons::graph::{GroundedLaplacian, Network};
use sdcons::numerics::{uncontrollable_unstable_mode, NumericsConfig};
use sdcons::sim::{
    gen_schedule, lyapunov_trace, simulate, write_samples_csv, write_trajectory_csv, ContractionReport,
    InitialState, SamplingSchedule, SimulationResult, SystemModel,
};
use sdcons::synthesis::{find_common_d, synthesize, worst_case_params, Ladder, SynthesisResult};
use sdcons::Matrix;

use crate::error::{simulation_error, synthesis_error, CliError};
use crate::report::{g6, Report};
use crate::scenario::{Model, Scenario};

/// Laplacians of the scenario's graphs after checking the standing assumptions
/// on `(A, B)` and on leader reachability.
pub fn checked_laplacians(s: &Scenario) -> Result<Vec<GroundedLaplacian<f64>>, CliError> {
    let mode = uncontrollable_unstable_mode(&s.model.a, &s.model.b, &NumericsConfig::default())
        .map_err(synthesis_error)?;
    if let Some(z) = mode {
        return Err(CliError::Assumption(format!(
            "Assumption 1 violated: (A, B) is not stabilizable; mode {} {} {}i is uncontrollable",
            g6(z.re),
            if z.im < 0.0 { '-' } else { '+' },
            g6(z.im.abs())
        )));
    }
    for (p, t) in s.topologies.iter().enumerate() {
        if let Some(i) = t.unreachable_follower() {
            return Err(CliError::Assumption(format!(
                "Assumption 2 violated: follower {i} is not reachable from the leader in topology {}",
                p + 1
            )));
        }
    }
    Ok(laplacians(s))
}

fn laplacians(s: &Scenario) -> Vec<GroundedLaplacian<f64>> {
    s.topologies.iter().map(|t| t.grounded_laplacian()).collect()
}

pub fn synthesize_scenario(s: &Scenario) -> Result<SynthesisResult<f64>, CliError> {
    let hs = checked_laplacians(s)?;
    let d = match &s.d {
        Some(d) => d.clone(),
        None => find_common_d(&hs).map_err(synthesis_error)?,
    };
    synthesize(&s.model.a, &s.model.b, s.mu1, s.mu2, &d, &hs).map_err(synthesis_error)
}

fn ladder_lines(r: &mut Report, l: &Ladder<f64>) {
    r.num("d_m", l.d_min);
    r.num("d_M", l.d_max);
    r.num("lambda_m", l.lambda_lo);
    r.num("lambda_M", l.lambda_hi);
    r.num("lambda_1", l.lambda_1);
    r.num("alpha1", l.alpha1);
    r.num("alpha2", l.alpha2);
    r.num("alpha3", l.alpha3);
    r.num("alpha4", l.alpha4);
    r.num("c1", l.c1);
    r.num("c2", l.c2);
}

fn sampling_note(r: &mut Report, s: &Scenario, t_bar: f64) {
    if s.sampling.t_high > t_bar {
        r.line(format!(
            "warning: T_high = {} exceeds T_bar = {}; the convergence guarantee does not cover this schedule",
            g6(s.sampling.t_high),
            g6(t_bar)
        ));
    }
}

pub fn synthesis_report(s: &Scenario, synth: &SynthesisResult<f64>) -> String {
    let mut r = Report::default();
    r.line(format!(
        "network = {} ({} followers, {} topolog{})",
        if s.is_switching() { "switching" } else { "static" },
        s.topologies[0].followers(),
        s.topologies.len(),
        if s.topologies.len() == 1 { "y" } else { "ies" }
    ));
    r.num("mu1", synth.mu1);
    r.num("mu2", synth.mu2);
    r.mat("P", &synth.p);
    r.num("care_residual", synth.care_residual);
    r.vec("D", &synth.d);
    ladder_lines(&mut r, &synth.ladder);
    r.mat("K", &synth.k);
    r.num("T_bar", synth.t_bar());
    sampling_note(&mut r, s, synth.t_bar());
    r.text()
}

pub fn cmd_synthesize(s: &Scenario, out: Option<&Path>) -> Result<String, CliError> {
    let synth = synthesize_scenario(s)?;
    let text = synthesis_report(s, &synth);
    if let Some(dir) = out {
        write_text(dir, "synthesis.txt", &text)?;
    }
    Ok(text)
}

/// A finished simulation together with what produced it.
pub struct Run {
    pub synth: Option<SynthesisResult<f64>>,
    pub schedule: SamplingSchedule<f64>,
    pub result: SimulationResult<f64>,
    pub k: Matrix,
}

/// Simulates the scenario. Synthesis must succeed unless the scenario
/// supplies `K`, in which case it is attempted only for the Lyapunov weight.
pub fn run_scenario(s: &Scenario) -> Result<Run, CliError> {
    let synth = match s.k {
        Some(_) => synthesize_scenario(s).ok(),
        None => Some(synthesize_scenario(s)?),
    };
    let k = match (&s.k, &synth) {
        (Some(k), _) => k.clone(),
        (None, Some(r)) => r.k.clone(),
        (None, None) => unreachable!("synthesis result present when no gain is given"),
    };
    let sp = &s.sampling;
    let schedule =
        gen_schedule(sp.t_low, sp.t_high, sp.grid_h, sp.horizon, sp.seed).map_err(simulation_error)?;
    let network = match &s.signal {
        Some(sig) => Network::new(laplacians(s), sig.clone()).map_err(|e| CliError::Parse(e.to_string()))?,
        None => Network::fixed(laplacians(s).remove(0)),
    };
    let model = SystemModel::new(s.model.a.clone(), s.model.b.clone()).map_err(|e| CliError::Parse(e.to_string()))?;
    let init = InitialState {
        leader: s.x0.clone(),
        followers: s.followers.clone(),
    };
    let result =
        simulate(&model, &network, &k, &schedule, &init, s.output_dt, sp.horizon).map_err(simulation_error)?;
    Ok(Run {
        synth,
        schedule,
        result,
        k,
    })
}

/// `V` at every output time; identity weight when no synthesis is available.
pub fn lyapunov_values(run: &Run) -> Vec<f64> {
    let dim = run.result.followers * run.result.state_dim;
    let weight = run
        .synth
        .as_ref()
        .map_or_else(|| Matrix::identity(dim), SynthesisResult::lyapunov_weight);
    run.result.errors.iter().map(|e| weight.quadratic_form(e)).collect()
}

fn max_norm(r: &SimulationResult<f64>, k: usize) -> f64 {
    r.error_norms(k).into_iter().fold(0.0, f64::max)
}

fn run_summary(rep: &mut Report, s: &Scenario, run: &Run) {
    let r = &run.result;
    let last = r.times.len() - 1;
    let gaps: Vec<f64> = run.schedule.gaps().collect();
    rep.num("seed", s.sampling.seed as f64);
    rep.line(format!("samples = {}", r.sample_times.len()));
    rep.num("gap_min", gaps.iter().copied().fold(f64::INFINITY, f64::min));
    rep.num("gap_max", gaps.iter().copied().fold(0.0, f64::max));
    rep.mat("K", &run.k);
    match &run.synth {
        Some(synth) => {
            rep.num("T_bar", synth.t_bar());
            sampling_note(rep, s, synth.t_bar());
        }
        None => rep.line("T_bar = unavailable (synthesis failed; V uses the identity weight)"),
    }
    rep.num("final_time", r.times[last]);
    rep.vec("final_err_norm", &r.error_norms(last));
    rep.num("final_max_err", max_norm(r, last));
    let after = (0..r.times.len())
        .filter(|&k| r.times[k] >= s.burn_in)
        .map(|k| max_norm(r, k))
        .fold(0.0, f64::max);
    rep.num("burn_in", s.burn_in);
    rep.num("max_err_after_burn_in", after);
}

pub fn write_csvs(s: &Scenario, run: &Run, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    let v = lyapunov_values(run);
    let traj = dir.join(&s.trajectory_csv);
    let file = File::create(&traj).map_err(|e| CliError::io(traj.display(), e))?;
    write_trajectory_csv(&run.result, Some(&v), BufWriter::new(file)).map_err(|e| CliError::io(traj.display(), e))?;
    let side = dir.join(&s.samples_csv);
    let file = File::create(&side).map_err(|e| CliError::io(side.display(), e))?;
    write_samples_csv(&run.result, &run.schedule, BufWriter::new(file))
        .map_err(|e| CliError::io(side.display(), e))?;
    Ok(())
}

pub fn cmd_simulate(s: &Scenario, out: &Path) -> Result<String, CliError> {
    let run = run_scenario(s)?;
    write_csvs(s, &run, out)?;
    let mut rep = Report::default();
    run_summary(&mut rep, s, &run);
    rep.line(format!("trajectory_csv = {}", out.join(&s.trajectory_csv).display()));
    rep.line(format!("samples_csv = {}", out.join(&s.samples_csv).display()));
    Ok(rep.text())
}

/// `ρ` with `β₂ = c₂T̄²` exactly. Because `T̄² = c₁/c₂` the two rates coincide
/// and the expression evaluates to 1 up to rounding.
pub fn rho_at_bound(synth: &SynthesisResult<f64>, t_low: f64) -> f64 {
    let l = &synth.ladder;
    let q = l.c2 * l.t_bar * l.t_bar / l.c1;
    (1.0 - q) * (-l.c1 * t_low).exp() + q
}

pub fn contraction_lines(rep: &mut Report, synth: &SynthesisResult<f64>, trace: &ContractionReport<f64>, t_low: f64) {
    rep.line(format!("interval_violations = {}", trace.interval_violations));
    rep.num("worst_interval_slack", trace.worst_slack);
    rep.line(format!("ratio_violations = {}", trace.ratio_violations));
    rep.num("worst_ratio", trace.worst_ratio);
    rep.num("rho", trace.bound);
    match &trace.params {
        Some(p) => {
            rep.num("beta1", p.beta1);
            rep.num("beta2", p.beta2);
            rep.num("h", p.h);
        }
        None => rep.line("rho_note = beta2 >= beta1 for this schedule; ratios are compared with 1"),
    }
    rep.num("rho_at_T_bar", rho_at_bound(synth, t_low));
    rep.line(format!("v_samples_non_increasing = {}", trace.samples_non_increasing()));
}

fn worst_offender(trace: &ContractionReport<f64>, run: &Run) -> Option<String> {
    let (s, r) = trace
        .ratios
        .iter()
        .enumerate()
        .filter_map(|(s, r)| r.map(|r| (s, r)))
        .filter(|&(_, r)| r > trace.bound)
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    Some(format!(
        "worst_offender = sample {} at t = {}, ratio V(t_(s+1))/V(t_s) = {}",
        s,
        g6(run.result.sample_times[s]),
        g6(r)
    ))
}

pub fn cmd_verify(s: &Scenario, out: Option<&Path>) -> Result<String, CliError> {
    let run = run_scenario(s)?;
    let synth = match &run.synth {
        Some(r) => r.clone(),
        None => synthesize_scenario(s)?,
    };
    if let Some(dir) = out {
        write_csvs(s, &run, dir)?;
    }
    let trace = lyapunov_trace(&run.result, &synth, &run.schedule).map_err(simulation_error)?;
    let mut rep = Report::default();
    run_summary(&mut rep, s, &run);
    contraction_lines(&mut rep, &synth, &trace, run.schedule.t_low());
    if trace.passed() {
        rep.line("verify = pass");
        Ok(rep.text())
    } else {
        if let Some(w) = worst_offender(&trace, &run) {
            rep.line(w);
        }
        rep.line("verify = FAIL");
        Err(CliError::Violation(rep.text()))
    }
}

pub fn cmd_enumerate(model: &Model, n: usize, mu1: f64, mu2: f64, out: Option<&Path>) -> Result<String, CliError> {
    let w = worst_case_params(&model.a, &model.b, mu1, mu2, n).map_err(synthesis_error)?;
    let mut rep = Report::default();
    rep.line(format!("followers = {n}"));
    rep.line(format!("graphs = {}", w.topology_count));
    rep.line(format!("distinct_H = {}", w.laplacians.len()));
    rep.num("mu1", w.mu1);
    rep.num("mu2", w.mu2);
    rep.mat("P", &w.p);
    ladder_lines(&mut rep, &w.ladder);
    rep.mat("K", &w.k);
    rep.num("T_bar", w.ladder.t_bar);
    let text = rep.text();
    if let Some(dir) = out {
        write_text(dir, "enumerate.txt", &text)?;
    }
    Ok(text)
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::io(path.display(), e))
}
