//! Scenario-driven front end for `sdcons`.
//!
//! Exit codes: 0 success, 1 property violation, 2 assumption failure,
//! 3 malformed input, 4 I/O failure.

pub mod commands;
pub mod error;
pub mod report;
pub mod scenario;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::error::CliError;
use crate::scenario::{Model, Scenario};

#[derive(Debug, Parser)]
#[command(name = "sdcons", version, about = "Sampled-data leader-following consensus: synthesis, simulation, verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute P, D, K, the constant ladder and the sampling bound T_bar.
    Synthesize(RunArgs),
    /// Simulate the closed loop and write the trajectory and sampling CSVs.
    Simulate(RunArgs),
    /// Simulate and check the Lyapunov contraction properties (exit 1 on violation).
    Verify(RunArgs),
    /// Graph-independent gain and bound over every leader-reachable graph on N followers.
    Enumerate(EnumerateArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario file; repeat for a batch.
    #[arg(long = "scenario", required = true)]
    pub scenarios: Vec<PathBuf>,
    /// Output directory (per-scenario subdirectories in batch mode).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the scenario's schedule seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for batch mode.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    /// File with `A = …` and `B = …` lines (a scenario file also works).
    #[arg(long)]
    pub model: PathBuf,
    /// Number of followers (at most 3).
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub mu1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu2: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Outcome of one invocation: exit code plus what goes to stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn from_result(r: Result<String, CliError>) -> Self {
        match r {
            Ok(stdout) => Outcome {
                code: 0,
                stdout,
                stderr: String::new(),
            },
            // a violation still produces a full report on stdout
            Err(CliError::Violation(report)) => Outcome {
                code: 1,
                stdout: report,
                stderr: "error: monitored property violated\n".into(),
            },
            Err(e) => Outcome {
                code: e.exit_code(),
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            },
        }
    }
}

pub fn load_scenario(path: &Path, seed: Option<u64>) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    let mut s = Scenario::parse(&text).map_err(|e| match e {
        CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })?;
    if let Some(seed) = seed {
        s.sampling.seed = seed;
    }
    Ok(s)
}

#[derive(Clone, Copy)]
enum Kind {
    Synthesize,
    Simulate,
    Verify,
}

fn run_one(kind: Kind, path: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<String, CliError> {
    let s = load_scenario(path, seed)?;
    match kind {
        Kind::Synthesize => commands::cmd_synthesize(&s, out),
        Kind::Simulate => commands::cmd_simulate(&s, out.unwrap_or_else(|| Path::new("."))),
        Kind::Verify => commands::cmd_verify(&s, out),
    }
}

fn run_batch(kind: Kind, args: &RunArgs) -> Outcome {
    if let [single] = args.scenarios.as_slice() {
        return Outcome::from_result(run_one(kind, single, args.out.as_deref(), args.seed));
    }
    let base = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let job = |path: &PathBuf| {
        let stem = path.file_stem().map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned());
        let dir = base.join(stem);
        let out = matches!(kind, Kind::Simulate) || args.out.is_some();
        Outcome::from_result(run_one(kind, path, out.then_some(dir.as_path()), args.seed))
    };
    let results: Vec<Outcome> = match rayon::ThreadPoolBuilder::new().num_threads(args.jobs.max(1)).build() {
        Ok(pool) => pool.install(|| args.scenarios.par_iter().map(job).collect()),
        Err(e) => {
            return Outcome::from_result(Err(CliError::Io(format!("cannot start worker pool: {e}"))));
        }
    };
    let mut merged = Outcome {
        code: 0,
        stdout: String::new(),
        stderr: String::new(),
    };
    for (path, r) in args.scenarios.iter().zip(results) {
        merged.stdout.push_str(&format!("== {} ==\n{}", path.display(), r.stdout));
        if !r.stderr.is_empty() {
            merged.stderr.push_str(&format!("{}: {}", path.display(), r.stderr));
        }
        merged.code = merged.code.max(r.code);
    }
    merged
}

pub fn run<I, A>(argv: I) -> Outcome
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: 3,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    match cli.command {
        Command::Synthesize(a) => run_batch(Kind::Synthesize, &a),
        Command::Simulate(a) => run_batch(Kind::Simulate, &a),
        Command::Verify(a) => run_batch(Kind::Verify, &a),
        Command::Enumerate(a) => Outcome::from_result(
            fs::read_to_string(&a.model)
                .map_err(|e| CliError::io(a.model.display(), e))
                .and_then(|text| Model::parse(&text))
                .and_then(|m| commands::cmd_enumerate(&m, a.n, a.mu1, a.mu2, a.out.as_deref())),
        ),
    }
}
