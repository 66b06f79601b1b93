//! Scenario files.
//!
//! A scenario is a flat list of `key = value` lines plus `topology … end` and
//! `signal … end` blocks whose bodies use the graph module's text formats.
//! Matrices and vectors are JSON arrays; scalars may be written as fractions.
//!
//! ```text
//! A = [[-0.38, 0.72], [-0.68, 0.42]]
//! B = [[0.26], [0.31]]
//! topology
//! N 1
//! edge 0 1
//! end
//! T_low = 0.001
//! ...
//! ```

use std::fmt::Write as _;

use sdcons::graph::{parse_real, SwitchingSignal, Topology};
use sdcons::Matrix;

use crate::error::CliError;

/// Sampling parameters for the seeded aperiodic schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampling {
    pub t_low: f64,
    pub t_high: f64,
    pub grid_h: f64,
    pub seed: u64,
    pub horizon: f64,
}

/// Follower/leader dynamics read from a scenario or model file.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub a: Matrix,
    pub b: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model: Model,
    pub mu1: f64,
    pub mu2: f64,
    /// Explicit diagonal scaling; searched for when absent.
    pub d: Option<Vec<f64>>,
    /// Explicit gain; synthesized when absent.
    pub k: Option<Matrix>,
    pub topologies: Vec<Topology>,
    /// `None` for a static network.
    pub signal: Option<SwitchingSignal<f64>>,
    pub sampling: Sampling,
    pub x0: Vec<f64>,
    pub followers: Vec<Vec<f64>>,
    pub output_dt: f64,
    /// Start of the window over which the summary reports the max error.
    pub burn_in: f64,
    pub trajectory_csv: String,
    pub samples_csv: String,
}

#[derive(Debug)]
enum Item {
    Value { line: usize, key: String, value: String },
    Topology { line: usize, body: String },
    Signal { line: usize, body: String },
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Parse(format!("line {line}: {msg}"))
}

fn lex(text: &str) -> Result<Vec<Item>, CliError> {
    let mut items = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    while let Some((line, raw)) = lines.next() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content == "topology" || content == "signal" {
            let mut body = String::new();
            let mut closed = false;
            for (_, inner) in lines.by_ref() {
                if inner.split('#').next().unwrap_or("").trim() == "end" {
                    closed = true;
                    break;
                }
                body.push_str(inner);
                body.push('\n');
            }
            if !closed {
                return Err(parse_err(line, format!("`{content}` block is not closed by `end`")));
            }
            items.push(if content == "topology" {
                Item::Topology { line, body }
            } else {
                Item::Signal { line, body }
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected `key = value`, got `{content}`")))?;
        items.push(Item::Value {
            line,
            key: key.trim().to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(items)
}

fn real(line: usize, key: &str, value: &str) -> Result<f64, CliError> {
    parse_real(value).map_err(|e| parse_err(line, format!("{key}: {e}")))
}

fn vector(line: usize, key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = serde_json::from_str(value).map_err(|e| parse_err(line, format!("{key}: {e}")))?;
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err(parse_err(line, format!("{key}: expected a non-empty array of finite numbers")));
    }
    Ok(v)
}

fn rows(line: usize, key: &str, value: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let v: Vec<Vec<f64>> = serde_json::from_str(value).map_err(|e| parse_err(line, format!("{key}: {e}")))?;
    if v.is_empty() {
        return Err(parse_err(line, format!("{key}: empty array")));
    }
    Ok(v)
}

fn matrix(line: usize, key: &str, value: &str) -> Result<Matrix, CliError> {
    Matrix::from_rows(&rows(line, key, value)?).map_err(|e| parse_err(line, format!("{key}: {e}")))
}

/// Key/value lookup; unknown and duplicate keys are rejected while building it.
struct Table {
    values: Vec<(usize, String, String)>,
}

impl Table {
    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.values.iter().find(|(_, k, _)| k == key).map(|(l, _, v)| (*l, v.as_str()))
    }

    fn require(&self, key: &str) -> Result<(usize, &str), CliError> {
        self.get(key).ok_or_else(|| CliError::Parse(format!("missing required key `{key}`")))
    }

    fn real(&self, key: &str) -> Result<f64, CliError> {
        let (l, v) = self.require(key)?;
        real(l, key, v)
    }

    fn real_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        self.get(key).map_or(Ok(default), |(l, v)| real(l, key, v))
    }
}

const SCENARIO_KEYS: &[&str] = &[
    "A",
    "B",
    "mu1",
    "mu2",
    "D",
    "K",
    "T_low",
    "T_high",
    "grid_h",
    "seed",
    "horizon",
    "x0",
    "followers",
    "output_dt",
    "burn_in",
    "trajectory_csv",
    "samples_csv",
];

fn table(items: &[Item], allowed: &[&str]) -> Result<Table, CliError> {
    let mut values: Vec<(usize, String, String)> = Vec::new();
    for item in items {
        if let Item::Value { line, key, value } = item {
            if !allowed.contains(&key.as_str()) {
                return Err(parse_err(*line, format!("unknown key `{key}`")));
            }
            if values.iter().any(|(_, k, _)| k == key) {
                return Err(parse_err(*line, format!("duplicate key `{key}`")));
            }
            values.push((*line, key.clone(), value.clone()));
        }
    }
    Ok(Table { values })
}

fn model_from(t: &Table) -> Result<Model, CliError> {
    let (la, va) = t.require("A")?;
    let (lb, vb) = t.require("B")?;
    let a = matrix(la, "A", va)?;
    let b = matrix(lb, "B", vb)?;
    if !a.is_square() {
        return Err(parse_err(la, format!("A must be square, got {}x{}", a.rows(), a.cols())));
    }
    if b.rows() != a.rows() {
        return Err(parse_err(lb, format!("B must have {} rows, got {}", a.rows(), b.rows())));
    }
    Ok(Model { a, b })
}

impl Model {
    /// Reads `A` and `B` from a model file; other scenario keys are tolerated
    /// so that a scenario can serve as a model file.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        model_from(&table(&lex(text)?, SCENARIO_KEYS)?)
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let items = lex(text)?;
        let t = table(&items, SCENARIO_KEYS)?;
        let model = model_from(&t)?;
        let n = model.a.rows();

        let mut topologies = Vec::new();
        let mut signal = None;
        for item in &items {
            match item {
                Item::Topology { line, body } => {
                    topologies.push(Topology::parse(body).map_err(|e| parse_err(*line, e))?);
                }
                Item::Signal { line, body } => {
                    if signal.is_some() {
                        return Err(parse_err(*line, "more than one `signal` block"));
                    }
                    signal = Some(SwitchingSignal::parse(body).map_err(|e| parse_err(*line, e))?);
                }
                Item::Value { .. } => {}
            }
        }
        match (&signal, topologies.len()) {
            (_, 0) => return Err(CliError::Parse("no `topology` block".into())),
            (None, c) if c > 1 => {
                return Err(CliError::Parse(format!(
                    "{c} topologies but no `signal` block; a static network has exactly one"
                )))
            }
            (Some(s), c) if s.mode_count() != c => {
                return Err(CliError::Parse(format!(
                    "signal uses {} modes but {c} topologies are given",
                    s.mode_count()
                )))
            }
            _ => {}
        }
        let nf = topologies[0].followers();
        if topologies.iter().any(|tp| tp.followers() != nf) {
            return Err(CliError::Parse("topologies disagree on the follower count".into()));
        }

        let d = match t.get("D") {
            Some((l, v)) => {
                let d = vector(l, "D", v)?;
                if d.len() != nf {
                    return Err(parse_err(l, format!("D needs {nf} entries, got {}", d.len())));
                }
                Some(d)
            }
            None => None,
        };
        let k = match t.get("K") {
            Some((l, v)) => {
                let k = matrix(l, "K", v)?;
                if k.shape() != (model.b.cols(), n) {
                    return Err(parse_err(l, format!("K must be {}x{n}", model.b.cols())));
                }
                Some(k)
            }
            None => None,
        };

        let seed = {
            let (l, v) = t.require("seed")?;
            v.parse::<u64>().map_err(|_| parse_err(l, format!("seed: `{v}` is not an unsigned 64-bit integer")))?
        };
        let sampling = Sampling {
            t_low: t.real("T_low")?,
            t_high: t.real("T_high")?,
            grid_h: t.real("grid_h")?,
            seed,
            horizon: t.real("horizon")?,
        };
        let (lx, vx) = t.require("x0")?;
        let x0 = vector(lx, "x0", vx)?;
        if x0.len() != n {
            return Err(parse_err(lx, format!("x0 needs {n} entries, got {}", x0.len())));
        }
        let (lf, vf) = t.require("followers")?;
        let followers = rows(lf, "followers", vf)?;
        if followers.len() != nf || followers.iter().any(|x| x.len() != n || x.iter().any(|v| !v.is_finite())) {
            return Err(parse_err(lf, format!("followers must be {nf} finite states of dimension {n}")));
        }
        let output_dt = t.real_or("output_dt", sampling.grid_h)?;
        let burn_in = t.real_or("burn_in", 0.0)?;
        let name = |key: &str, default: &str| t.get(key).map_or(default.to_string(), |(_, v)| v.to_string());

        let s = Scenario {
            model,
            mu1: t.real_or("mu1", 1.0)?,
            mu2: t.real_or("mu2", 1.0)?,
            d,
            k,
            topologies,
            signal,
            sampling,
            x0,
            followers,
            output_dt,
            burn_in,
            trajectory_csv: name("trajectory_csv", "trajectory.csv"),
            samples_csv: name("samples_csv", "samples.csv"),
        };
        if !(s.mu1 > 0.0 && s.mu2 > 0.0) {
            return Err(CliError::Parse("mu1 and mu2 must be positive".into()));
        }
        if !(s.output_dt > 0.0 && s.sampling.horizon > 0.0 && s.burn_in >= 0.0) {
            return Err(CliError::Parse("output_dt and horizon must be positive, burn_in non-negative".into()));
        }
        Ok(s)
    }

    pub fn is_switching(&self) -> bool {
        self.signal.is_some()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "A = {}", json_rows(&self.model.a.to_rows()));
        let _ = writeln!(out, "B = {}", json_rows(&self.model.b.to_rows()));
        let _ = writeln!(out, "mu1 = {}", self.mu1);
        let _ = writeln!(out, "mu2 = {}", self.mu2);
        if let Some(d) = &self.d {
            let _ = writeln!(out, "D = {}", json_vec(d));
        }
        if let Some(k) = &self.k {
            let _ = writeln!(out, "K = {}", json_rows(&k.to_rows()));
        }
        for tp in &self.topologies {
            let _ = write!(out, "topology\n{}end\n", tp.to_text());
        }
        if let Some(s) = &self.signal {
            let _ = write!(out, "signal\n{}end\n", s.to_text());
        }
        let s = &self.sampling;
        let _ = writeln!(out, "T_low = {}", s.t_low);
        let _ = writeln!(out, "T_high = {}", s.t_high);
        let _ = writeln!(out, "grid_h = {}", s.grid_h);
        let _ = writeln!(out, "seed = {}", s.seed);
        let _ = writeln!(out, "horizon = {}", s.horizon);
        let _ = writeln!(out, "x0 = {}", json_vec(&self.x0));
        let _ = writeln!(out, "followers = {}", json_rows(&self.followers));
        let _ = writeln!(out, "output_dt = {}", self.output_dt);
        let _ = writeln!(out, "burn_in = {}", self.burn_in);
        let _ = writeln!(out, "trajectory_csv = {}", self.trajectory_csv);
        let _ = writeln!(out, "samples_csv = {}", self.samples_csv);
        out
    }
}

// `{}` on f64 is the shortest representation that parses back exactly
fn json_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", parts.join(", "))
}

fn json_rows(rows: &[Vec<f64>]) -> String {
    let parts: Vec<String> = rows.iter().map(|r| json_vec(r)).collect();
    format!("[{}]", parts.join(", "))
}

fn example_model() -> Model {
    Model {
        a: Matrix::from_rows(&[[-0.38, 0.72], [-0.68, 0.42]]).expect("constant matrix"),
        b: Matrix::from_rows(&[[0.26], [0.31]]).expect("constant matrix"),
    }
}

fn example_graph_one() -> Topology {
    Topology::new(4, [(0, 1), (0, 2), (3, 2), (1, 3), (4, 3), (2, 4)]).expect("constant graph")
}

fn example_graph_two() -> Topology {
    Topology::new(4, [(0, 1), (0, 2), (1, 3), (2, 4), (3, 4)]).expect("constant graph")
}

fn example_base(sampling: Sampling, topologies: Vec<Topology>, signal: Option<SwitchingSignal<f64>>) -> Scenario {
    Scenario {
        model: example_model(),
        mu1: 1.0,
        mu2: 1.0,
        d: Some(vec![1.0; 4]),
        k: None,
        topologies,
        signal,
        sampling,
        x0: vec![1.2, -0.8],
        followers: vec![vec![2.4, -1.6], vec![-1.4, 2.6], vec![1.8, -2.5], vec![-0.2, 1.3]],
        output_dt: 0.001,
        burn_in: 20.0,
        trajectory_csv: "trajectory.csv".into(),
        samples_csv: "samples.csv".into(),
    }
}

/// Four followers on the static graph, `T_s = l_s·0.001` with `l_s ∈ {1, …, 18}`.
pub fn example_static() -> Scenario {
    let sampling = Sampling {
        t_low: 0.001,
        t_high: 0.018,
        grid_h: 0.001,
        seed: 1,
        horizon: 30.0,
    };
    example_base(sampling, vec![example_graph_one()], None)
}

/// The same agents switching between two graphs with period 1 (mode 1 for the
/// first two thirds), `l_s ∈ {1, …, 16}`.
pub fn example_switching() -> Scenario {
    let sampling = Sampling {
        t_low: 0.001,
        t_high: 0.016,
        grid_h: 0.001,
        seed: 2,
        horizon: 30.0,
    };
    let signal = SwitchingSignal::periodic(1.0, vec![(1, 2.0 / 3.0), (2, 1.0 / 3.0)]).expect("constant signal");
    example_base(sampling, vec![example_graph_one(), example_graph_two()], Some(signal))
}
