//! Leader-rooted communication graphs.
//!
//! Node `0` is the leader, nodes `1..=N` are followers. An edge `(j, i)` means
//! follower `i` receives the state of agent `j`. Adjacency is binary.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;
use crate::scalar::Real;

/// Digraph on the leader (node 0) and `N` followers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Topology {
    followers: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Topology {
    pub fn new(followers: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if followers == 0 {
            return Err(Error::InvalidTopology("at least one follower is required".into()));
        }
        let mut set = BTreeSet::new();
        for (j, i) in edges {
            if j > followers || i > followers {
                return Err(Error::InvalidTopology(format!(
                    "edge ({j}, {i}) references a node outside 0..={followers}"
                )));
            }
            if j == i {
                return Err(Error::InvalidTopology(format!("self-loop on node {i}")));
            }
            set.insert((j, i));
        }
        Ok(Self { followers, edges: set })
    }

    /// Parses the line format `N <count>` followed by `edge <j> <i>` lines.
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut followers = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::InvalidTopology(format!("line {}: {msg}", lineno + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "N" => {
                    if fields.len() != 2 {
                        return Err(err("expected `N <count>`".into()));
                    }
                    if followers.is_some() {
                        return Err(err("duplicate `N` line".into()));
                    }
                    followers = Some(parse_index(fields[1]).map_err(&err)?);
                }
                "edge" => match fields.len() {
                    3 => edges.push((
                        parse_index(fields[1]).map_err(&err)?,
                        parse_index(fields[2]).map_err(&err)?,
                    )),
                    4 => return Err(err("weighted edges are not supported; adjacency is binary".into())),
                    _ => return Err(err("expected `edge <j> <i>`".into())),
                },
                other => return Err(err(format!("unknown keyword `{other}`"))),
            }
        }
        let followers = followers.ok_or_else(|| Error::InvalidTopology("missing `N <count>` line".into()))?;
        Self::new(followers, edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("N {}\n", self.followers);
        for (j, i) in &self.edges {
            let _ = writeln!(out, "edge {j} {i}");
        }
        out
    }

    pub fn followers(&self) -> usize {
        self.followers
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    /// Grounded Laplacian: `h_ij = −ā_ij` for followers `i ≠ j`, `h_ii = Σ_{j=0}^{N} ā_ij`.
    /// Edges into the leader do not enter `H`.
    pub fn grounded_laplacian<T: Real>(&self) -> GroundedLaplacian<T> {
        let n = self.followers;
        let mut h = DenseMatrix::zeros(n, n);
        for &(j, i) in &self.edges {
            if i == 0 {
                continue;
            }
            h[(i - 1, i - 1)] = h[(i - 1, i - 1)] + T::one();
            if j != 0 {
                h[(i - 1, j - 1)] = h[(i - 1, j - 1)] - T::one();
            }
        }
        GroundedLaplacian { h }
    }

    /// The first follower (1-based) with no directed path from the leader.
    pub fn unreachable_follower(&self) -> Option<usize> {
        let n = self.followers;
        let mut seen = vec![false; n + 1];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for &(j, i) in self.edges.range((u, 0)..=(u, n)) {
                debug_assert_eq!(j, u);
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back(i);
                }
            }
        }
        (1..=n).find(|&i| !seen[i])
    }

    /// Every follower is reachable from the leader along directed edges.
    pub fn leader_reachable(&self) -> bool {
        self.unreachable_follower().is_none()
    }
}

/// Shorthand for [`Topology::grounded_laplacian`].
pub fn build_h<T: Real>(t: &Topology) -> GroundedLaplacian<T> {
    t.grounded_laplacian()
}

/// Shorthand for [`Topology::leader_reachable`].
pub fn leader_reachable(t: &Topology) -> bool {
    t.leader_reachable()
}

/// The follower block `H` of a leader-rooted graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundedLaplacian<T> {
    h: DenseMatrix<T>,
}

impl<T: Real> GroundedLaplacian<T> {
    /// Wraps an explicit square Z-matrix (non-positive off-diagonal entries).
    pub fn from_matrix(h: DenseMatrix<T>) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::InvalidMatrix(format!("H must be square, got {:?}", h.shape())));
        }
        for i in 0..h.rows() {
            for j in 0..h.cols() {
                if i != j && h[(i, j)] > T::zero() {
                    return Err(Error::InvalidMatrix(format!(
                        "H has a positive off-diagonal entry at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { h })
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.h
    }

    pub fn followers(&self) -> usize {
        self.h.rows()
    }

    /// Nonsingular M-matrix test for a Z-matrix: `H` invertible with `H⁻¹ ≥ 0`
    /// elementwise (down to `−1e-12`).
    pub fn is_nonsingular_m(&self) -> bool {
        match self.h.inverse() {
            Ok(inv) => inv.as_slice().iter().all(|&x| x >= T::lit(-1e-12)),
            Err(_) => false,
        }
    }
}

pub fn is_nonsingular_m<T: Real>(h: &GroundedLaplacian<T>) -> bool {
    h.is_nonsingular_m()
}

/// Piecewise-constant, right-continuous selection of the active graph mode.
/// Modes are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub enum SwitchingSignal<T> {
    /// `(mode, duration)` phases repeated with period equal to their total.
    Periodic { period: T, phases: Vec<(usize, T)> },
    /// `(switch time, mode)` events; the first event is at `t = 0`.
    Events(Vec<(T, usize)>),
}

impl<T: Real> SwitchingSignal<T> {
    pub fn constant(mode: usize) -> Self {
        SwitchingSignal::Events(vec![(T::zero(), mode)])
    }

    pub fn periodic(period: T, phases: Vec<(usize, T)>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidSignal("periodic signal needs at least one phase".into()));
        }
        if !(period > T::zero()) || !period.is_finite() {
            return Err(Error::InvalidSignal(format!("period must be positive, got {period}")));
        }
        for &(mode, d) in &phases {
            if mode == 0 {
                return Err(Error::InvalidSignal("modes are numbered from 1".into()));
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::InvalidSignal(format!("phase duration must be positive, got {d}")));
            }
        }
        let total: T = phases.iter().map(|p| p.1).sum();
        if (total - period).abs() > T::tol(1e-9, 64.0) * period {
            return Err(Error::InvalidSignal(format!(
                "phase durations sum to {total}, period is {period}"
            )));
        }
        Ok(SwitchingSignal::Periodic { period, phases })
    }

    pub fn events(events: Vec<(T, usize)>) -> Result<Self> {
        match events.first() {
            None => return Err(Error::InvalidSignal("event list is empty".into())),
            Some(&(t, _)) if t != T::zero() => {
                return Err(Error::InvalidSignal(format!("first event must be at t = 0, got {t}")))
            }
            _ => {}
        }
        for w in events.windows(2) {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() {
                return Err(Error::InvalidSignal(format!(
                    "event times must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if events.iter().any(|e| e.1 == 0) {
            return Err(Error::InvalidSignal("modes are numbered from 1".into()));
        }
        Ok(SwitchingSignal::Events(events))
    }

    /// Parses `period <T0>` + `phase <mode> <duration>` lines, or `event <time> <mode>`
    /// lines. Numbers may be written as fractions (`2/3`).
    pub fn parse(text: &str) -> Result<Self> {
        let mut period = None;
        let mut phases = Vec::new();
        let mut events = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::InvalidSignal(format!("line {}: {msg}", lineno + 1));
            let f: Vec<&str> = line.split_whitespace().collect();
            match (f[0], f.len()) {
                ("period", 2) => period = Some(parse_real::<T>(f[1]).map_err(&err)?),
                ("phase", 3) => phases.push((
                    parse_index(f[1]).map_err(&err)?,
                    parse_real::<T>(f[2]).map_err(&err)?,
                )),
                ("event", 3) => events.push((
                    parse_real::<T>(f[1]).map_err(&err)?,
                    parse_index(f[2]).map_err(&err)?,
                )),
                (kw @ ("period" | "phase" | "event"), _) => {
                    return Err(err(format!("wrong number of fields for `{kw}`")))
                }
                (other, _) => return Err(err(format!("unknown keyword `{other}`"))),
            }
        }
        match (period, phases.is_empty(), events.is_empty()) {
            (Some(p), false, true) => Self::periodic(p, phases),
            (None, false, true) => {
                let p = phases.iter().map(|x| x.1).sum();
                Self::periodic(p, phases)
            }
            (None, true, false) => Self::events(events),
            (_, true, true) => Err(Error::InvalidSignal("no phases or events given".into())),
            _ => Err(Error::InvalidSignal("mix of periodic phases and explicit events".into())),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            SwitchingSignal::Periodic { period, phases } => {
                let _ = writeln!(out, "period {period}");
                for (m, d) in phases {
                    let _ = writeln!(out, "phase {m} {d}");
                }
            }
            SwitchingSignal::Events(ev) => {
                for (t, m) in ev {
                    let _ = writeln!(out, "event {t} {m}");
                }
            }
        }
        out
    }

    /// Largest mode index referenced.
    pub fn mode_count(&self) -> usize {
        match self {
            SwitchingSignal::Periodic { phases, .. } => phases.iter().map(|p| p.0).max().unwrap_or(1),
            SwitchingSignal::Events(ev) => ev.iter().map(|e| e.1).max().unwrap_or(1),
        }
    }

    /// Active mode at time `t` (right-continuous at switch instants).
    pub fn mode(&self, t: T) -> Result<usize> {
        if !(t >= T::zero()) {
            return Err(Error::InvalidTime(t.as_f64()));
        }
        Ok(match self {
            SwitchingSignal::Periodic { period, phases } => {
                let cycles = (t / *period).floor();
                let mut r = t - cycles * *period;
                if r >= *period {
                    r = r - *period;
                }
                if r < T::zero() {
                    r = T::zero();
                }
                let mut end = T::zero();
                let mut active = phases[phases.len() - 1].0;
                for &(mode, d) in phases {
                    end = end + d;
                    if r < end {
                        active = mode;
                        break;
                    }
                }
                active
            }
            SwitchingSignal::Events(ev) => {
                let idx = ev.partition_point(|e| e.0 <= t);
                ev[idx.saturating_sub(1)].1
            }
        })
    }
}

pub fn signal_mode<T: Real>(s: &SwitchingSignal<T>, t: T) -> Result<usize> {
    s.mode(t)
}

/// One grounded Laplacian per mode plus the signal selecting among them.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    laplacians: Vec<GroundedLaplacian<T>>,
    signal: SwitchingSignal<T>,
}

impl<T: Real> Network<T> {
    pub fn new(laplacians: Vec<GroundedLaplacian<T>>, signal: SwitchingSignal<T>) -> Result<Self> {
        let first = laplacians
            .first()
            .ok_or_else(|| Error::InvalidTopology("network has no topologies".into()))?;
        if laplacians.iter().any(|h| h.followers() != first.followers()) {
            return Err(Error::InvalidTopology("topologies disagree on the follower count".into()));
        }
        if signal.mode_count() > laplacians.len() {
            return Err(Error::InvalidSignal(format!(
                "signal references mode {} but only {} topologies are given",
                signal.mode_count(),
                laplacians.len()
            )));
        }
        Ok(Self { laplacians, signal })
    }

    pub fn fixed(h: GroundedLaplacian<T>) -> Self {
        Self {
            laplacians: vec![h],
            signal: SwitchingSignal::constant(1),
        }
    }

    pub fn laplacians(&self) -> &[GroundedLaplacian<T>] {
        &self.laplacians
    }

    pub fn signal(&self) -> &SwitchingSignal<T> {
        &self.signal
    }

    pub fn followers(&self) -> usize {
        self.laplacians[0].followers()
    }

    /// Mode and Laplacian active at `t`.
    pub fn active(&self, t: T) -> Result<(usize, &GroundedLaplacian<T>)> {
        let mode = self.signal.mode(t)?;
        Ok((mode, &self.laplacians[mode - 1]))
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn parse_index(s: &str) -> std::result::Result<usize, String> {
    s.parse().map_err(|_| format!("`{s}` is not a non-negative integer"))
}

/// Parses a finite real, accepting `p/q` fractions.
pub fn parse_real<T: Real>(s: &str) -> std::result::Result<T, String> {
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let n: f64 = num.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
            let d: f64 = den.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
            if d == 0.0 {
                return Err(format!("`{s}` divides by zero"));
            }
            n / d
        }
        None => s.parse().map_err(|_| format!("`{s}` is not a number"))?,
    };
    if !value.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(T::lit(value))
}
