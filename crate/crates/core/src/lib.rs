//! Distributed sampled-data control for leader-following consensus of linear
//! multi-agent systems.
//!
//! The crate synthesizes a feedback gain `K` and an explicit upper bound on
//! the sampling interval from the follower dynamics `(A, B)` and the
//! leader-rooted communication graph(s), then simulates the closed loop
//! exactly (zero-order hold, per-interval matrix exponentials) while
//! monitoring the quadratic Lyapunov function the bound is built on.
//!
//! Everything numerical is generic over [`Real`] (`f32`/`f64`); the aliases
//! below fix the scalar to `f64`, which is what the CLI and the reference
//! scenarios use.

pub mod error;
pub mod graph;
pub mod numerics;
pub mod scalar;
pub mod sim;
pub mod synthesis;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix = numerics::DenseMatrix<f64>;
pub type Matrix32 = numerics::DenseMatrix<f32>;
pub type GroundedLaplacian = graph::GroundedLaplacian<f64>;
pub type SwitchingSignal = graph::SwitchingSignal<f64>;
pub type Network = graph::Network<f64>;
pub type SynthesisResult = synthesis::SynthesisResult<f64>;
pub type WorstCaseResult = synthesis::WorstCaseResult<f64>;
pub type SystemModel = sim::SystemModel<f64>;
pub type SamplingSchedule = sim::SamplingSchedule<f64>;
pub type SimulationResult = sim::SimulationResult<f64>;
pub type ContractionReport = sim::ContractionReport<f64>;
