//! Solver toolkit for uniform lower- and upper-bounded facility location
//! (LBUBFL): every open facility must serve at least `L` and at most `U`
//! clients.
//!
//! The main pipeline computes a solution that never violates the lower
//! bounds and exceeds the upper bounds by at most a 5/2 factor, by rounding
//! the LP relaxation into a tri-criteria solution, reshaping the instance
//! into a capacitated facility location problem, and repairing deficient
//! facilities along nearest-neighbor facility trees. Exact enumeration
//! oracles for desk-sized instances back the test and verification harness.
//!
//! All metric arithmetic is generic over the [`scalar::Real`] scalar; the
//! aliases at the crate root pin `f64`, which is what the CLI and the JSON
//! formats use.

pub mod cfl;
pub mod fixtures;
pub mod generator;
pub mod instance;
pub mod json;
pub mod lp;
pub mod mcflow;
pub mod oracle;
pub mod pipeline;
pub mod scalar;
pub mod simplex;
pub mod solution;
pub mod transform;
pub mod treefix;
pub mod tricriteria;

pub use scalar::Real;

/// `f64` aliases: the default working types of the CLI and the JSON formats.
pub type Instance = instance::Instance<f64>;
pub type FractionalSolution = lp::FractionalSolution<f64>;
pub type TriCriteriaSolution = tricriteria::TriCriteriaSolution<f64>;
pub type TriParams = tricriteria::TriParams<f64>;
pub type CflInstance = transform::CflInstance<f64>;
pub type CflSolution = cfl::CflSolution<f64>;
pub type I1Instance = transform::I1Instance<f64>;
pub type PipelineParams = pipeline::PipelineParams<f64>;
pub type PipelineReport = pipeline::PipelineReport<f64>;

pub use instance::{feasible_open_count, ColocatedClients, InstanceError, MetricReport};
pub use pipeline::{solve_instance, PipelineError};
pub use solution::{check_bounds, cost, BoundReport, Solution, SolutionError};
