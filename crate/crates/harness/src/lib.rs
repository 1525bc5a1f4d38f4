//! Experiment harness: Monte Carlo benchmarks, the shape pipeline, the
//! privacy audit and file formats.

pub mod audit;
pub mod bench;
pub mod config;
pub mod error;
pub mod io;
pub mod par;
pub mod seeds;
pub mod shape;

pub use bench::{run_benchmark, summarize, ResultRow, SummaryRow};
pub use config::{BenchmarkConfig, ChainOverrides, ManifoldKind};
pub use error::{HarnessError, Result};
pub use par::Execution;
