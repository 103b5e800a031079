//! Ising model on a dilute directed Erdős–Rényi graph with Curie–Weiss
//! scaling: exact enumeration, annealed moments, large-`N` predictions and a
//! Glauber sampler.

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod graph;
pub mod logsum;
pub mod mcmc;
pub mod model;
pub mod stats;
pub mod testfn;

pub use error::{Error, Result};
pub use model::{DisorderGraph, ModelParams, SpinConfig};
pub use testfn::TestFunction;

/// Version string embedded in every emitted artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
