//! Differentially private minimum spanning trees under edge-weight privacy.
//!
//! The graph topology is public and the weight vector is private; two weight
//! vectors are neighbours when every entry differs by at most `delta_inf`.
//! The crate provides the input-perturbation mechanism, private Kruskal, the
//! one-pass (exponential race) form of private Kruskal, two baselines, the
//! sampling engine the private algorithms share, exact small-instance
//! oracles, instance generators and an experiment harness.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the bottom of this file fix the scalar to `f64`, which is what the
//! harness and CLI use.

pub mod error;
pub mod graph;
pub mod harness;
pub mod instances;
pub mod mechanisms;
pub mod oracle;
pub mod ppsacr;
pub mod privacy;
pub mod randomness;
pub mod scalar;

pub use error::{Error, Result};
pub use graph::{DisjointSets, SpanningTree};
pub use mechanisms::MechanismId;
pub use randomness::RngStream;
pub use scalar::Real;

pub type Graph = graph::WeightedGraph<f64>;
pub type Graph32 = graph::WeightedGraph<f32>;
pub type Budget = privacy::PrivacyBudget<f64>;
pub type Budget32 = privacy::PrivacyBudget<f32>;
pub type MechanismResult = mechanisms::MechanismResult<f64>;
pub type SamplingTree = ppsacr::SamplingTree<f64>;
