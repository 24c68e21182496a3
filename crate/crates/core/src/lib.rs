//! Cost-accounted independence oracles for k-uniform hypergraphs.
//!
//! The crate provides:
//! - explicit k-uniform hypergraphs and the two independence oracles
//!   (uncoloured and colourful) behind cost-accounting sessions;
//! - seedable, splittable randomness with exact binomial subset sampling;
//! - the exact algebra of the sampling schedules (`g(k, beta)`, the
//!   `(L̂, γ̂, F)` rows, the overhead identity);
//! - sublinear edge estimators for both oracle models, coarse and fine,
//!   with theory and fast run profiles;
//! - adversarial instance-pair generators and a distinguishing-game harness.

pub mod adversarial;
pub mod col;
pub mod cost;
pub mod error;
pub mod hypergraph;
pub mod io;
pub mod mathkit;
pub mod oracle;
pub mod profile;
pub mod rng;
pub mod sparse;
pub mod uncol;

pub use cost::{CostModel, SlowFactor};
pub use error::{CoreError, Result};
pub use hypergraph::{build_hypergraph, Hypergraph, PartitionedHypergraph};
pub use oracle::{OracleMode, OracleSession, SessionGraph};
pub use profile::{Profile, ProfileKind};
pub use rng::RngStream;
pub use sparse::SparseCountOutcome;
pub use uncol::{EstValue, Estimate};
