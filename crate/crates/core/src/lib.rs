//! Node similarity and role extraction for directed graphs.
//!
//! The similarity of two nodes counts the targets they reach through
//! neighborhood patterns of the same shape, weighted geometrically by
//! pattern length. [`exact`] computes it as the fixed point of a linear
//! iteration, [`lowrank`] approximates that fixed point with a rank-`r`
//! projected iteration that never stores `n × n` matrices, and [`roles`]
//! clusters the resulting similarity graph into roles. [`benchgen`] and
//! [`analysis`] reproduce planted-role experiments.
//!
//! ```
//! use rolesim::{benchgen, roles};
//!
//! let inst = benchgen::regular_block_cycle(3, 4).unwrap();
//! let opts = roles::RoleOptions { rank: Some(3), ..Default::default() };
//! let found = roles::extract_roles(&inst.graph, &opts).unwrap();
//! assert_eq!(found.hierarchy.top().canonical(), inst.truth.canonical());
//! ```

pub mod analysis;
pub mod benchgen;
pub mod cli;
pub mod error;
pub mod exact;
pub mod graph;
pub mod io;
pub mod lowrank;
pub mod matrix;
pub mod rng;
pub mod roles;

pub use error::{Error, Result};
pub use exact::{Beta, ConvergenceReport};
pub use graph::{DirectedGraph, Partition};
pub use lowrank::LowRankFactor;
pub use matrix::DenseSymMatrix;
pub use roles::Hierarchy;
