//! Bond percolation on random regular multigraphs built from the pairing
//! (configuration) model.
//!
//! The crate is organized bottom-up:
//!
//! * [`config_model`] samples uniform pairings and collapses them to multigraphs.
//! * [`percolation`] opens pairs independently and computes component censuses.
//! * [`exploration`] simulates the count-level cluster-growth Markov chain.
//! * [`theory`] holds the fixed-point, ODE and conserved-integral machinery.
//! * [`treecount`] computes exact (rational) and asymptotic tree-component counts.
//! * [`oracle`] enumerates every pairing and mask of tiny instances.
//! * [`experiments`] drives seeded Monte Carlo sweeps and their statistics.

pub mod config_model;
pub mod error;
pub mod experiments;
pub mod exploration;
pub mod oracle;
pub mod percolation;
pub mod rational;
pub mod rng;
pub mod theory;
pub mod treecount;
mod union_find;

pub use config_model::{DegreeSpec, Multigraph, Pairing};
pub use error::{Error, Result};
pub use exploration::{ChainRun, ChainState, StopPolicy, StopReason};
pub use percolation::{ComponentCensus, OpenMask};
pub use rng::{derive_rng, SimRng};
