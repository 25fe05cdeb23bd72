//! Non-backtracking machinery for graph learning experiments.
//!
//! * [`graph`]: simple undirected graphs, directed-arc indexing and the sparse
//!   operators built on arcs (non-backtracking matrix, incidence, normalized
//!   adjacency).
//! * [`walks`]: simple, non-backtracking and begrudgingly backtracking random
//!   walks, with Monte Carlo and exact tree access times.
//! * [`sensitivity`]: over-squashing sensitivity bounds for non-backtracking
//!   and conventional message passing.
//! * [`nbagnn`]: a small non-backtracking GCN with hand-written gradients.
//! * [`spectral`]: stochastic block model sampling and community recovery
//!   from the leading eigenvectors of the non-backtracking matrix.

pub mod error;
pub mod graph;
pub mod nbagnn;
pub mod rng;
pub mod sensitivity;
pub mod spectral;
pub mod walks;

pub use error::{Error, Result};
pub use graph::{ArcIndex, Graph, SparseRealMatrix};
