//! Actuator placement on networked linear systems `ẋ = Ax + B(S)u`.
//!
//! Placement minimizes a set metric subject to structural controllability
//! and a cardinality budget; backup placement finds the fewest extra
//! actuators that keep the system structurally controllable after any
//! single actuator failure.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.
//!
//! ```
//! use netplace::{backup_plan, place, DiGraph, GramianMetric, Method, NodeSet, PlacementConfig, SolverMode};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let g = DiGraph::from_rows(&[
//!     vec![0.0, -0.5, -0.8, -0.6],
//!     vec![1.0, 0.0, 0.0, 0.0],
//!     vec![1.0, 0.0, 0.0, 0.0],
//!     vec![1.0, 0.0, 0.0, 0.0],
//! ])?;
//! let f = GramianMetric::with_defaults(g.adjacency_matrix())?;
//! let placed = place(&g, &f, &PlacementConfig::new(2, Method::LongHorizon))?;
//! assert!(placed.structurally_controllable);
//!
//! let plan = backup_plan(&g, &NodeSet::from([2, 3]), SolverMode::Exact)?;
//! assert_eq!(plan.chosen, NodeSet::from([1]));
//! # Ok(())
//! # }
//! ```

pub mod backup;
pub mod graph;
pub mod linalg;
pub mod matching;
pub mod metrics;
mod nodeset;
pub mod placement;
mod scalar;

pub use backup::{
    backup_plan, dfr_positions, dfr_positions_with_witness, essential_actuators,
    feasible_positions, min_hitting_set, BackupError, BackupPlan, Certificate, SolverMode,
};
pub use graph::{Edge, GraphError, SccDecomposition};
pub use linalg::LinalgError;
pub use matching::{
    build_aux, in_c_k, in_c_tilde_k, is_dilation_free, is_structurally_controllable,
    matching_number, max_matching, min_dilation_free_size, AuxiliaryBipartite, LeftNode, Matching,
};
pub use metrics::{
    controllability_gramian, matrix_exponential, MemoMetric, MetricError, SetMetric,
};
pub use nodeset::NodeSet;
pub use placement::{
    forward_greedy, initial_set, long_horizon_greedy, place, Depth, Horizon, Method,
    PlacementConfig, PlacementError, TieBreak, TraceStep,
};
pub use scalar::Scalar;

pub type DiGraph<T = f64> = graph::DiGraph<T>;
pub type Matrix<T = f64> = linalg::Matrix<T>;
pub type GramianMetric<T = f64> = metrics::GramianMetric<T>;
pub type ModularTestMetric<T = f64> = metrics::ModularTestMetric<T>;
pub type PlacementResult<T = f64> = placement::PlacementResult<T>;

pub type DiGraph32 = graph::DiGraph<f32>;
pub type Matrix32 = linalg::Matrix<f32>;
pub type GramianMetric32 = metrics::GramianMetric<f32>;
