//! Online piecewise linear regression with an incrementally grown decision
//! tree whose nodes are mixed by context-tree weighting.
//!
//! The tree partitions `[-A, A]^p` by midpoint splits. Every node runs its own
//! regularized least-squares model; the prediction mixes the models on the
//! path of the current regressor with weights that, summed over all prunings
//! of the tree, track the best piecewise linear model in hindsight.

pub mod audit;
pub mod baselines;
pub mod checkpoint;
pub mod datagen;
pub mod error;
pub mod label;
pub mod mixture;
pub mod region;
pub mod regressor;
pub mod rls;
pub mod trace;
pub mod tree;

pub use error::{Error, Result};
pub use label::NodeLabel;
pub use mixture::{StepTrace, TreeRegressor};
pub use regressor::OnlineRegressor;
pub use tree::{DepthCap, Tree, TreeConfig};
