//! Non-myopic informative path planning over continuous spline trajectories.
//!
//! The robot keeps a Gaussian-process belief over an unknown scalar field,
//! scores candidate spline trajectories with a gradient/uncertainty reward and
//! picks the next trajectory either greedily or with Monte-Carlo tree search
//! over hallucinated future beliefs.
//!
//! Module map:
//!
//! - [`gp_belief`]: GP posterior (mean, std, analytic mean gradient) with an
//!   append-only Cholesky factor.
//! - [`trajectory`]: constrained cubic splines, the discrete action set and
//!   arc-length uniform sampling.
//! - [`reward`]: trajectory values for every planner variant.
//! - [`pomdp`]: deterministic transitions, fictive states, hallucinated
//!   observations and workspace bounds.
//! - [`planners`]: myopic argmax, MCTS, and the random baseline.
//! - [`sim`]: terrains, sensor, episode loop and seeded trial batches.
//! - [`metrics`]: RMSE, WRMSE, MNLL and accumulated-reward series.
//! - [`config`] / [`export`]: experiment JSON schema and CSV/JSON artifacts.

pub mod config;
pub mod error;
pub mod export;
pub mod gp_belief;
pub mod metrics;
pub mod planners;
pub mod pomdp;
mod quadrature;
pub mod reward;
pub mod sim;
pub mod trajectory;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use gp_belief::{BeliefGp, KernelKind, KernelSpec, Surrogate};
pub use metrics::EvalGrid;
pub use planners::{PlannerConfig, PlannerKind, RewardKind};
pub use pomdp::{FictiveState, Workspace};
pub use reward::RewardConfig;
pub use sim::{EpisodeLog, SensorModel, Terrain};
pub use trajectory::{ActionSet, ActionTemplate, Pose, SplineParams};

/// A location in the planar workspace, in domain units.
pub type Point = [f64; 2];
