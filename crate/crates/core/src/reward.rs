//! Trajectory values for the planner variants.
//!
//! All values are plain sums over the sample points of a trajectory, evaluated
//! on one fixed belief: the belief is never updated between the points of a
//! single trajectory.

use serde::{Deserialize, Serialize};

use crate::gp_belief::BeliefGp;
use crate::trajectory::{PlacedAction, SplineParams};
use crate::{Error, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    /// Exploration weight κ.
    pub kappa: f64,
    /// Samples gathered per trajectory (M).
    pub num_samples: usize,
    /// Weight of the negative path-length cost.
    pub cost_weight: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            kappa: 5.0,
            num_samples: 8,
            cost_weight: 0.0,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_samples == 0 {
            return Err(Error::InvalidParameter("reward.num_samples must be >= 1".into()));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "reward.kappa must be non-negative, got {}",
                self.kappa
            )));
        }
        if !self.cost_weight.is_finite() {
            return Err(Error::InvalidParameter("reward.cost_weight must be finite".into()));
        }
        Ok(())
    }
}

/// Which per-point acquisition a planner maximises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardKind {
    /// `‖∇μ‖ + κσ`
    GradientUcb,
    /// `σ`
    Explorer,
    /// `μ + κσ`
    Sbo,
}

impl RewardKind {
    pub fn value_at(self, belief: &BeliefGp, points: &[Point], kappa: f64) -> f64 {
        match self {
            RewardKind::GradientUcb => points
                .iter()
                .map(|&p| {
                    let g = belief.mean_gradient(p);
                    g[0].hypot(g[1]) + kappa * belief.posterior_std(p)
                })
                .sum(),
            RewardKind::Explorer => points.iter().map(|&p| belief.posterior_std(p)).sum(),
            RewardKind::Sbo => points
                .iter()
                .map(|&p| {
                    let (mean, var) = belief.predict(p);
                    mean + kappa * var.sqrt()
                })
                .sum(),
        }
    }

    /// Value of a placed action plus the path cost term.
    pub fn reward(self, belief: &BeliefGp, action: &PlacedAction, cfg: &RewardConfig) -> f64 {
        let value = self.value_at(belief, &action.samples, cfg.kappa);
        if cfg.cost_weight == 0.0 {
            value
        } else {
            value - cfg.cost_weight * action.params.arc_length()
        }
    }
}

/// Gradient-UCB value of the trajectory: `Σ ‖∇μ(pᵢ)‖ + κσ(pᵢ)`.
pub fn trajectory_value(belief: &BeliefGp, params: &SplineParams, cfg: &RewardConfig) -> f64 {
    RewardKind::GradientUcb.value_at(belief, &params.sample_points(cfg.num_samples), cfg.kappa)
}

/// Trajectory value with the movement cost `−cost_weight · arc_length`.
pub fn pomdp_reward(belief: &BeliefGp, params: &SplineParams, cfg: &RewardConfig) -> f64 {
    let value = trajectory_value(belief, params, cfg);
    if cfg.cost_weight == 0.0 {
        value
    } else {
        value + cfg.cost_weight * -params.arc_length()
    }
}

/// Pure uncertainty: `Σ σ(pᵢ)`.
pub fn explorer_value(belief: &BeliefGp, params: &SplineParams, cfg: &RewardConfig) -> f64 {
    RewardKind::Explorer.value_at(belief, &params.sample_points(cfg.num_samples), cfg.kappa)
}

/// Standard UCB summed along the trajectory: `Σ μ(pᵢ) + κσ(pᵢ)`.
pub fn sbo_value(belief: &BeliefGp, params: &SplineParams, cfg: &RewardConfig) -> f64 {
    RewardKind::Sbo.value_at(belief, &params.sample_points(cfg.num_samples), cfg.kappa)
}
