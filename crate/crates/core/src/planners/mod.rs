//! Action selection: exhaustive myopic argmax, Monte-Carlo tree search and a
//! uniformly random baseline.

mod mcts;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use crate::reward::RewardKind;
pub use mcts::{mcts_plan, mcts_search, rollout, NodeId, SearchTree, TreeNode};

use crate::pomdp::{feasible_actions, FictiveState, Workspace};
use crate::reward::RewardConfig;
use crate::trajectory::{ActionSet, PlacedAction};
use crate::{Error, Result};

/// Relative tolerance under which two values count as tied.
const TIE_RTOL: f64 = 1e-12;

pub(crate) fn strictly_better(candidate: f64, incumbent: f64) -> bool {
    let scale = 1f64.max(candidate.abs()).max(incumbent.abs());
    candidate - incumbent > TIE_RTOL * scale
}

/// The planners that can drive an episode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerKind {
    /// MCTS over the gradient-UCB reward.
    BoPomdp,
    /// One-step argmax of the gradient-UCB reward.
    Myopic,
    /// One-step argmax of the summed posterior std.
    Explorer,
    /// MCTS over the mean-based UCB reward.
    Sbo,
    Random,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 5] = [
        PlannerKind::BoPomdp,
        PlannerKind::Myopic,
        PlannerKind::Explorer,
        PlannerKind::Sbo,
        PlannerKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::BoPomdp => "bo-pomdp",
            PlannerKind::Myopic => "myopic",
            PlannerKind::Explorer => "explorer",
            PlannerKind::Sbo => "sbo",
            PlannerKind::Random => "random",
        }
    }

    pub fn reward_kind(self) -> RewardKind {
        match self {
            PlannerKind::BoPomdp | PlannerKind::Myopic | PlannerKind::Random => {
                RewardKind::GradientUcb
            }
            PlannerKind::Explorer => RewardKind::Explorer,
            PlannerKind::Sbo => RewardKind::Sbo,
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlannerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = PlannerKind::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidParameter(format!(
                    "unknown planner `{s}`; valid planners: {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Look-ahead depth of the search tree.
    pub depth_max: usize,
    pub mcts_iterations: usize,
    /// UCB1 exploration constant.
    pub kappa_mc: f64,
    /// Discount per tree level.
    pub gamma: f64,
    pub reward_kind: RewardKind,
    /// When false, leaves are valued by their edge rewards alone.
    pub rollouts: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            depth_max: 3,
            mcts_iterations: 100,
            kappa_mc: 1.0,
            gamma: 0.95,
            reward_kind: RewardKind::GradientUcb,
            rollouts: true,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.depth_max == 0 {
            return Err(Error::InvalidParameter("planner.depth_max must be >= 1".into()));
        }
        if self.mcts_iterations == 0 {
            return Err(Error::InvalidParameter(
                "planner.mcts_iterations must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidParameter(format!(
                "planner.gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        if !(self.kappa_mc >= 0.0 && self.kappa_mc.is_finite()) {
            return Err(Error::InvalidParameter(
                "planner.kappa_mc must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Everything a planner needs besides the state.
#[derive(Clone, Copy, Debug)]
pub struct PlanContext<'a> {
    pub actions: &'a ActionSet,
    pub workspace: &'a Workspace,
    pub reward: &'a RewardConfig,
}

impl PlanContext<'_> {
    pub(crate) fn feasible(&self, state: &FictiveState) -> Vec<PlacedAction> {
        feasible_actions(self.workspace, self.actions, &state.pose)
    }
}

/// Exhaustive one-step argmax over the feasible actions; ties (within the
/// relative tolerance MCTS uses) go to the lowest action id.
pub fn plan_myopic(state: &FictiveState, ctx: &PlanContext<'_>, kind: RewardKind) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for action in ctx.feasible(state) {
        let value = kind.reward(&state.belief, &action, ctx.reward);
        if best.is_none_or(|(_, b)| strictly_better(value, b)) {
            best = Some((action.id, value));
        }
    }
    best.map(|(id, _)| id).ok_or(Error::NoFeasibleAction)
}

/// Uniform draw over the given actions.
pub fn plan_random<R: Rng + ?Sized>(actions: &[PlacedAction], rng: &mut R) -> Result<usize> {
    if actions.is_empty() {
        return Err(Error::NoFeasibleAction);
    }
    Ok(actions[rng.random_range(0..actions.len())].id)
}

/// Runs the planner selected by `kind`.
pub fn plan<R: Rng + ?Sized>(
    kind: PlannerKind,
    state: &FictiveState,
    ctx: &PlanContext<'_>,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> Result<usize> {
    match kind {
        PlannerKind::BoPomdp | PlannerKind::Sbo => {
            let cfg = PlannerConfig {
                reward_kind: kind.reward_kind(),
                ..*cfg
            };
            mcts_plan(state, ctx, &cfg, rng)
        }
        PlannerKind::Myopic | PlannerKind::Explorer => plan_myopic(state, ctx, kind.reward_kind()),
        PlannerKind::Random => plan_random(&ctx.feasible(state), rng),
    }
}
