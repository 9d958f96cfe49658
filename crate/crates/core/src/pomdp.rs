//! POMDP pieces used during planning: deterministic transitions, fictive
//! `(belief, pose)` states and hallucinated observations.

use serde::{Deserialize, Serialize};

use crate::gp_belief::BeliefGp;
use crate::reward::{RewardConfig, RewardKind};
use crate::trajectory::{build_spline, ActionSet, ActionTemplate, PlacedAction, Pose, SplineParams};
use crate::{Error, Point, Result};

/// Axis-aligned rectangular experiment area.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Workspace {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let ws = Workspace {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        ws.validate()?;
        Ok(ws)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::InvalidParameter(format!(
                "workspace bounds are empty or non-finite: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: Point) -> bool {
        (self.x_min..=self.x_max).contains(&p[0]) && (self.y_min..=self.y_max).contains(&p[1])
    }

    /// Distance from `p` to the workspace; zero inside.
    pub fn excursion(&self, p: Point) -> f64 {
        let dx = (self.x_min - p[0]).max(p[0] - self.x_max).max(0.0);
        let dy = (self.y_min - p[1]).max(p[1] - self.y_max).max(0.0);
        dx.hypot(dy)
    }

    pub fn center(&self) -> Point {
        [0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max)]
    }
}

/// A node state of the planning tree.
#[derive(Clone, Debug)]
pub struct FictiveState {
    pub belief: BeliefGp,
    pub pose: Pose,
}

/// Pose after executing `template` from `pose`. Deterministic.
pub fn transition(pose: &Pose, template: &ActionTemplate, length: f64) -> Result<Pose> {
    build_spline(template, pose, length)?.end_pose()
}

/// True iff every sample point (the last one being the end point) lies inside
/// the workspace.
pub fn in_bounds(ws: &Workspace, params: &SplineParams, num_samples: usize) -> bool {
    params
        .sample_points(num_samples)
        .into_iter()
        .chain(std::iter::once(params.point(1.0)))
        .all(|p| ws.contains(p))
}

fn max_excursion(ws: &Workspace, samples: &[Point]) -> f64 {
    samples.iter().map(|&p| ws.excursion(p)).fold(0.0, f64::max)
}

/// Number of follow-up steps an action must be able to chain in bounds. Six
/// sharpest turns of the default set close a full circle, so a pose that
/// passes this check can keep circling forever.
pub const VIABILITY_HORIZON: usize = 6;

fn samples_inside(ws: &Workspace, a: &PlacedAction) -> bool {
    a.samples.iter().all(|&p| ws.contains(p))
}

/// True iff some chain of `horizon` actions starting at `pose` stays in
/// bounds. Depth-first with early exit.
pub fn viable(ws: &Workspace, actions: &ActionSet, pose: &Pose, horizon: usize) -> bool {
    if horizon == 0 {
        return true;
    }
    (0..actions.len()).any(|id| {
        samples_inside(ws, &actions.place(id, pose))
            && viable(ws, actions, &actions.end_pose(id, pose), horizon - 1)
    })
}

/// Candidate actions from `pose`, in ascending id order: the in-bounds actions
/// after which [`VIABILITY_HORIZON`] further in-bounds steps remain possible.
/// Without such an action every in-bounds action is returned, and when none is
/// in bounds, the single action with the smallest excursion.
pub fn feasible_actions(ws: &Workspace, actions: &ActionSet, pose: &Pose) -> Vec<PlacedAction> {
    let placed = actions.place_all(pose);
    let inside: Vec<PlacedAction> = placed
        .iter()
        .filter(|a| samples_inside(ws, a))
        .cloned()
        .collect();
    let safe: Vec<PlacedAction> = inside
        .iter()
        .filter(|a| viable(ws, actions, &actions.end_pose(a.id, pose), VIABILITY_HORIZON))
        .cloned()
        .collect();
    if !safe.is_empty() {
        return safe;
    }
    if !inside.is_empty() {
        return inside;
    }
    let mut best: Option<(f64, PlacedAction)> = None;
    for a in placed {
        let e = max_excursion(ws, &a.samples);
        if best.as_ref().is_none_or(|(b, _)| e < *b) {
            best = Some((e, a));
        }
    }
    best.map(|(_, a)| vec![a]).unwrap_or_default()
}

/// Simulates executing `action`: the reward is computed on the current
/// belief, then every sample point receives a noiseless pseudo-observation
/// equal to the current posterior mean there.
pub fn hallucinate(
    state: &FictiveState,
    action: &PlacedAction,
    end_pose: Pose,
    kind: RewardKind,
    cfg: &RewardConfig,
) -> Result<(FictiveState, f64)> {
    let reward = kind.reward(&state.belief, action, cfg);
    let means: Vec<f64> = action
        .samples
        .iter()
        .map(|&p| state.belief.posterior_mean(p))
        .collect();
    let mut belief = state.belief.clone();
    for (&p, &m) in action.samples.iter().zip(&means) {
        belief.push(p, m)?;
    }
    Ok((
        FictiveState {
            belief,
            pose: end_pose,
        },
        reward,
    ))
}

/// [`hallucinate`] for a bare spline with the gradient-UCB reward.
pub fn hallucinate_observations(
    state: &FictiveState,
    params: &SplineParams,
    cfg: &RewardConfig,
) -> Result<(FictiveState, f64)> {
    let action = PlacedAction {
        id: 0,
        params: *params,
        samples: params.sample_points(cfg.num_samples),
    };
    hallucinate(state, &action, params.end_pose()?, RewardKind::GradientUcb, cfg)
}
