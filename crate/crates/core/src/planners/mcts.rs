//! Monte-Carlo tree search over fictive `(belief, pose)` states.
//!
//! Each iteration selects a node with UCB1, expands one untried action in
//! ascending id order, rolls out uniformly random actions down to the depth
//! limit and backs the discounted return up the selected branch. The root
//! action with the best mean return wins.

use std::collections::VecDeque;

use rand::Rng;

use super::{strictly_better, PlanContext, PlannerConfig};
use crate::pomdp::{hallucinate, FictiveState};
use crate::reward::RewardKind;
use crate::trajectory::PlacedAction;
use crate::{Error, Result};

pub type NodeId = usize;

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub state: FictiveState,
    pub depth: usize,
    /// Action that led here from the parent.
    pub action: Option<usize>,
    /// Reward collected on the edge from the parent.
    pub edge_reward: f64,
    pub visits: u64,
    pub total_return: f64,
    parent: Option<NodeId>,
    /// `(action id, child)` in expansion (ascending id) order.
    children: Vec<(usize, NodeId)>,
    untried: VecDeque<PlacedAction>,
}

impl TreeNode {
    pub fn children(&self) -> &[(usize, NodeId)] {
        &self.children
    }

    pub fn is_fully_expanded(&self) -> bool {
        self.untried.is_empty()
    }

    pub fn mean_return(&self) -> f64 {
        self.total_return / self.visits as f64
    }
}

/// Arena-backed search tree; node 0 is the root.
#[derive(Clone, Debug)]
pub struct SearchTree {
    nodes: Vec<TreeNode>,
}

impl SearchTree {
    pub const ROOT: NodeId = 0;

    pub fn new(root: FictiveState, untried: Vec<PlacedAction>) -> Self {
        SearchTree {
            nodes: vec![TreeNode {
                state: root,
                depth: 0,
                action: None,
                edge_reward: 0.0,
                visits: 0,
                total_return: 0.0,
                parent: None,
                children: Vec::new(),
                untried: untried.into(),
            }],
        }
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn add_child(
        &mut self,
        parent: NodeId,
        action: usize,
        state: FictiveState,
        edge_reward: f64,
        untried: Vec<PlacedAction>,
    ) -> NodeId {
        let id = self.nodes.len();
        let depth = self.nodes[parent].depth + 1;
        self.nodes.push(TreeNode {
            state,
            depth,
            action: Some(action),
            edge_reward,
            visits: 0,
            total_return: 0.0,
            parent: Some(parent),
            children: Vec::new(),
            untried: untried.into(),
        });
        self.nodes[parent].children.push((action, id));
        id
    }

    /// Child maximising `R/N + κ·sqrt(2 ln N_p / N)`; ties go to the lowest
    /// action id.
    ///
    /// # Panics
    ///
    /// If the node has no children or a child has never been visited.
    pub fn best_child(&self, id: NodeId, kappa_mc: f64) -> NodeId {
        let parent = &self.nodes[id];
        let ln_np = (parent.visits as f64).ln();
        let mut best: Option<(NodeId, f64)> = None;
        for &(_, child) in &parent.children {
            let c = &self.nodes[child];
            assert!(c.visits > 0, "best_child called with an unvisited child");
            let g = c.mean_return() + kappa_mc * (2.0 * ln_np / c.visits as f64).sqrt();
            if best.is_none_or(|(_, b)| strictly_better(g, b)) {
                best = Some((child, g));
            }
        }
        best.expect("best_child called on a leaf").0
    }

    /// Propagates `v ← r_edge + γ·v` from `leaf` to the root, starting from the
    /// rollout return, adding `v` to every node's return and one visit to each.
    pub fn backup(&mut self, leaf: NodeId, rollout_return: f64, gamma: f64) {
        let mut v = rollout_return;
        let mut cur = Some(leaf);
        while let Some(id) = cur {
            let node = &mut self.nodes[id];
            if node.parent.is_some() {
                v = node.edge_reward + gamma * v;
                node.total_return += v;
            }
            node.visits += 1;
            cur = node.parent;
        }
    }

    /// Root action with the highest mean return (ties → lowest id).
    pub fn best_root_action(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &(action, child) in &self.nodes[Self::ROOT].children {
            let c = &self.nodes[child];
            if c.visits == 0 {
                continue;
            }
            let m = c.mean_return();
            if best.is_none_or(|(_, b)| strictly_better(m, b)) {
                best = Some((action, m));
            }
        }
        best.map(|(a, _)| a)
    }

    fn expand(
        &mut self,
        id: NodeId,
        ctx: &PlanContext<'_>,
        cfg: &PlannerConfig,
    ) -> Result<Option<NodeId>> {
        let Some(action) = self.nodes[id].untried.pop_front() else {
            return Ok(None);
        };
        let node = &self.nodes[id];
        let end = ctx.actions.end_pose(action.id, &node.state.pose);
        let (state, reward) = hallucinate(&node.state, &action, end, cfg.reward_kind, ctx.reward)?;
        let untried = if node.depth + 1 < cfg.depth_max {
            ctx.feasible(&state)
        } else {
            Vec::new()
        };
        Ok(Some(self.add_child(id, action.id, state, reward, untried)))
    }
}

/// Discounted return of `remaining_depth` uniformly random feasible actions
/// with hallucinated belief updates.
pub fn rollout<R: Rng + ?Sized>(
    state: &FictiveState,
    remaining_depth: usize,
    ctx: &PlanContext<'_>,
    kind: RewardKind,
    gamma: f64,
    rng: &mut R,
) -> Result<f64> {
    let mut total = 0.0;
    let mut discount = 1.0;
    let mut current: Option<FictiveState> = None;
    for _ in 0..remaining_depth {
        let s = current.as_ref().unwrap_or(state);
        let feasible = ctx.feasible(s);
        if feasible.is_empty() {
            return Err(Error::NoFeasibleAction);
        }
        let action = &feasible[rng.random_range(0..feasible.len())];
        let end = ctx.actions.end_pose(action.id, &s.pose);
        let (next, r) = hallucinate(s, action, end, kind, ctx.reward)?;
        total += discount * r;
        discount *= gamma;
        current = Some(next);
    }
    Ok(total)
}

/// Builds the search tree for `cfg.mcts_iterations` iterations.
pub fn mcts_search<R: Rng + ?Sized>(
    state: &FictiveState,
    ctx: &PlanContext<'_>,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> Result<SearchTree> {
    cfg.validate()?;
    let root_actions = ctx.feasible(state);
    if root_actions.is_empty() {
        return Err(Error::NoFeasibleAction);
    }
    let mut tree = SearchTree::new(state.clone(), root_actions);
    for _ in 0..cfg.mcts_iterations {
        let mut v = SearchTree::ROOT;
        loop {
            let node = tree.node(v);
            if node.depth >= cfg.depth_max {
                break;
            }
            if !node.is_fully_expanded() {
                if let Some(child) = tree.expand(v, ctx, cfg)? {
                    v = child;
                }
                break;
            }
            if node.children.is_empty() {
                break;
            }
            v = tree.best_child(v, cfg.kappa_mc);
        }
        let leaf = tree.node(v);
        let remaining = if cfg.rollouts {
            cfg.depth_max - leaf.depth
        } else {
            0
        };
        let r = rollout(&leaf.state, remaining, ctx, cfg.reward_kind, cfg.gamma, rng)?;
        tree.backup(v, r, cfg.gamma);
    }
    Ok(tree)
}

/// Plans one action with MCTS. A single feasible action is returned without
/// searching.
pub fn mcts_plan<R: Rng + ?Sized>(
    state: &FictiveState,
    ctx: &PlanContext<'_>,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> Result<usize> {
    let feasible = ctx.feasible(state);
    match feasible.len() {
        0 => return Err(Error::NoFeasibleAction),
        1 => return Ok(feasible[0].id),
        _ => {}
    }
    mcts_search(state, ctx, cfg, rng)?
        .best_root_action()
        .ok_or(Error::NoFeasibleAction)
}
