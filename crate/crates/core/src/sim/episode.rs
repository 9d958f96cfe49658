//! The outer sense-plan-act loop and batches of seeded episodes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{SensorModel, Terrain};
use crate::config::ExperimentConfig;
use crate::gp_belief::{BeliefGp, KernelSpec};
use crate::metrics::{self, ErrorMetrics};
use crate::planners::{plan, PlanContext, PlannerConfig, PlannerKind};
use crate::pomdp::{FictiveState, Workspace};
use crate::reward::{RewardConfig, RewardKind};
use crate::trajectory::{ActionSet, Pose, SplineParams};
use crate::{Error, Point, Result};

const SENSOR_STREAM: u64 = 1;
const PLANNER_STREAM: u64 = 2;

/// Everything that stays fixed over an episode.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub terrain: Terrain,
    pub sensor: SensorModel,
    pub kernel: KernelSpec,
    pub planner: PlannerKind,
    pub planner_cfg: PlannerConfig,
    pub reward: RewardConfig,
    pub actions: ActionSet,
    pub workspace: Workspace,
    pub start: Pose,
}

impl Scenario {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Scenario {
            terrain: cfg.terrain.clone(),
            sensor: cfg.sensor_model()?,
            kernel: cfg.kernel_spec()?,
            planner: cfg.planner.kind,
            planner_cfg: cfg.planner_config(),
            reward: cfg.reward,
            actions: cfg.action_set()?,
            workspace: cfg.workspace,
            start: cfg.start_pose(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// Pose at the start of the step.
    pub pose: Pose,
    pub end_pose: Pose,
    pub action_id: usize,
    pub params: SplineParams,
    /// Spline parameters `u` of the sample points.
    pub fractions: Vec<f64>,
    pub samples: Vec<Point>,
    pub observations: Vec<f64>,
    /// Gradient-UCB value of the executed trajectory on the belief held
    /// before its observations were added.
    pub reward: f64,
    pub cumulative: f64,
}

#[derive(Clone, Debug)]
pub struct EpisodeLog {
    pub planner: PlannerKind,
    pub seed: u64,
    pub records: Vec<StepRecord>,
    pub belief: BeliefGp,
}

impl EpisodeLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn cumulative_rewards(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.cumulative).collect()
    }

    pub fn final_cumulative_reward(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cumulative)
    }
}

/// An episode that stopped early; `partial` holds the steps completed so far
/// (`None` if it failed before the first step).
#[derive(Debug, Clone)]
pub struct EpisodeError {
    pub partial: Option<Box<EpisodeLog>>,
    pub source: Error,
}

impl std::fmt::Display for EpisodeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "episode aborted after {} steps: {}",
            self.partial.as_ref().map_or(0, |p| p.len()),
            self.source
        )
    }
}

impl std::error::Error for EpisodeError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

impl From<EpisodeError> for Error {
    fn from(e: EpisodeError) -> Self {
        e.source
    }
}

/// Seed of trial `trial` derived from `base` (splitmix64 finaliser).
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    let mut z = base.wrapping_add((trial as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generators for sensor noise and planner randomness. Keeping
/// them apart means two planners run with the same seed see the same noise
/// sequence.
fn streams(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut sensor = ChaCha8Rng::seed_from_u64(seed);
    sensor.set_stream(SENSOR_STREAM);
    let mut planner = ChaCha8Rng::seed_from_u64(seed);
    planner.set_stream(PLANNER_STREAM);
    (sensor, planner)
}

/// Runs `steps` plan/execute/sense/update iterations from an empty belief.
pub fn run_episode(scenario: &Scenario, steps: usize, seed: u64) -> Result<EpisodeLog, EpisodeError> {
    let fail = |partial: Option<EpisodeLog>, source| EpisodeError {
        partial: partial.map(Box::new),
        source,
    };
    if steps == 0 {
        return Err(fail(
            None,
            Error::InvalidParameter("episode needs at least one step".into()),
        ));
    }
    let belief = BeliefGp::new(scenario.kernel).map_err(|e| fail(None, e))?;
    let mut log = EpisodeLog {
        planner: scenario.planner,
        seed,
        records: Vec::with_capacity(steps),
        belief,
    };
    let (mut sensor_rng, mut planner_rng) = streams(seed);
    let ctx = PlanContext {
        actions: &scenario.actions,
        workspace: &scenario.workspace,
        reward: &scenario.reward,
    };
    let mut pose = scenario.start;
    let mut cumulative = 0.0;
    for step in 0..steps {
        let result = (|| -> Result<StepRecord> {
            let state = FictiveState {
                belief: log.belief.clone(),
                pose,
            };
            let id = plan(scenario.planner, &state, &ctx, &scenario.planner_cfg, &mut planner_rng)?;
            let action = scenario.actions.place(id, &pose);
            let reward = RewardKind::GradientUcb.reward(&log.belief, &action, &scenario.reward);
            let observations = action
                .samples
                .iter()
                .map(|&p| scenario.sensor.sense(&scenario.terrain, p, &mut sensor_rng))
                .collect::<Result<Vec<_>>>()?;
            for (&p, &o) in action.samples.iter().zip(&observations) {
                log.belief.push(p, o)?;
            }
            Ok(StepRecord {
                step,
                pose,
                end_pose: scenario.actions.end_pose(id, &pose),
                action_id: id,
                fractions: action.params.sample_params(action.samples.len()),
                params: action.params,
                samples: action.samples,
                observations,
                reward,
                cumulative: cumulative + reward,
            })
        })();
        match result {
            Ok(record) => {
                pose = record.end_pose;
                cumulative = record.cumulative;
                log.records.push(record);
            }
            Err(source) => return Err(fail(Some(log), source)),
        }
    }
    Ok(log)
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub log: EpisodeLog,
    pub metrics: ErrorMetrics,
}

/// The aggregate written to `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialSummary {
    pub planner: String,
    pub trials: usize,
    pub rmse_mean: f64,
    pub rmse_std: f64,
    pub wrmse_mean: f64,
    pub wrmse_std: f64,
    pub mnll_mean: f64,
    pub mnll_std: f64,
    pub final_cumulative_reward_mean: f64,
}

#[derive(Clone, Debug)]
pub struct TrialsOutcome {
    pub trials: Vec<TrialResult>,
    pub summary: TrialSummary,
    /// Per-step mean of the cumulative reward.
    pub reward_mean: Vec<f64>,
    /// Per-step population std of the cumulative reward.
    pub reward_std: Vec<f64>,
}

/// Aggregates finished trials.
pub fn summarize(planner: PlannerKind, trials: Vec<TrialResult>) -> Result<TrialsOutcome> {
    let pick = |f: fn(&ErrorMetrics) -> f64| trials.iter().map(|t| f(&t.metrics)).collect::<Vec<_>>();
    let (rmse_mean, rmse_std) = metrics::mean_std(&pick(|m| m.rmse));
    let (wrmse_mean, wrmse_std) = metrics::mean_std(&pick(|m| m.wrmse));
    let (mnll_mean, mnll_std) = metrics::mean_std(&pick(|m| m.mnll));
    let logs: Vec<EpisodeLog> = trials.iter().map(|t| t.log.clone()).collect();
    let (reward_mean, reward_std) = metrics::accumulated_reward_series(&logs)?;
    let summary = TrialSummary {
        planner: planner.name().to_string(),
        trials: trials.len(),
        rmse_mean,
        rmse_std,
        wrmse_mean,
        wrmse_std,
        mnll_mean,
        mnll_std,
        final_cumulative_reward_mean: reward_mean.last().copied().unwrap_or(0.0),
    };
    Ok(TrialsOutcome {
        trials,
        summary,
        reward_mean,
        reward_std,
    })
}

/// Runs `n_trials` episodes of the configured planner, trial `i` seeded with
/// [`trial_seed`]`(base_seed, i)`. Trials run on the current rayon pool; the
/// result order (and content) does not depend on the pool size.
pub fn run_trials(cfg: &ExperimentConfig, n_trials: usize, base_seed: u64) -> Result<TrialsOutcome> {
    if n_trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    let scenario = Scenario::from_config(cfg)?;
    let grid = cfg.eval_grid()?;
    let steps = cfg.episode.steps;
    let results: Vec<Result<TrialResult>> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let log = run_episode(&scenario, steps, trial_seed(base_seed, i))?;
            let metrics = metrics::evaluate(&log.belief, &scenario.terrain, &grid)?;
            Ok(TrialResult { log, metrics })
        })
        .collect();
    let trials = results.into_iter().collect::<Result<Vec<_>>>()?;
    summarize(scenario.planner, trials)
}
