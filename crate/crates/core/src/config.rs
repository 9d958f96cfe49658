//! JSON experiment description.
//!
//! ```json
//! {
//!   "workspace": {"x_min": 0, "x_max": 10, "y_min": 0, "y_max": 10},
//!   "terrain": {"kind": "hilly", "amplitude": 10, "period": 5},
//!   "sensor": {"noise_std": 0.2},
//!   "gp": {"kernel": "rbf", "lengthscale": 1.0, "signal_variance": 25.0},
//!   "reward": {"kappa": 5.0, "num_samples": 8},
//!   "planner": {"kind": "bo-pomdp", "depth_max": 3, "mcts_iterations": 100},
//!   "episode": {"steps": 50, "trials": 10, "trajectory_length": 1.0},
//!   "output_dir": "out",
//!   "base_seed": 1
//! }
//! ```
//!
//! `workspace`, `terrain` and `gp` are required; everything else has defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::gp_belief::{KernelKind, KernelSpec};
use crate::metrics::EvalGrid;
use crate::planners::{PlannerConfig, PlannerKind};
use crate::pomdp::Workspace;
use crate::reward::RewardConfig;
use crate::sim::{SensorModel, Terrain};
use crate::trajectory::{action_templates, ActionSet, Pose, DEFAULT_OFFSETS_DEG};
use crate::{Error, Result};

/// Fraction of the terrain's value range used as noise std when unset.
pub const DEFAULT_NOISE_FRACTION: f64 = 0.02;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    /// `None` means 2% of the terrain value range over the workspace.
    pub noise_std: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpConfig {
    pub kernel: KernelKind,
    pub lengthscale: f64,
    pub signal_variance: f64,
    /// `None` means the squared sensor noise.
    #[serde(default)]
    pub noise_variance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSection {
    pub kind: PlannerKind,
    pub depth_max: usize,
    pub mcts_iterations: usize,
    pub kappa_mc: f64,
    pub gamma: f64,
    pub action_offsets_deg: Vec<f64>,
    pub curvature_shape: f64,
    pub rollouts: bool,
}

impl Default for PlannerSection {
    fn default() -> Self {
        let p = PlannerConfig::default();
        PlannerSection {
            kind: PlannerKind::BoPomdp,
            depth_max: p.depth_max,
            mcts_iterations: p.mcts_iterations,
            kappa_mc: p.kappa_mc,
            gamma: p.gamma,
            action_offsets_deg: DEFAULT_OFFSETS_DEG.to_vec(),
            curvature_shape: 1.0,
            rollouts: p.rollouts,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    pub steps: usize,
    pub trials: usize,
    pub trajectory_length: f64,
    /// `None` means the workspace center with heading 0.
    pub start: Option<Pose>,
    /// Evaluation lattice `[nx, ny]` for the error metrics.
    pub eval_grid: [usize; 2],
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            steps: 50,
            trials: 1,
            trajectory_length: 1.0,
            start: None,
            eval_grid: [50, 50],
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub workspace: Workspace,
    pub terrain: Terrain,
    #[serde(default)]
    pub sensor: SensorConfig,
    pub gp: GpConfig,
    #[serde(default)]
    pub reward: RewardConfig,
    #[serde(default)]
    pub planner: PlannerSection,
    #[serde(default)]
    pub episode: EpisodeConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub base_seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.workspace.validate()?;
        self.terrain.validate()?;
        self.reward.validate()?;
        self.planner_config().validate()?;
        if self.episode.steps == 0 {
            return Err(Error::Config("episode.steps must be >= 1".into()));
        }
        if self.episode.trials == 0 {
            return Err(Error::Config("episode.trials must be >= 1".into()));
        }
        if !(self.episode.trajectory_length > 0.0 && self.episode.trajectory_length.is_finite()) {
            return Err(Error::Config("episode.trajectory_length must be positive".into()));
        }
        if self.episode.eval_grid.contains(&0) {
            return Err(Error::Config("episode.eval_grid entries must be >= 1".into()));
        }
        if let Some(s) = self.sensor.noise_std {
            SensorModel::new(s)?;
        }
        if let Some(start) = self.episode.start {
            if !self.workspace.contains(start.position()) {
                return Err(Error::Config("episode.start lies outside the workspace".into()));
            }
        }
        self.kernel_spec()?;
        self.action_set()?;
        Ok(())
    }

    pub fn sensor_model(&self) -> Result<SensorModel> {
        match self.sensor.noise_std {
            Some(s) => SensorModel::new(s),
            None => SensorModel::new(DEFAULT_NOISE_FRACTION * self.terrain.value_range(&self.workspace)?),
        }
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        let noise = match self.gp.noise_variance {
            Some(v) => v,
            None => self.sensor_model()?.noise_std.powi(2),
        };
        KernelSpec::new(self.gp.kernel, self.gp.lengthscale, self.gp.signal_variance, noise)
    }

    pub fn planner_config(&self) -> PlannerConfig {
        PlannerConfig {
            depth_max: self.planner.depth_max,
            mcts_iterations: self.planner.mcts_iterations,
            kappa_mc: self.planner.kappa_mc,
            gamma: self.planner.gamma,
            reward_kind: self.planner.kind.reward_kind(),
            rollouts: self.planner.rollouts,
        }
    }

    pub fn action_set(&self) -> Result<ActionSet> {
        let templates =
            action_templates(&self.planner.action_offsets_deg, self.planner.curvature_shape)?;
        ActionSet::new(templates, self.episode.trajectory_length, self.reward.num_samples)
    }

    pub fn start_pose(&self) -> Pose {
        self.episode.start.unwrap_or_else(|| {
            let c = self.workspace.center();
            Pose::new(c[0], c[1], 0.0)
        })
    }

    pub fn eval_grid(&self) -> Result<EvalGrid> {
        let [nx, ny] = self.episode.eval_grid;
        EvalGrid::new(&self.workspace, nx, ny)
    }

    /// Copy with every defaulted quantity made explicit.
    pub fn resolved(&self) -> Result<Self> {
        let mut out = self.clone();
        let sensor = self.sensor_model()?;
        out.sensor.noise_std = Some(sensor.noise_std);
        out.gp.noise_variance = Some(self.kernel_spec()?.noise_variance);
        out.episode.start = Some(self.start_pose());
        Ok(out)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(Error::from)
    }
}
