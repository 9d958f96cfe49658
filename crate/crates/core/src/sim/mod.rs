//! Ground truth, sensing and the episode loop.

mod episode;
mod terrain;

pub use episode::{
    run_episode, run_trials, summarize, trial_seed, EpisodeError, EpisodeLog, Scenario,
    StepRecord, TrialResult, TrialSummary, TrialsOutcome,
};
pub use terrain::{Bump, SensorModel, Terrain};
