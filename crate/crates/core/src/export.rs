//! CSV and JSON artifacts of experiment runs.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! re-run with the same seed reproduces every file byte for byte.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::gp_belief::BeliefGp;
use crate::metrics::EvalGrid;
use crate::sim::{EpisodeLog, TrialSummary, TrialsOutcome};
use crate::{Error, Result};

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

/// `step,x,y,heading,action_id,immediate_reward,cumulative_reward`, the pose
/// being the one at the start of the step.
pub fn write_episode_csv(path: &Path, log: &EpisodeLog) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "step",
        "x",
        "y",
        "heading",
        "action_id",
        "immediate_reward",
        "cumulative_reward",
    ])?;
    for r in &log.records {
        w.write_record([
            r.step.to_string(),
            r.pose.x.to_string(),
            r.pose.y.to_string(),
            r.pose.heading.to_string(),
            r.action_id.to_string(),
            r.reward.to_string(),
            r.cumulative.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `step,action_id,u_fraction,x,y`, one row per sample point.
pub fn write_trajectory_csv(path: &Path, log: &EpisodeLog) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["step", "action_id", "u_fraction", "x", "y"])?;
    for r in &log.records {
        for (u, p) in r.fractions.iter().zip(&r.samples) {
            w.write_record([
                r.step.to_string(),
                r.action_id.to_string(),
                u.to_string(),
                p[0].to_string(),
                p[1].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `step,sample,x,y,observation`.
pub fn write_observations_csv(path: &Path, log: &EpisodeLog) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["step", "sample", "x", "y", "observation"])?;
    for r in &log.records {
        for (k, (p, o)) in r.samples.iter().zip(&r.observations).enumerate() {
            w.write_record([
                r.step.to_string(),
                k.to_string(),
                p[0].to_string(),
                p[1].to_string(),
                o.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `x,y,mu,sigma` over the grid in row-major order.
pub fn write_belief_csv(path: &Path, belief: &BeliefGp, grid: &EvalGrid) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["x", "y", "mu", "sigma"])?;
    for &p in grid.points() {
        let (mu, var) = belief.predict(p);
        w.write_record([
            p[0].to_string(),
            p[1].to_string(),
            mu.to_string(),
            var.sqrt().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes `episode_<i>.csv`, `trajectory_<i>.csv`, `observations_<i>.csv`,
/// `belief_<i>.csv` per trial and `summary.json` into `dir`.
pub fn write_trials(dir: &Path, outcome: &TrialsOutcome, grid: &EvalGrid) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, t) in outcome.trials.iter().enumerate() {
        write_episode_csv(&dir.join(format!("episode_{i}.csv")), &t.log)?;
        write_trajectory_csv(&dir.join(format!("trajectory_{i}.csv")), &t.log)?;
        write_observations_csv(&dir.join(format!("observations_{i}.csv")), &t.log)?;
        write_belief_csv(&dir.join(format!("belief_{i}.csv")), &t.log.belief, grid)?;
    }
    write_json(&dir.join("summary.json"), &outcome.summary)
}

/// `step,<planner>...` holding the per-step mean cumulative reward of each
/// planner.
pub fn write_comparison_csv(path: &Path, outcomes: &[TrialsOutcome]) -> Result<()> {
    let steps = outcomes.first().map_or(0, |o| o.reward_mean.len());
    if let Some(bad) = outcomes.iter().find(|o| o.reward_mean.len() != steps) {
        return Err(Error::LengthMismatch {
            expected: steps,
            found: bad.reward_mean.len(),
        });
    }
    let mut w = writer(path)?;
    let mut header = vec!["step".to_string()];
    header.extend(outcomes.iter().map(|o| o.summary.planner.clone()));
    w.write_record(&header)?;
    for t in 0..steps {
        let mut row = vec![t.to_string()];
        row.extend(outcomes.iter().map(|o| o.reward_mean[t].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per planner with the reconstruction metrics and final reward.
pub fn write_comparison_summary(path: &Path, summaries: &[TrialSummary]) -> Result<()> {
    let mut w = writer(path)?;
    for s in summaries {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}
