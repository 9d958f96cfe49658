//! Reconstruction error of a belief against the ground truth, and
//! accumulated-reward statistics.
//!
//! The `*_values` functions work on plain slices so they can be checked
//! against hand-computed cases; the belief-level wrappers evaluate the
//! surrogate and the terrain on an [`EvalGrid`] first.

use crate::gp_belief::Surrogate;
use crate::pomdp::Workspace;
use crate::sim::{EpisodeLog, Terrain};
use crate::{Error, Point, Result};

/// Variance floor used by [`mnll_values`].
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Row-major lattice covering the workspace bounds inclusively.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalGrid {
    nx: usize,
    ny: usize,
    points: Vec<Point>,
}

impl EvalGrid {
    /// `nx × ny` lattice; a single point along an axis sits at the center.
    pub fn new(ws: &Workspace, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter("evaluation grid must be non-empty".into()));
        }
        let coord = |lo: f64, hi: f64, n: usize, i: usize| {
            if n == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        let mut points = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let y = coord(ws.y_min, ws.y_max, ny, j);
            for i in 0..nx {
                points.push([coord(ws.x_min, ws.x_max, nx, i), y]);
            }
        }
        Ok(EvalGrid { nx, ny, points })
    }

    pub fn default_for(ws: &Workspace) -> Self {
        Self::new(ws, 50, 50).expect("50x50 grid is non-empty")
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }
}

pub fn rmse_values(mu: &[f64], f: &[f64]) -> f64 {
    assert_eq!(mu.len(), f.len());
    let sse: f64 = mu.iter().zip(f).map(|(m, t)| (m - t) * (m - t)).sum();
    (sse / mu.len() as f64).sqrt()
}

/// Per-point weights `‖(∇f − min∇f) / (max∇f − min∇f)‖₂` with min and max
/// taken per component over all points; zero-range components contribute 0.
pub fn gradient_weights(grad: &[[f64; 2]]) -> Vec<f64> {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for g in grad {
        for c in 0..2 {
            lo[c] = lo[c].min(g[c]);
            hi[c] = hi[c].max(g[c]);
        }
    }
    grad.iter()
        .map(|g| {
            let mut n = [0.0; 2];
            for c in 0..2 {
                let range = hi[c] - lo[c];
                if range > 0.0 {
                    n[c] = (g[c] - lo[c]) / range;
                }
            }
            n[0].hypot(n[1])
        })
        .collect()
}

pub fn wrmse_values(mu: &[f64], f: &[f64], grad: &[[f64; 2]]) -> f64 {
    assert_eq!(mu.len(), f.len());
    assert_eq!(mu.len(), grad.len());
    let w = gradient_weights(grad);
    let s: f64 = mu
        .iter()
        .zip(f)
        .zip(&w)
        .map(|((m, t), w)| (m - t) * (m - t) * w)
        .sum();
    (s / mu.len() as f64).sqrt()
}

/// Mean Gaussian negative log likelihood of the truth, `var` being the
/// predictive variance (floored at [`VARIANCE_FLOOR`]).
pub fn mnll_values(mu: &[f64], var: &[f64], f: &[f64]) -> f64 {
    assert_eq!(mu.len(), f.len());
    assert_eq!(mu.len(), var.len());
    let tau = std::f64::consts::TAU;
    let s: f64 = mu
        .iter()
        .zip(var)
        .zip(f)
        .map(|((m, v), t)| {
            let v = v.max(VARIANCE_FLOOR);
            0.5 * (tau * v).ln() + (m - t) * (m - t) / (2.0 * v)
        })
        .sum();
    s / mu.len() as f64
}

/// The three reconstruction metrics of one belief.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ErrorMetrics {
    pub rmse: f64,
    pub wrmse: f64,
    pub mnll: f64,
}

fn truth(terrain: &Terrain, grid: &EvalGrid) -> Result<Vec<f64>> {
    grid.points.iter().map(|&p| terrain.eval(p)).collect()
}

pub fn rmse(belief: &impl Surrogate, terrain: &Terrain, grid: &EvalGrid) -> Result<f64> {
    let mu: Vec<f64> = grid.points.iter().map(|&p| belief.mean(p)).collect();
    Ok(rmse_values(&mu, &truth(terrain, grid)?))
}

pub fn wrmse(belief: &impl Surrogate, terrain: &Terrain, grid: &EvalGrid) -> Result<f64> {
    let mu: Vec<f64> = grid.points.iter().map(|&p| belief.mean(p)).collect();
    let grad = grid
        .points
        .iter()
        .map(|&p| terrain.gradient(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(wrmse_values(&mu, &truth(terrain, grid)?, &grad))
}

pub fn mnll(belief: &impl Surrogate, terrain: &Terrain, grid: &EvalGrid) -> Result<f64> {
    let mu: Vec<f64> = grid.points.iter().map(|&p| belief.mean(p)).collect();
    let var: Vec<f64> = grid.points.iter().map(|&p| belief.variance(p)).collect();
    Ok(mnll_values(&mu, &var, &truth(terrain, grid)?))
}

/// All three metrics with a single pass over the grid.
pub fn evaluate(belief: &impl Surrogate, terrain: &Terrain, grid: &EvalGrid) -> Result<ErrorMetrics> {
    let n = grid.points.len();
    let mut mu = Vec::with_capacity(n);
    let mut var = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    let mut grad = Vec::with_capacity(n);
    for &p in &grid.points {
        mu.push(belief.mean(p));
        var.push(belief.variance(p));
        f.push(terrain.eval(p)?);
        grad.push(terrain.gradient(p)?);
    }
    Ok(ErrorMetrics {
        rmse: rmse_values(&mu, &f),
        wrmse: wrmse_values(&mu, &f, &grad),
        mnll: mnll_values(&mu, &var, &f),
    })
}

/// Per-step mean and (population) standard deviation of a set of equally
/// long series.
pub fn series_stats(series: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let Some(first) = series.first() else {
        return Ok((Vec::new(), Vec::new()));
    };
    let len = first.len();
    if let Some(bad) = series.iter().find(|s| s.len() != len) {
        return Err(Error::LengthMismatch {
            expected: len,
            found: bad.len(),
        });
    }
    let n = series.len() as f64;
    let mut mean = vec![0.0; len];
    let mut std = vec![0.0; len];
    for t in 0..len {
        let m = series.iter().map(|s| s[t]).sum::<f64>() / n;
        let v = series.iter().map(|s| (s[t] - m) * (s[t] - m)).sum::<f64>() / n;
        mean[t] = m;
        std[t] = v.sqrt();
    }
    Ok((mean, std))
}

/// Per-step mean and std of the cumulative reward across episodes.
pub fn accumulated_reward_series(logs: &[EpisodeLog]) -> Result<(Vec<f64>, Vec<f64>)> {
    let series: Vec<Vec<f64>> = logs.iter().map(|l| l.cumulative_rewards()).collect();
    series_stats(&series)
}

/// Population mean and std of a sample.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, v.sqrt())
}
