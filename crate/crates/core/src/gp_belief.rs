//! Gaussian-process belief over the monitored scalar field.
//!
//! The belief keeps a lower-triangular Cholesky factor of `K + (σ_n² + jitter)·I`
//! stored row by row. Adding an observation only appends a row, so the rows are
//! shared (`Arc`) between a belief and every belief derived from it. That makes
//! cloning cheap, which the planner relies on when it branches fictive states.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::{Error, Point, Result};

/// First non-zero jitter level; factorization is attempted jitter-free first.
const FIRST_JITTER: f64 = 1e-8;
const MAX_JITTER: f64 = 1e-4;
/// Pivots below this fraction of the prior variance count as failures.
const MIN_PIVOT: f64 = 1e-12;
const REFACTOR_EVERY: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
    /// Matérn with ν = 5/2.
    Matern52,
    Exponential,
}

/// Stationary covariance function with fixed hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub lengthscale: f64,
    pub signal_variance: f64,
    #[serde(default)]
    pub noise_variance: f64,
}

impl KernelSpec {
    pub fn new(
        kind: KernelKind,
        lengthscale: f64,
        signal_variance: f64,
        noise_variance: f64,
    ) -> Result<Self> {
        let spec = KernelSpec {
            kind,
            lengthscale,
            signal_variance,
            noise_variance,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lengthscale > 0.0 && self.lengthscale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kernel lengthscale must be positive, got {}",
                self.lengthscale
            )));
        }
        if !(self.signal_variance > 0.0 && self.signal_variance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kernel signal_variance must be positive, got {}",
                self.signal_variance
            )));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kernel noise_variance must be non-negative, got {}",
                self.noise_variance
            )));
        }
        Ok(())
    }

    /// Covariance `k(a, b)`.
    pub fn eval(&self, a: Point, b: Point) -> f64 {
        let dx = a[0] - b[0];
        let dy = a[1] - b[1];
        let sq = dx * dx + dy * dy;
        let ell = self.lengthscale;
        match self.kind {
            KernelKind::Rbf => self.signal_variance * (-0.5 * sq / (ell * ell)).exp(),
            KernelKind::Matern52 => {
                let s = 5f64.sqrt() * sq.sqrt() / ell;
                self.signal_variance * (1.0 + s + s * s / 3.0) * (-s).exp()
            }
            KernelKind::Exponential => self.signal_variance * (-sq.sqrt() / ell).exp(),
        }
    }

    /// Gradient of `k(a, b)` with respect to `a`, for the differentiable kernels.
    pub fn grad(&self, a: Point, b: Point) -> Option<[f64; 2]> {
        let dx = a[0] - b[0];
        let dy = a[1] - b[1];
        let ell = self.lengthscale;
        let scale = match self.kind {
            KernelKind::Rbf => {
                let sq = dx * dx + dy * dy;
                -self.signal_variance * (-0.5 * sq / (ell * ell)).exp() / (ell * ell)
            }
            KernelKind::Matern52 => {
                let s = 5f64.sqrt() * (dx * dx + dy * dy).sqrt() / ell;
                -self.signal_variance * 5.0 / (3.0 * ell * ell) * (1.0 + s) * (-s).exp()
            }
            KernelKind::Exponential => return None,
        };
        Some([scale * dx, scale * dy])
    }
}

/// Anything that can produce a pointwise Gaussian prediction of the field.
pub trait Surrogate {
    fn mean(&self, x: Point) -> f64;
    /// Predictive variance of the latent field (observation noise excluded).
    fn variance(&self, x: Point) -> f64;
}

/// GP posterior with zero prior mean.
#[derive(Clone, Debug)]
pub struct BeliefGp {
    kernel: KernelSpec,
    inputs: Vec<Point>,
    targets: Vec<f64>,
    /// Row `i` holds `L[i][0..=i]`.
    chol: Vec<Arc<[f64]>>,
    /// `L⁻¹ y`; append-only like the factor itself.
    whitened: Vec<f64>,
    jitter: f64,
    since_refactor: usize,
    /// `K⁻¹ y`, computed on first use.
    alpha: OnceLock<Vec<f64>>,
}

impl BeliefGp {
    pub fn new(kernel: KernelSpec) -> Result<Self> {
        kernel.validate()?;
        Ok(BeliefGp {
            kernel,
            inputs: Vec::new(),
            targets: Vec::new(),
            chol: Vec::new(),
            whitened: Vec::new(),
            jitter: 0.0,
            since_refactor: 0,
            alpha: OnceLock::new(),
        })
    }

    /// Builds a belief from a full data set with a single factorization.
    pub fn from_data(kernel: KernelSpec, inputs: &[Point], targets: &[f64]) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::LengthMismatch {
                expected: inputs.len(),
                found: targets.len(),
            });
        }
        let mut belief = BeliefGp::new(kernel)?;
        belief.inputs = inputs.to_vec();
        belief.targets = targets.to_vec();
        belief.refactor_escalating()?;
        Ok(belief)
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Point] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Row `i` of the Cholesky factor (`i + 1` entries).
    pub fn chol_row(&self, i: usize) -> &[f64] {
        &self.chol[i]
    }

    /// Returns a new belief with `{x, o}` added; `self` is left untouched.
    pub fn update(&self, x: Point, o: f64) -> Result<Self> {
        let mut next = self.clone();
        next.push(x, o)?;
        Ok(next)
    }

    /// In-place variant of [`BeliefGp::update`].
    pub fn push(&mut self, x: Point, o: f64) -> Result<()> {
        self.alpha = OnceLock::new();
        self.inputs.push(x);
        self.targets.push(o);
        self.since_refactor += 1;

        if self.since_refactor >= REFACTOR_EVERY {
            return self.refactor_escalating();
        }
        let n = self.inputs.len() - 1;
        match self.extension(n) {
            Some((row, w)) => {
                self.chol.push(row);
                self.whitened.push(w);
                Ok(())
            }
            None => {
                self.escalate_jitter()?;
                self.refactor_escalating()
            }
        }
    }

    fn noise_and_jitter(&self) -> f64 {
        self.kernel.noise_variance + self.jitter
    }

    /// Computes factor row `i` from rows `0..i`, or `None` when the pivot is
    /// not positive.
    fn extension(&self, i: usize) -> Option<(Arc<[f64]>, f64)> {
        let x = self.inputs[i];
        let k: Vec<f64> = self.inputs[..i]
            .iter()
            .map(|&xi| self.kernel.eval(xi, x))
            .collect();
        let mut row = self.forward_solve(&k);
        let diag = self.kernel.eval(x, x) + self.noise_and_jitter();
        let pivot = diag - dot(&row, &row);
        if !(pivot > MIN_PIVOT * diag && pivot.is_finite()) {
            return None;
        }
        let d = pivot.sqrt();
        let w = (self.targets[i] - dot(&row, &self.whitened[..i])) / d;
        row.push(d);
        Some((row.into(), w))
    }

    /// Rebuilds the whole factor, doubling the jitter until it succeeds.
    fn refactor_escalating(&mut self) -> Result<()> {
        loop {
            if self.try_refactor() {
                self.since_refactor = 0;
                self.alpha = OnceLock::new();
                return Ok(());
            }
            self.escalate_jitter()?;
        }
    }

    fn escalate_jitter(&mut self) -> Result<()> {
        self.jitter = if self.jitter == 0.0 {
            FIRST_JITTER
        } else {
            2.0 * self.jitter
        };
        if self.jitter > MAX_JITTER {
            return Err(Error::FactorizationFailure {
                jitter: self.jitter,
            });
        }
        Ok(())
    }

    fn try_refactor(&mut self) -> bool {
        self.chol.clear();
        self.whitened.clear();
        for i in 0..self.inputs.len() {
            match self.extension(i) {
                Some((row, w)) => {
                    self.chol.push(row);
                    self.whitened.push(w);
                }
                None => return false,
            }
        }
        true
    }

    /// Solves `L v = k` over the current factor (`k.len()` leading rows).
    fn forward_solve(&self, k: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(k.len() + 1);
        for (i, &ki) in k.iter().enumerate() {
            let row = &self.chol[i];
            let vi = (ki - dot(&row[..i], &v)) / row[i];
            v.push(vi);
        }
        v
    }

    fn alpha(&self) -> &[f64] {
        self.alpha.get_or_init(|| {
            let mut a = self.whitened.clone();
            for i in (0..a.len()).rev() {
                let row = &self.chol[i];
                a[i] /= row[i];
                let ai = a[i];
                for (aj, lij) in a[..i].iter_mut().zip(&row[..i]) {
                    *aj -= lij * ai;
                }
            }
            a
        })
    }

    fn cross_covariance(&self, x: Point) -> Vec<f64> {
        self.inputs.iter().map(|&xi| self.kernel.eval(xi, x)).collect()
    }

    pub fn posterior_mean(&self, x: Point) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        dot(&self.cross_covariance(x), self.alpha())
    }

    /// Predictive variance of the latent field, clamped at zero.
    pub fn posterior_var(&self, x: Point) -> f64 {
        let prior = self.kernel.eval(x, x);
        if self.is_empty() {
            return prior;
        }
        let v = self.forward_solve(&self.cross_covariance(x));
        (prior - dot(&v, &v)).max(0.0)
    }

    pub fn posterior_std(&self, x: Point) -> f64 {
        self.posterior_var(x).sqrt()
    }

    /// Mean and variance from a single cross-covariance evaluation.
    pub fn predict(&self, x: Point) -> (f64, f64) {
        let prior = self.kernel.eval(x, x);
        if self.is_empty() {
            return (0.0, prior);
        }
        let k = self.cross_covariance(x);
        let v = self.forward_solve(&k);
        let mean = dot(&v, &self.whitened);
        (mean, (prior - dot(&v, &v)).max(0.0))
    }

    /// Gradient of the posterior mean. Analytic for RBF and Matérn 5/2; the
    /// exponential kernel falls back to central differences with step `1e-5·ℓ`.
    pub fn mean_gradient(&self, x: Point) -> [f64; 2] {
        if self.is_empty() {
            return [0.0, 0.0];
        }
        if self.kernel.kind == KernelKind::Exponential {
            let h = 1e-5 * self.kernel.lengthscale;
            let gx = (self.posterior_mean([x[0] + h, x[1]])
                - self.posterior_mean([x[0] - h, x[1]]))
                / (2.0 * h);
            let gy = (self.posterior_mean([x[0], x[1] + h])
                - self.posterior_mean([x[0], x[1] - h]))
                / (2.0 * h);
            return [gx, gy];
        }
        let alpha = self.alpha();
        let mut g = [0.0, 0.0];
        for (&xi, &ai) in self.inputs.iter().zip(alpha) {
            // differentiable kinds always return Some
            let dk = self.kernel.grad(x, xi).unwrap_or([0.0, 0.0]);
            g[0] += dk[0] * ai;
            g[1] += dk[1] * ai;
        }
        g
    }
}

impl Surrogate for BeliefGp {
    fn mean(&self, x: Point) -> f64 {
        self.posterior_mean(x)
    }

    fn variance(&self, x: Point) -> f64 {
        self.posterior_var(x)
    }
}

/// Dot product with four independent accumulators so the loop vectorises.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..n {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
