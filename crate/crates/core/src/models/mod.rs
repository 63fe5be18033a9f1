//! Simulators, spectral tail process samplers and moment equations for the
//! vector autoregression, the Kesten recursion and GARCH(1,1).

mod acf;
mod chain;
mod drift;
mod garch;
mod kesten;
mod var1;

use serde::{Deserialize, Serialize};

pub use acf::acf_functional_path;
pub use chain::Chain;
pub use drift::{drift_margin, horizon_for_tolerance, lyapunov_value, DriftReport};
pub use garch::{Garch11Spec, GarchNoise, GarchTailSampler};
pub use kesten::{pilot_stream, KestenLaw, KestenSpec, KestenTailSampler, PilotConfig, ScalarLaw};
pub use var1::{Innovation, MatrixLaw, ThetaZeroTable, Var1Spec, Var1TailSampler};

use crate::error::{Error, Result};
use crate::randkit::RngStream;

/// An `n x d` sample path stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathMatrix {
    pub values: Vec<f64>,
    pub rows: usize,
    pub dim: usize,
    pub burn_in_used: usize,
    pub stream_id: u64,
}

impl PathMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(1, |r| r.len());
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::param("ragged rows"));
        }
        Ok(PathMatrix {
            values: rows.iter().flatten().copied().collect(),
            rows: rows.len(),
            dim,
            burn_in_used: 0,
            stream_id: 0,
        })
    }

    pub fn from_column(values: Vec<f64>) -> Self {
        PathMatrix {
            rows: values.len(),
            values,
            dim: 1,
            burn_in_used: 0,
            stream_id: 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.values[i * self.dim + j]).collect()
    }

    pub fn norms(&self) -> Vec<f64> {
        (0..self.rows).map(|i| norm(self.row(i))).collect()
    }

    /// Column sums accumulated in row order.
    pub fn sum(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.dim];
        for i in 0..self.rows {
            for (acc, v) in s.iter_mut().zip(self.row(i)) {
                *acc += v;
            }
        }
        s
    }
}

/// One realization `(Theta_0, ..., Theta_T)` of the spectral tail process together with
/// an independent unit Pareto radius `|Y_0|`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailProcessPath {
    pub theta: Vec<f64>,
    pub dim: usize,
    pub pareto_radius: f64,
}

impl TailProcessPath {
    pub fn horizon(&self) -> usize {
        self.theta.len() / self.dim - 1
    }

    #[inline]
    pub fn row(&self, t: usize) -> &[f64] {
        &self.theta[t * self.dim..(t + 1) * self.dim]
    }

    /// `theta' Theta_t` for `t = 0..=T`.
    pub fn project(&self, direction: &[f64]) -> Vec<f64> {
        (0..=self.horizon())
            .map(|t| dot(self.row(t), direction))
            .collect()
    }
}

/// Anything that can produce independent draws of the spectral tail process.
pub trait TailProcessSampler: Send + Sync {
    fn dim(&self) -> usize;
    fn alpha(&self) -> f64;
    fn sample(&self, horizon: usize, rng: &mut RngStream) -> Result<TailProcessPath>;
}

/// Tail of the stationary marginal, `P(|X| > x) ~ constant * x^-alpha`, together with
/// the exact innovation survival function scaled by the same cluster weight when known.
#[derive(Clone, Debug)]
pub struct MarginalTail {
    pub alpha: f64,
    pub constant: f64,
    pub(crate) innovation_weight: f64,
    pub(crate) innovation: Option<crate::randkit::TailLaw>,
}

impl MarginalTail {
    /// Pure power law `constant * x^-alpha`.
    pub fn power_law(alpha: f64, constant: f64) -> Self {
        MarginalTail {
            alpha,
            constant,
            innovation_weight: 1.0,
            innovation: None,
        }
    }

    /// `P(|X| > x)` using the exact innovation survival function when the marginal tail is
    /// a known multiple of it, otherwise the power-law asymptote.
    pub fn survival(&self, x: f64) -> f64 {
        match self.innovation.and_then(|law| law.survival_abs(x)) {
            Some(s) => self.innovation_weight * s,
            None => self.constant * x.powf(-self.alpha),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ModelSpec {
    Var1(Var1Spec),
    Kesten(KestenSpec),
    Garch11(Garch11Spec),
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Var1(s) => s.dim(),
            ModelSpec::Kesten(s) => s.dim(),
            ModelSpec::Garch11(_) => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Var1(_) => "var1",
            ModelSpec::Kesten(_) => "kesten",
            ModelSpec::Garch11(_) => "garch11",
        }
    }

    /// Tail index of the stationary solution.
    pub fn alpha(&self) -> Result<f64> {
        tail_index(self)
    }

    /// Stationary mean when it is known in closed form.
    pub fn mean(&self) -> Option<Vec<f64>> {
        match self {
            ModelSpec::Var1(s) => s.mean(),
            ModelSpec::Kesten(s) => s.mean(),
            ModelSpec::Garch11(_) => None,
        }
    }

    pub fn marginal_tail(&self) -> Option<MarginalTail> {
        match self {
            ModelSpec::Var1(s) => s.marginal_tail().ok(),
            _ => None,
        }
    }

    /// Contraction factor used for burn-in and horizon rules.
    pub fn contraction(&self) -> Result<f64> {
        match self {
            ModelSpec::Var1(s) => Ok(s.spectral_radius()),
            ModelSpec::Kesten(s) => s.contraction(),
            ModelSpec::Garch11(s) => s.contraction(),
        }
    }

    /// `ceil(10 / (1 - beta))` steps.
    pub fn default_burn_in(&self) -> usize {
        let beta = self.contraction().unwrap_or(0.9).clamp(0.0, 0.999);
        (10.0 / (1.0 - beta)).ceil() as usize
    }

    pub fn tail_sampler(&self, stream: &RngStream) -> Result<Box<dyn TailProcessSampler>> {
        match self {
            ModelSpec::Var1(s) => Ok(Box::new(s.tail_sampler()?)),
            ModelSpec::Kesten(s) => Ok(Box::new(s.tail_sampler(stream)?)),
            ModelSpec::Garch11(s) => Ok(Box::new(s.tail_sampler()?)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Var1(s) => s.validate(),
            ModelSpec::Kesten(s) => s.validate(),
            ModelSpec::Garch11(s) => s.validate(),
        }
    }
}

/// Stationary-regime sample of length `n` after discarding `burn_in` steps.
pub fn simulate_path(
    spec: &ModelSpec,
    n: usize,
    burn_in: usize,
    stream: &mut RngStream,
) -> Result<PathMatrix> {
    let mut chain = Chain::new(spec, stream)?;
    for _ in 0..burn_in {
        chain.step(stream)?;
    }
    let dim = spec.dim();
    let mut values = Vec::with_capacity(n * dim);
    for _ in 0..n {
        chain.step(stream)?;
        values.extend_from_slice(chain.state());
    }
    Ok(PathMatrix {
        values,
        rows: n,
        dim,
        burn_in_used: burn_in,
        stream_id: stream.stream_id(),
    })
}

/// Sum `X_1 + ... + X_n` of a stationary stretch, without storing the path.
pub fn simulate_sum(
    spec: &ModelSpec,
    n: usize,
    burn_in: usize,
    stream: &mut RngStream,
) -> Result<Vec<f64>> {
    let mut chain = Chain::new(spec, stream)?;
    for _ in 0..burn_in {
        chain.step(stream)?;
    }
    let mut sum = vec![0.0; spec.dim()];
    for _ in 0..n {
        chain.step(stream)?;
        for (s, v) in sum.iter_mut().zip(chain.state()) {
            *s += v;
        }
    }
    Ok(sum)
}

/// One draw of the spectral tail process. Builds the sampler (including any pilot run,
/// on a fork of `stream`) and samples once; use [`ModelSpec::tail_sampler`] for batches.
pub fn sample_tail_process(
    spec: &ModelSpec,
    horizon: usize,
    stream: &mut RngStream,
) -> Result<TailProcessPath> {
    let sampler = spec.tail_sampler(&stream.fork(u64::MAX - 1))?;
    sampler.sample(horizon, stream)
}

/// Tail index: innovation index for the autoregression, root of the moment equation for
/// the scalar Kesten recursion and GARCH(1,1).
pub fn tail_index(spec: &ModelSpec) -> Result<f64> {
    match spec {
        ModelSpec::Var1(s) => s.alpha(),
        ModelSpec::Kesten(s) => s.tail_index(),
        ModelSpec::Garch11(s) => s.tail_index(),
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Draws `|Y_0|` from its own fork so it never shares randomness with `Theta`.
pub(crate) fn radius_draw(rng: &RngStream, alpha: f64) -> f64 {
    let mut r = rng.fork(u64::MAX);
    crate::randkit::pareto_from_uniform(r.uniform(), alpha)
}
