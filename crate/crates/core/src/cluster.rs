//! Estimators of the cluster index `b(theta)`, its truncated differences, the extremal
//! index analogue, and the half-space values of the limit measure `nu_alpha`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{dot, KestenSpec, ModelSpec, TailProcessSampler, Var1Spec};
use crate::parallel::{jackknife_se, mean_se, replicate};
use crate::randkit::RngStream;
use crate::special::pos_pow;

/// Unit vector in `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Direction {
    pub theta: Vec<f64>,
}

impl Direction {
    /// Normalizes `v` to unit Euclidean length.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::param("direction must be a finite nonzero vector"));
        }
        Ok(Direction {
            theta: v.into_iter().map(|x| x / len).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn neg(&self) -> Direction {
        Direction {
            theta: self.theta.iter().map(|x| -x).collect(),
        }
    }

    pub fn plus() -> Direction {
        Direction { theta: vec![1.0] }
    }

    pub fn angle(t: f64) -> Direction {
        Direction {
            theta: vec![t.cos(), t.sin()],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    TailProcess,
    LdpRatio,
    ClosedForm,
    Telescoping,
    Extremal,
}

impl Route {
    pub fn name(&self) -> &'static str {
        match self {
            Route::TailProcess => "tail_process",
            Route::LdpRatio => "ldp_ratio",
            Route::ClosedForm => "closed_form",
            Route::Telescoping => "telescoping",
            Route::Extremal => "extremal",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterIndexEstimate {
    pub value: f64,
    pub std_error: f64,
    pub jackknife_se: f64,
    pub route: Route,
    pub horizon: usize,
    pub replicas: usize,
    /// Monte Carlo estimate of `E(theta' Theta_0)_+^alpha` from the same draws.
    pub baseline: f64,
    pub baseline_se: f64,
    /// Standard error of `value - baseline`.
    pub gap_se: f64,
}

impl ClusterIndexEstimate {
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}

const MIN_REPLICAS: usize = 100;
const JACKKNIFE_GROUPS: usize = 20;

fn summarize(
    pairs: Vec<(f64, f64)>,
    route: Route,
    horizon: usize,
) -> ClusterIndexEstimate {
    let main: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let base: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let diff: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
    let (value, std_error) = mean_se(&main);
    let (baseline, baseline_se) = mean_se(&base);
    ClusterIndexEstimate {
        value,
        std_error,
        jackknife_se: jackknife_se(&main, JACKKNIFE_GROUPS),
        route,
        horizon,
        replicas: main.len(),
        baseline,
        baseline_se,
        gap_se: mean_se(&diff).1,
    }
}

fn check_inputs(sampler: &dyn TailProcessSampler, theta: &Direction, replicas: usize) -> Result<()> {
    if replicas < MIN_REPLICAS {
        return Err(Error::param(format!("need at least {MIN_REPLICAS} replicas, got {replicas}")));
    }
    if theta.dim() != sampler.dim() {
        return Err(Error::param(format!(
            "direction has dimension {}, model has {}",
            theta.dim(),
            sampler.dim()
        )));
    }
    Ok(())
}

/// Monte Carlo mean of `f(theta' Theta_0, ..., theta' Theta_T)` with the baseline
/// `(theta' Theta_0)_+^alpha` carried along.
fn tail_functional(
    sampler: &dyn TailProcessSampler,
    theta: &Direction,
    alpha: f64,
    horizon: usize,
    replicas: usize,
    stream: &RngStream,
    route: Route,
    f: impl Fn(&[f64]) -> f64 + Sync + Send,
) -> Result<ClusterIndexEstimate> {
    check_inputs(sampler, theta, replicas)?;
    let pairs = replicate(stream, replicas, |_, rng| {
        let path = sampler.sample(horizon, rng)?;
        let proj = path.project(&theta.theta);
        Ok((f(&proj), pos_pow(proj[0], alpha)))
    })?;
    Ok(summarize(pairs, route, horizon))
}

fn sum_functional(proj: &[f64], alpha: f64) -> f64 {
    let tail: f64 = proj[1..].iter().sum();
    pos_pow(proj[0] + tail, alpha) - pos_pow(tail, alpha)
}

/// `E[(sum_{t=0}^T theta' Theta_t)_+^alpha - (sum_{t=1}^T theta' Theta_t)_+^alpha]`.
pub fn cluster_index_tail_process(
    sampler: &dyn TailProcessSampler,
    theta: &Direction,
    alpha: f64,
    horizon: usize,
    replicas: usize,
    stream: &RngStream,
) -> Result<ClusterIndexEstimate> {
    tail_functional(sampler, theta, alpha, horizon, replicas, stream, Route::TailProcess, |p| {
        sum_functional(p, alpha)
    })
}

/// `b_{k+1}(theta) - b_k(theta)`, the same functional truncated at `k`.
pub fn telescoping_difference(
    sampler: &dyn TailProcessSampler,
    theta: &Direction,
    alpha: f64,
    k: usize,
    replicas: usize,
    stream: &RngStream,
) -> Result<ClusterIndexEstimate> {
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    tail_functional(sampler, theta, alpha, k, replicas, stream, Route::Telescoping, |p| {
        sum_functional(p, alpha)
    })
}

/// `E[(sup_{t>=0} theta' Theta_t)_+^alpha - (sup_{t>=1} theta' Theta_t)_+^alpha]`.
pub fn extremal_index(
    sampler: &dyn TailProcessSampler,
    theta: &Direction,
    alpha: f64,
    horizon: usize,
    replicas: usize,
    stream: &RngStream,
) -> Result<ClusterIndexEstimate> {
    tail_functional(sampler, theta, alpha, horizon, replicas, stream, Route::Extremal, |p| {
        let tail = p[1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        pos_pow(p[0].max(tail), alpha) - pos_pow(tail, alpha)
    })
}

/// Model-specific closed form. For the autoregression it averages
/// `(theta'(I-A)^{-1} Theta_0)_+^alpha - (theta' A (I-A)^{-1} Theta_0)_+^alpha` over `(A, Theta_0)`;
/// for the Kesten recursion `(theta'(Z_1 + I) Theta_0)_+^alpha - (theta' Z_1 Theta_0)_+^alpha`,
/// with `Z_1` truncated at `horizon`.
pub fn closed_form_cluster_index(
    spec: &ModelSpec,
    theta: &Direction,
    replicas: usize,
    horizon: usize,
    stream: &RngStream,
) -> Result<ClusterIndexEstimate> {
    if replicas < MIN_REPLICAS {
        return Err(Error::param(format!("need at least {MIN_REPLICAS} replicas, got {replicas}")));
    }
    if theta.dim() != spec.dim() {
        return Err(Error::param("direction and model dimensions differ"));
    }
    match spec {
        ModelSpec::Var1(s) => var1_closed_form(s, theta, replicas, stream),
        ModelSpec::Kesten(s) => kesten_closed_form(s, theta, replicas, horizon, stream),
        ModelSpec::Garch11(_) => Err(Error::UnsupportedCase(
            "no closed form is available for GARCH(1,1)".into(),
        )),
    }
}

fn var1_closed_form(
    spec: &Var1Spec,
    theta: &Direction,
    replicas: usize,
    stream: &RngStream,
) -> Result<ClusterIndexEstimate> {
    let alpha = spec.alpha()?;
    let table = spec.theta_zero_table()?;
    let d = spec.dim();
    let id = DMatrix::<f64>::identity(d, d);
    // theta'(I-A)^{-1} and theta'A(I-A)^{-1} per support matrix
    let rows: Vec<Option<(Vec<f64>, Vec<f64>)>> = spec
        .a_law
        .support()
        .iter()
        .map(|(a, _)| {
            let inv = (&id - *a).try_inverse()?;
            let t = DVector::from_column_slice(&theta.theta).transpose();
            let first = &t * &inv;
            let second = &t * *a * &inv;
            Some((first.iter().copied().collect(), second.iter().copied().collect()))
        })
        .collect();
    let draws = replicate(stream, replicas, |_, rng| {
        let (index, theta0) = table.draw(rng);
        Ok(rows[index].as_ref().map(|(u, v)| {
            (
                pos_pow(dot(u, theta0), alpha) - pos_pow(dot(v, theta0), alpha),
                pos_pow(dot(&theta.theta, theta0), alpha),
            )
        }))
    })?;
    finish_closed_form(draws, 0)
}

fn kesten_closed_form(
    spec: &KestenSpec,
    theta: &Direction,
    replicas: usize,
    horizon: usize,
    stream: &RngStream,
) -> Result<ClusterIndexEstimate> {
    let sampler = spec.tail_sampler(&stream.fork(u64::MAX - 1))?;
    let alpha = sampler.alpha();
    let d = spec.dim();
    let draws = replicate(stream, replicas, |_, rng| {
        let theta0 = DVector::from_vec(sampler.sample_theta0(rng));
        let z1 = spec.sample_z1(horizon, rng);
        let tail = &z1 * &theta0;
        let all = &tail + &theta0;
        let _ = d;
        Ok(Some((
            pos_pow(dot(&theta.theta, all.as_slice()), alpha) - pos_pow(dot(&theta.theta, tail.as_slice()), alpha),
            pos_pow(dot(&theta.theta, theta0.as_slice()), alpha),
        )))
    })?;
    finish_closed_form(draws, horizon)
}

fn finish_closed_form(draws: Vec<Option<(f64, f64)>>, horizon: usize) -> Result<ClusterIndexEstimate> {
    let total = draws.len();
    let pairs: Vec<(f64, f64)> = draws.into_iter().flatten().collect();
    let skipped = total - pairs.len();
    if skipped * 100 > total {
        return Err(Error::Divergence(format!(
            "{skipped} of {total} draws had a singular I - A"
        )));
    }
    Ok(summarize(pairs, Route::ClosedForm, horizon))
}

/// Exact `E(theta' Theta_0)_+^alpha` for the autoregression.
pub fn var1_baseline(spec: &Var1Spec, theta: &Direction) -> Result<f64> {
    let alpha = spec.alpha()?;
    let table = spec.theta_zero_table()?;
    Ok(table.expect(|_, v| pos_pow(dot(&theta.theta, v), alpha)))
}

/// Exact closed-form cluster index of the autoregression, summed over the `Theta_0` table.
pub fn var1_cluster_index_exact(spec: &Var1Spec, theta: &Direction) -> Result<f64> {
    let alpha = spec.alpha()?;
    let table = spec.theta_zero_table()?;
    let d = spec.dim();
    let id = DMatrix::<f64>::identity(d, d);
    let support = spec.a_law.support();
    let mut invs = Vec::new();
    for (a, _) in &support {
        invs.push(
            (&id - *a)
                .try_inverse()
                .ok_or_else(|| Error::Divergence("I - A is singular".into()))?,
        );
    }
    Ok(table.expect(|i, v| {
        let x = DVector::from_column_slice(v);
        let all = &invs[i] * &x;
        let tail = support[i].0 * &all;
        pos_pow(dot(&theta.theta, all.as_slice()), alpha)
            - pos_pow(dot(&theta.theta, tail.as_slice()), alpha)
    }))
}

/// Stored half-space values `b(theta)` of `nu_alpha` together with the index.
#[derive(Clone, Debug, Serialize)]
pub struct LimitMeasureEvaluator {
    pub alpha: f64,
    pub b_values: Vec<(Direction, f64)>,
}

impl LimitMeasureEvaluator {
    pub fn new(alpha: f64, b_values: Vec<(Direction, f64)>) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::param("alpha must be positive"));
        }
        if b_values.is_empty() {
            return Err(Error::param("evaluator needs at least one direction"));
        }
        if b_values.iter().any(|(_, b)| !(*b >= 0.0)) {
            return Err(Error::param("b values must be nonnegative"));
        }
        Ok(LimitMeasureEvaluator { alpha, b_values })
    }

    /// `b(theta)`: stored value, or linear interpolation in angle on a planar grid.
    pub fn b(&self, theta: &Direction) -> Result<f64> {
        if let Some((_, b)) = self
            .b_values
            .iter()
            .find(|(d, _)| d.theta.iter().zip(&theta.theta).all(|(a, b)| (a - b).abs() < 1e-9))
        {
            return Ok(*b);
        }
        if theta.dim() != 2 || self.b_values.len() < 2 {
            return Err(Error::param("direction is not on the stored grid"));
        }
        let tau = std::f64::consts::TAU;
        let angle = |d: &Direction| d.theta[1].atan2(d.theta[0]).rem_euclid(tau);
        let mut grid: Vec<(f64, f64)> = self.b_values.iter().map(|(d, b)| (angle(d), *b)).collect();
        grid.sort_by(|a, b| a.0.total_cmp(&b.0));
        let x = angle(theta);
        let n = grid.len();
        let hi = grid.iter().position(|g| g.0 > x).unwrap_or(0);
        let lo = (hi + n - 1) % n;
        let (a0, b0) = grid[lo];
        let (mut a1, b1) = grid[hi];
        let mut xx = x;
        if a1 <= a0 {
            a1 += tau;
            if xx < a0 {
                xx += tau;
            }
        }
        Ok(b0 + (b1 - b0) * (xx - a0) / (a1 - a0))
    }

    /// Integer `alpha` with `b(theta) != b(-theta)` somewhere on the grid: the half-space
    /// values then need not determine the measure.
    pub fn uniqueness_flag(&self) -> bool {
        if (self.alpha - self.alpha.round()).abs() > 1e-12 {
            return false;
        }
        self.b_values.iter().any(|(d, b)| {
            self.b(&d.neg())
                .map(|bm| (bm - b).abs() > 1e-9 * (1.0 + b.abs()))
                .unwrap_or(false)
        })
    }
}

/// `nu_alpha(t {x : theta'x > 1}) = t^{-alpha} b(theta)`.
pub fn nu_alpha(evaluator: &LimitMeasureEvaluator, theta: &Direction, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::param("t must be positive"));
    }
    Ok(t.powf(-evaluator.alpha) * evaluator.b(theta)?)
}

/// Default direction grid: `+-1` in one dimension, 64 equally spaced angles in two,
/// 512 Fibonacci sphere points in three.
pub fn direction_grid(d: usize) -> Result<Vec<Direction>> {
    match d {
        1 => Ok(vec![Direction::plus(), Direction { theta: vec![-1.0] }]),
        2 => Ok(circle_grid(64)),
        3 => Ok(fibonacci_sphere(512)),
        _ => Err(Error::UnsupportedCase(format!("no default grid for d = {d}"))),
    }
}

pub fn circle_grid(count: usize) -> Vec<Direction> {
    (0..count)
        .map(|j| Direction::angle(std::f64::consts::TAU * j as f64 / count as f64))
        .collect()
}

pub fn fibonacci_sphere(count: usize) -> Vec<Direction> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Direction::new(vec![r * phi.cos(), r * phi.sin(), z]).expect("nonzero")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Var1Spec;
    use crate::randkit::{derive_stream, TailLaw};

    #[test]
    fn exact_var1_values() {
        let spec = Var1Spec::scalar(0.5, TailLaw::pareto(1.5).unwrap()).unwrap();
        let b = var1_cluster_index_exact(&spec, &Direction::plus()).unwrap();
        assert!((b - (2f64.powf(1.5) - 1.0)).abs() < 1e-12);
        let iid = Var1Spec::scalar(0.0, TailLaw::pareto(0.8).unwrap()).unwrap();
        assert_eq!(var1_cluster_index_exact(&iid, &Direction::plus()).unwrap(), 1.0);
    }

    #[test]
    fn too_few_replicas() {
        let spec = Var1Spec::scalar(0.5, TailLaw::pareto(1.5).unwrap()).unwrap();
        let s = spec.tail_sampler().unwrap();
        let r = cluster_index_tail_process(&s, &Direction::plus(), 1.5, 10, 50, &derive_stream(1, 1));
        assert!(r.is_err());
    }

    #[test]
    fn deterministic_theta_extremal() {
        let spec = Var1Spec::scalar(0.5, TailLaw::pareto(1.0).unwrap()).unwrap();
        let s = spec.tail_sampler().unwrap();
        let e = extremal_index(&s, &Direction::plus(), 1.0, 30, 200, &derive_stream(2, 2)).unwrap();
        assert!((e.value - 0.5).abs() < 1e-12);
        assert!(e.std_error < 1e-12);
    }

    #[test]
    fn interpolation_on_circle() {
        let grid = circle_grid(4);
        let vals = grid.iter().cloned().zip([1.0, 2.0, 3.0, 4.0]).collect();
        let ev = LimitMeasureEvaluator::new(1.5, vals).unwrap();
        let mid = Direction::angle(std::f64::consts::FRAC_PI_4);
        assert!((ev.b(&mid).unwrap() - 1.5).abs() < 1e-12);
        let wrap = Direction::angle(-std::f64::consts::FRAC_PI_4);
        assert!((ev.b(&wrap).unwrap() - 2.5).abs() < 1e-12);
        assert!(nu_alpha(&ev, &mid, 0.0).is_err());
    }

    #[test]
    fn grids_are_unit() {
        for d in 1..=3 {
            for g in direction_grid(d).unwrap() {
                let n: f64 = g.theta.iter().map(|x| x * x).sum();
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(direction_grid(3).unwrap().len(), 512);
    }

    #[test]
    fn integer_alpha_asymmetry_flag() {
        let vals = vec![(Direction::plus(), 1.0), (Direction::plus().neg(), 0.0)];
        assert!(LimitMeasureEvaluator::new(1.0, vals.clone()).unwrap().uniqueness_flag());
        assert!(!LimitMeasureEvaluator::new(1.5, vals).unwrap().uniqueness_flag());
    }
}
