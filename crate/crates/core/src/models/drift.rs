use serde::Serialize;

use super::{norm, Chain, ModelSpec};
use crate::error::{Error, Result};
use crate::randkit::RngStream;

/// Least-squares fit of `E[V(Phi_m) | Phi_0 = y] ~ beta V(y) + b` over a state grid.
#[derive(Clone, Debug, Serialize)]
pub struct DriftReport {
    pub p: f64,
    pub m: usize,
    pub beta: f64,
    pub beta_se: f64,
    pub intercept: f64,
    pub pass: bool,
    /// `beta^(1/m)`, the implied one-step contraction.
    pub one_step_rate: f64,
    pub grid_v: Vec<f64>,
    pub grid_mean: Vec<f64>,
    pub grid_se: Vec<f64>,
}

/// Lyapunov function `V = |x|^p`; for GARCH it is applied to the next-step variance
/// `alpha0 + alpha1 X^2 + beta1 sigma^2`, which is itself an affine recursion.
pub fn lyapunov_value(spec: &ModelSpec, state: &[f64], p: f64) -> f64 {
    match spec {
        ModelSpec::Garch11(g) => {
            let (s, x) = (state[0], state[1]);
            (g.alpha0 + g.alpha1 * x * x + g.beta1 * s * s).powf(p)
        }
        _ => norm(state).powf(p),
    }
}

/// Checks the drift condition for the `m`-step skeleton by conditional Monte Carlo with
/// `reps` draws per grid state. Each grid state uses its own fork of `stream`.
pub fn drift_margin(
    spec: &ModelSpec,
    p: f64,
    m: usize,
    grid: &[Vec<f64>],
    reps: usize,
    stream: &RngStream,
) -> Result<DriftReport> {
    if !(p > 0.0) || m == 0 {
        return Err(Error::param("drift check needs p > 0 and m >= 1"));
    }
    if grid.len() < 2 {
        return Err(Error::param("drift grid needs at least two states"));
    }
    if reps < 2 {
        return Err(Error::param("drift check needs at least two replicas"));
    }
    let mut grid_v = Vec::with_capacity(grid.len());
    let mut grid_mean = Vec::with_capacity(grid.len());
    let mut grid_se = Vec::with_capacity(grid.len());
    for (i, y) in grid.iter().enumerate() {
        let mut rng = stream.fork(i as u64);
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..reps {
            let mut chain = Chain::from_state(spec, y, &mut rng)?;
            for _ in 0..m {
                chain.step(&mut rng)?;
            }
            let v = lyapunov_value(spec, chain.state(), p);
            if !v.is_finite() {
                return Err(Error::Divergence("conditional simulation overflowed".into()));
            }
            sum += v;
            sum2 += v * v;
        }
        let mean = sum / reps as f64;
        let var = (sum2 / reps as f64 - mean * mean).max(0.0);
        grid_v.push(lyapunov_value(spec, y, p));
        grid_mean.push(mean);
        grid_se.push((var / reps as f64).sqrt());
    }
    let (beta, intercept, beta_se) = fit_nonneg_intercept(&grid_v, &grid_mean);
    Ok(DriftReport {
        p,
        m,
        beta,
        beta_se,
        intercept,
        pass: beta + 1.96 * beta_se < 1.0,
        one_step_rate: beta.max(0.0).powf(1.0 / m as f64),
        grid_v,
        grid_mean,
        grid_se,
    })
}

/// OLS of `y` on `x` with intercept constrained to be nonnegative.
fn fit_nonneg_intercept(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let beta = sxy / sxx;
    let b = my - beta * mx;
    if b >= 0.0 {
        let ssr: f64 = x.iter().zip(y).map(|(a, c)| (c - b - beta * a).powi(2)).sum();
        let dof = (n - 2.0).max(1.0);
        return (beta, b, (ssr / dof / sxx).sqrt());
    }
    let sxx0: f64 = x.iter().map(|v| v * v).sum();
    let beta = x.iter().zip(y).map(|(a, c)| a * c).sum::<f64>() / sxx0;
    let ssr: f64 = x.iter().zip(y).map(|(a, c)| (c - beta * a).powi(2)).sum();
    let dof = (n - 1.0).max(1.0);
    (beta, 0.0, (ssr / dof / sxx0).sqrt())
}

/// Smallest `T` with `c beta^T / (1 - beta) < tol`.
pub fn horizon_for_tolerance(beta: f64, c: f64, tol: f64) -> Result<usize> {
    if !(beta >= 0.0 && beta < 1.0) {
        return Err(Error::param(format!("contraction {beta} must lie in [0, 1)")));
    }
    if !(tol > 0.0) || !(c >= 0.0) {
        return Err(Error::param("tolerance must be positive and c nonnegative"));
    }
    if beta == 0.0 || c / (1.0 - beta) < tol {
        return Ok(if c < tol { 0 } else { 1 });
    }
    let t = ((tol * (1.0 - beta) / c).ln() / beta.ln()).floor() as usize + 1;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizon_rule() {
        let t = horizon_for_tolerance(0.5, 1.0, 1e-4).unwrap();
        assert!(0.5f64.powi(t as i32) / 0.5 < 1e-4);
        assert!(0.5f64.powi(t as i32 - 1) / 0.5 >= 1e-4);
        assert!(horizon_for_tolerance(1.0, 1.0, 1e-4).is_err());
    }

    #[test]
    fn exact_linear_fit() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.5, 3.0, 3.5, 4.0];
        let (b, c, se) = fit_nonneg_intercept(&x, &y);
        assert!((b - 0.5).abs() < 1e-12 && (c - 2.0).abs() < 1e-12 && se < 1e-12);
    }

    #[test]
    fn negative_intercept_is_clamped() {
        let x = [1.0, 2.0, 3.0];
        let y = [0.0, 1.0, 2.0];
        let (_, c, _) = fit_nonneg_intercept(&x, &y);
        assert_eq!(c, 0.0);
    }
}
