//! Nummelin splitting on a box small set, regenerative block harvesting and cycle checks.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{
    Chain, DriftReport, Innovation, KestenLaw, ModelSpec, PathMatrix, ScalarLaw, Var1Spec,
};
use crate::randkit::{derive_stream, pareto_from_uniform, RngStream, TailFamily, TailLaw};
use crate::special::erfc;
use crate::tailstats::AngularMeasure;

const RESIDUAL_GUARD: usize = 1_000_000;

/// One innovation coordinate with a closed-form density.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Coord {
    Pareto { alpha: f64, scale: f64 },
    SymPareto { alpha: f64, scale: f64, p: f64 },
    Gaussian { mean: f64, sd: f64 },
}

impl Coord {
    fn from_tail(law: &TailLaw) -> Result<Self> {
        match law.family {
            TailFamily::Pareto => Ok(Coord::Pareto {
                alpha: law.alpha,
                scale: law.scale,
            }),
            TailFamily::SymmetricPareto => Ok(Coord::SymPareto {
                alpha: law.alpha,
                scale: law.scale,
                p: law.tail_balance(),
            }),
            TailFamily::Gaussian => Ok(Coord::Gaussian {
                mean: 0.0,
                sd: law.scale,
            }),
            f => Err(Error::UnsupportedLaw(format!(
                "{f:?} innovations have no closed-form density for splitting"
            ))),
        }
    }

    fn from_scalar(law: &ScalarLaw) -> Result<Self> {
        match law {
            ScalarLaw::Tail(t) => Self::from_tail(t),
            ScalarLaw::Gaussian { mean, sd } => Ok(Coord::Gaussian { mean: *mean, sd: *sd }),
            other => Err(Error::UnsupportedLaw(format!(
                "{other:?} has no density usable for splitting"
            ))),
        }
    }

    fn density(&self, z: f64) -> f64 {
        match *self {
            Coord::Pareto { alpha, scale } => {
                if z >= scale {
                    alpha * scale.powf(alpha) * z.powf(-alpha - 1.0)
                } else {
                    0.0
                }
            }
            Coord::SymPareto { alpha, scale, p } => {
                let a = z.abs();
                if a < scale {
                    0.0
                } else {
                    let w = if z > 0.0 { p } else { 1.0 - p };
                    w * alpha * scale.powf(alpha) * a.powf(-alpha - 1.0)
                }
            }
            Coord::Gaussian { mean, sd } => {
                let u = (z - mean) / sd;
                (-0.5 * u * u).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
            }
        }
    }

    /// `inf_{|u| <= r} f(y - u)`.
    fn floor_density(&self, y: f64, r: f64) -> f64 {
        match *self {
            Coord::Pareto { scale, .. } => {
                if y >= scale + r {
                    self.density(y + r)
                } else {
                    0.0
                }
            }
            Coord::SymPareto { scale, .. } => {
                if y.abs() >= scale + r {
                    self.density(y + r * y.signum())
                } else {
                    0.0
                }
            }
            Coord::Gaussian { mean, .. } => {
                let off = y - mean;
                let far = off.abs() + r;
                self.density(mean + far)
            }
        }
    }

    /// Mass of the floor density.
    fn epsilon(&self, r: f64) -> f64 {
        match *self {
            Coord::Pareto { alpha, scale } | Coord::SymPareto { alpha, scale, .. } => {
                ((scale + 2.0 * r) / scale).powf(-alpha)
            }
            Coord::Gaussian { sd, .. } => erfc(r / (sd * std::f64::consts::SQRT_2)),
        }
    }

    /// Draw from the normalized floor density.
    fn sample_floor(&self, r: f64, rng: &mut RngStream) -> f64 {
        match *self {
            Coord::Pareto { alpha, scale } => {
                (scale + 2.0 * r) * pareto_from_uniform(rng.uniform(), alpha) - r
            }
            Coord::SymPareto { alpha, scale, p } => {
                let m = (scale + 2.0 * r) * pareto_from_uniform(rng.uniform(), alpha) - r;
                if rng.uniform() < p {
                    m
                } else {
                    -m
                }
            }
            Coord::Gaussian { mean, sd } => {
                let m = sd * truncated_normal_above(r / sd, rng) - r;
                if rng.uniform() < 0.5 {
                    mean + m
                } else {
                    mean - m
                }
            }
        }
    }

    fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            Coord::Pareto { alpha, scale } => scale * pareto_from_uniform(rng.uniform(), alpha),
            Coord::SymPareto { alpha, scale, p } => {
                let m = scale * pareto_from_uniform(rng.uniform(), alpha);
                if rng.uniform() < p {
                    m
                } else {
                    -m
                }
            }
            Coord::Gaussian { mean, sd } => mean + sd * rng.normal(),
        }
    }
}

/// Standard normal conditioned on exceeding `a >= 0` (exponential-proposal rejection).
fn truncated_normal_above(a: f64, rng: &mut RngStream) -> f64 {
    let lambda = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let z = a + rng.exponential() / lambda;
        if rng.uniform().ln() <= -0.5 * (z - lambda).powi(2) {
            return z;
        }
    }
}

#[derive(Clone, Debug)]
enum SplitKernel {
    Var1 {
        a: DMatrix<f64>,
        coords: Vec<Coord>,
        row_abs: Vec<f64>,
    },
    Kesten {
        a: ScalarLaw,
        coord: Coord,
    },
}

/// Small set `{x : |x|_inf <= radius}` with `P(x, .) >= epsilon nu` on it.
///
/// `epsilon_max` is the largest constant the density floor supports; any smaller
/// `epsilon` is also valid. For the Kesten recursion the floor depends on `A_t`, and
/// `epsilon` is its average over `A`.
#[derive(Clone, Debug)]
pub struct MinorizationSpec {
    pub radius: f64,
    pub epsilon: f64,
    pub epsilon_max: f64,
    /// True when `radius` came from a fitted drift condition rather than from the caller.
    pub heuristic: bool,
    scale: f64,
    kernel: SplitKernel,
}

impl MinorizationSpec {
    /// Builds the density-floor minorization of `spec` on the box of half-width `radius`.
    /// `epsilon` may lower the constant; asking for more than the floor supports is an error.
    pub fn new(spec: &ModelSpec, radius: f64, epsilon: Option<f64>) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::param("small-set radius must be positive"));
        }
        let kernel = match spec {
            ModelSpec::Var1(s) => var1_kernel(s)?,
            ModelSpec::Kesten(k) => match &k.law {
                KestenLaw::Scalar { a, b } => SplitKernel::Kesten {
                    a: *a,
                    coord: Coord::from_scalar(b)?,
                },
                KestenLaw::ScaledMatrix { .. } => {
                    return Err(Error::UnsupportedCase(
                        "splitting is implemented for the scalar Kesten recursion".into(),
                    ))
                }
            },
            ModelSpec::Garch11(_) => {
                return Err(Error::UnsupportedCase(
                    "splitting is not implemented for GARCH(1,1)".into(),
                ))
            }
        };
        let epsilon_max = match &kernel {
            SplitKernel::Var1 { coords, row_abs, .. } => coords
                .iter()
                .zip(row_abs)
                .map(|(c, &ra)| c.epsilon(reach(radius, ra)))
                .product(),
            SplitKernel::Kesten { a, coord } => average_kesten_epsilon(a, coord, radius),
        };
        if !(epsilon_max > 0.0) {
            return Err(Error::MinorizationInvalid(format!(
                "density floor on radius {radius} has no mass"
            )));
        }
        let eps = epsilon.unwrap_or(epsilon_max);
        if !(eps > 0.0) || eps > epsilon_max * (1.0 + 1e-12) {
            return Err(Error::MinorizationInvalid(format!(
                "epsilon {eps} exceeds the supported {epsilon_max}"
            )));
        }
        Ok(MinorizationSpec {
            radius,
            epsilon: eps,
            epsilon_max,
            heuristic: false,
            scale: (eps / epsilon_max).min(1.0),
            kernel,
        })
    }

    /// Radius `(2 b / (1 - beta))^{1/p}` from a fitted drift condition.
    pub fn from_drift(spec: &ModelSpec, report: &DriftReport) -> Result<Self> {
        if !(report.beta < 1.0) {
            return Err(Error::MinorizationInvalid("drift fit has beta >= 1".into()));
        }
        let b = report.intercept.max(1e-12);
        let radius = (2.0 * b / (1.0 - report.beta)).powf(1.0 / report.p);
        let mut m = Self::new(spec, radius, None)?;
        m.heuristic = true;
        Ok(m)
    }

    /// Whole state space with `epsilon = 1`; valid when the chain is iid.
    pub fn whole_space(spec: &ModelSpec) -> Result<Self> {
        let m = Self::new(spec, f64::INFINITY, None)?;
        if (m.epsilon_max - 1.0).abs() > 1e-12 {
            return Err(Error::MinorizationInvalid(
                "the whole space is an atom only for iid chains".into(),
            ));
        }
        Ok(m)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.abs() <= self.radius)
    }
}

fn reach(radius: f64, row_abs: f64) -> f64 {
    if row_abs == 0.0 {
        0.0
    } else {
        radius * row_abs
    }
}

fn var1_kernel(s: &Var1Spec) -> Result<SplitKernel> {
    let a = match &s.a_law {
        crate::models::MatrixLaw::Fixed(m) => m.clone(),
        _ => {
            return Err(Error::UnsupportedCase(
                "splitting needs a fixed coefficient matrix".into(),
            ))
        }
    };
    let coords = match &s.innovation {
        Innovation::Independent(laws) => laws.iter().map(Coord::from_tail).collect::<Result<Vec<_>>>()?,
        Innovation::Radial { .. } => {
            return Err(Error::UnsupportedCase(
                "splitting needs independent innovation coordinates".into(),
            ))
        }
    };
    let row_abs = (0..a.nrows()).map(|i| a.row(i).iter().map(|v| v.abs()).sum()).collect();
    Ok(SplitKernel::Var1 { a, coords, row_abs })
}

fn average_kesten_epsilon(a: &ScalarLaw, coord: &Coord, radius: f64) -> f64 {
    if let ScalarLaw::Constant(c) = a {
        return coord.epsilon(reach(radius, c.abs()));
    }
    let mut rng = derive_stream(0x5711, 0xe9);
    let n = 100_000;
    (0..n)
        .map(|_| coord.epsilon(reach(radius, a.sample(&mut rng).abs())))
        .sum::<f64>()
        / n as f64
}

/// One transition of the split chain from `state`. Returns the next state and whether
/// the level bit at `state` was one, in which case the next state is a draw from `nu`.
pub fn split_step(
    state: &[f64],
    minorization: &MinorizationSpec,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, bool)> {
    let inside = minorization.contains(state);
    match &minorization.kernel {
        SplitKernel::Var1 { a, coords, row_abs } => {
            let d = coords.len();
            let loc: Vec<f64> = if d == 1 {
                vec![a[(0, 0)] * state[0]]
            } else {
                let x = DVector::from_column_slice(state);
                (a * x).iter().copied().collect()
            };
            let r: Vec<f64> = row_abs.iter().map(|&ra| reach(minorization.radius, ra)).collect();
            split_draw(inside, &loc, coords, &r, minorization.scale, minorization.epsilon_max, rng)
        }
        SplitKernel::Kesten { a, coord } => {
            let factor = a.sample(rng);
            let loc = [factor * state[0]];
            let r = [reach(minorization.radius, factor.abs())];
            let coords = [*coord];
            let eps = coord.epsilon(r[0]);
            split_draw(inside, &loc, &coords, &r, minorization.scale, eps, rng)
        }
    }
}

fn split_draw(
    inside: bool,
    loc: &[f64],
    coords: &[Coord],
    r: &[f64],
    scale: f64,
    eps: f64,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, bool)> {
    let direct = |rng: &mut RngStream| -> Vec<f64> {
        loc.iter().zip(coords).map(|(l, c)| l + c.sample(rng)).collect()
    };
    if !inside {
        return Ok((direct(rng), false));
    }
    if rng.uniform() < scale * eps {
        let y = coords.iter().zip(r).map(|(c, &ri)| c.sample_floor(ri, rng)).collect();
        return Ok((y, true));
    }
    for _ in 0..RESIDUAL_GUARD {
        let y = direct(rng);
        let mut q = 1.0;
        let mut g = 1.0;
        for (((yi, li), c), &ri) in y.iter().zip(loc).zip(coords).zip(r) {
            q *= c.density(yi - li);
            g *= c.floor_density(*yi, ri);
        }
        let accept = if q > 0.0 { 1.0 - scale * g / q } else { 1.0 };
        if rng.uniform() < accept {
            return Ok((y, false));
        }
    }
    Err(Error::MinorizationInvalid(format!(
        "residual kernel rejected {RESIDUAL_GUARD} proposals; epsilon is too large"
    )))
}

/// Regeneration times and block sums of one split-chain run of length `n`.
#[derive(Clone, Debug, Serialize)]
pub struct RegenBlocks {
    /// Regeneration times `tau_A(i)`; block `i` is `X_{tau(i)+1}, ..., X_{tau(i+1)}`.
    pub cycle_starts: Vec<usize>,
    pub block_sums: Vec<Vec<f64>>,
    pub cycle_lengths: Vec<usize>,
    pub head_sum: Vec<f64>,
    pub tail_sum: Vec<f64>,
    /// `head + S(1) + ... + tail`, added in that order.
    pub total: Vec<f64>,
    pub small_set_visits: usize,
    #[serde(skip)]
    pub path: PathMatrix,
}

impl RegenBlocks {
    /// Re-adds head, blocks and tail in the stored order.
    pub fn decomposition_sum(&self) -> Vec<f64> {
        let mut acc = self.head_sum.clone();
        for s in &self.block_sums {
            for (a, v) in acc.iter_mut().zip(s) {
                *a += v;
            }
        }
        for (a, v) in acc.iter_mut().zip(&self.tail_sum) {
            *a += v;
        }
        acc
    }

    /// Decomposition reproduces the stored total bit for bit.
    pub fn decomposition_exact(&self) -> bool {
        self.decomposition_sum()
            .iter()
            .zip(&self.total)
            .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Fraction of steps spent in the small set.
    pub fn small_set_fraction(&self) -> f64 {
        self.small_set_visits as f64 / self.path.rows as f64
    }

    pub fn block_matrix(&self) -> PathMatrix {
        let mut p = PathMatrix::from_rows(&self.block_sums).unwrap_or_else(|_| PathMatrix::from_column(vec![]));
        p.dim = self.path.dim;
        p
    }
}

/// Runs the split chain for `n` steps after `burn_in` ordinary steps and cuts the path at
/// regeneration times. The level bit of `X_n` is also drawn so a cycle ending at `n` counts.
pub fn harvest_blocks(
    spec: &ModelSpec,
    minorization: &MinorizationSpec,
    n: usize,
    burn_in: usize,
    stream: &mut RngStream,
) -> Result<RegenBlocks> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    let mut chain = Chain::new(spec, stream)?;
    for _ in 0..burn_in {
        chain.step(stream)?;
    }
    let d = spec.dim();
    let mut state = chain.state().to_vec();
    let mut values = Vec::with_capacity(n * d);
    let mut taus = Vec::new();
    let mut visits = 0usize;
    for t in 0..=n {
        if t >= 1 && minorization.contains(&state) {
            visits += 1;
        }
        let (next, regen) = split_step(&state, minorization, stream)?;
        if regen {
            taus.push(t);
        }
        if t == n {
            break;
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence("split chain produced a non-finite state".into()));
        }
        values.extend_from_slice(&next);
        state = next;
    }
    if taus.is_empty() {
        return Err(Error::NoCycles(n));
    }
    let path = PathMatrix {
        values,
        rows: n,
        dim: d,
        burn_in_used: burn_in,
        stream_id: stream.stream_id(),
    };
    let piece = |from: usize, to: usize| -> Vec<f64> {
        // rows from+1..=to in 1-based time
        let mut s = vec![0.0; d];
        for t in from..to {
            for (a, v) in s.iter_mut().zip(path.row(t)) {
                *a += v;
            }
        }
        s
    };
    let head_sum = piece(0, taus[0]);
    let mut block_sums = Vec::with_capacity(taus.len());
    let mut cycle_lengths = Vec::with_capacity(taus.len());
    for w in taus.windows(2) {
        block_sums.push(piece(w[0], w[1]));
        cycle_lengths.push(w[1] - w[0]);
    }
    let tail_sum = piece(*taus.last().expect("nonempty"), n);
    let mut blocks = RegenBlocks {
        cycle_starts: taus,
        block_sums,
        cycle_lengths,
        head_sum,
        tail_sum,
        total: Vec::new(),
        small_set_visits: visits,
        path,
    };
    blocks.total = blocks.decomposition_sum();
    Ok(blocks)
}

#[derive(Clone, Debug, Serialize)]
pub struct KacReport {
    pub cycles: usize,
    pub mean_length: f64,
    pub std_error: f64,
    pub expected: f64,
    /// Slope of `log P(tau > k)` in `k`; negative for a geometric tail.
    pub log_tail_slope: f64,
    pub geometric_rate: f64,
}

impl KacReport {
    pub fn within(&self, k: f64) -> bool {
        (self.mean_length - self.expected).abs() <= k * self.std_error
    }
}

/// Mean cycle length against `1 / pi(atom)` and an exponential fit to the cycle-length tail.
pub fn kac_check(blocks: &RegenBlocks, pi_atom: f64) -> Result<KacReport> {
    kac_from_lengths(&blocks.cycle_lengths, pi_atom)
}

pub fn kac_from_lengths(lengths: &[usize], pi_atom: f64) -> Result<KacReport> {
    let m = lengths.len();
    if m < 30 {
        return Err(Error::InsufficientCycles { found: m, needed: 30 });
    }
    if !(pi_atom > 0.0 && pi_atom <= 1.0) {
        return Err(Error::param("atom probability must lie in (0, 1]"));
    }
    let vals: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
    let (mean, se) = crate::parallel::mean_se(&vals);
    let max_len = *lengths.iter().max().unwrap_or(&1);
    let mut ks = Vec::new();
    let mut logs = Vec::new();
    for k in 1..max_len {
        let count = lengths.iter().filter(|&&l| l > k).count();
        if count < 10 {
            break;
        }
        ks.push(k as f64);
        logs.push((count as f64 / m as f64).ln());
    }
    let slope = if ks.len() >= 2 {
        let mk = ks.iter().sum::<f64>() / ks.len() as f64;
        let ml = logs.iter().sum::<f64>() / logs.len() as f64;
        let sxy: f64 = ks.iter().zip(&logs).map(|(k, l)| (k - mk) * (l - ml)).sum();
        let sxx: f64 = ks.iter().map(|k| (k - mk).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NEG_INFINITY
    };
    Ok(KacReport {
        cycles: m,
        mean_length: mean,
        std_error: se,
        expected: 1.0 / pi_atom,
        log_tail_slope: slope,
        geometric_rate: slope.exp(),
    })
}

/// Empirical angular measure of the `k` largest complete-cycle sums.
pub fn block_spectral_measure(blocks: &RegenBlocks, k: usize) -> Result<AngularMeasure> {
    if k == 0 || k > blocks.block_sums.len() {
        return Err(Error::param(format!(
            "k = {k} must lie in 1..={}",
            blocks.block_sums.len()
        )));
    }
    crate::tailstats::angular_measure(&blocks.block_matrix(), k)
}

/// Reweights a single-observation angular measure by `b(s) / integral b dP`.
pub fn reweighted_angular_measure(
    single: &AngularMeasure,
    b: impl Fn(&[f64]) -> f64,
) -> Result<AngularMeasure> {
    AngularMeasure::from_weighted(single.atoms.iter().map(|(u, w)| (u.clone(), w * b(u))).collect())
}

/// Angular law of large cycle sums for the autoregression with a fixed matrix: innovation
/// atoms `s` pushed through `(I - A)^{-1}` and weighted by `|(I - A)^{-1} s|^alpha`.
pub fn var1_cycle_angular_law(spec: &Var1Spec) -> Result<AngularMeasure> {
    let a = match &spec.a_law {
        crate::models::MatrixLaw::Fixed(m) => m.clone(),
        _ => return Err(Error::UnsupportedCase("needs a fixed coefficient matrix".into())),
    };
    let alpha = spec.alpha()?;
    let d = spec.dim();
    let inv = (DMatrix::<f64>::identity(d, d) - a)
        .try_inverse()
        .ok_or_else(|| Error::Divergence("I - A is singular".into()))?;
    let (atoms, _) = spec.innovation.angular_atoms()?;
    AngularMeasure::from_weighted(
        atoms
            .into_iter()
            .map(|(s, w)| {
                let v = &inv * DVector::from_vec(s);
                let len = v.norm();
                (v.iter().map(|x| x / len).collect(), w * len.powf(alpha))
            })
            .collect(),
    )
}

/// Two-sample Kolmogorov-Smirnov statistic and its 1% critical value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(|p, q| p.total_cmp(q));
    y.sort_by(|p, q| p.total_cmp(q));
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    (d, 1.628 * ((n + m) / (n * m)).sqrt())
}

/// `count` one-step draws from `state` through the split chain and through the model
/// kernel; returns the KS statistic on the first coordinate and its 1% critical value.
pub fn kernel_fidelity(
    spec: &ModelSpec,
    minorization: &MinorizationSpec,
    state: &[f64],
    count: usize,
    stream: &RngStream,
) -> Result<(f64, f64)> {
    let mut r1 = stream.fork(0);
    let mut r2 = stream.fork(1);
    let mut split = Vec::with_capacity(count);
    let mut direct = Vec::with_capacity(count);
    for _ in 0..count {
        split.push(split_step(state, minorization, &mut r1)?.0[0]);
        let mut chain = Chain::from_state(spec, state, &mut r2)?;
        chain.step(&mut r2)?;
        direct.push(chain.state()[0]);
    }
    Ok(ks_two_sample(&split, &direct))
}

/// Stationary probability of the small set estimated from a separate run.
pub fn small_set_probability(
    spec: &ModelSpec,
    minorization: &MinorizationSpec,
    n: usize,
    stream: &RngStream,
) -> Result<f64> {
    let mut rng = stream.fork(u64::MAX - 4);
    let path = crate::models::simulate_path(spec, n, spec.default_burn_in(), &mut rng)?;
    Ok((0..n).filter(|&i| minorization.contains(path.row(i))).count() as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Var1Spec;
    use crate::randkit::derive_stream;

    fn check_floor(c: Coord, r: f64) {
        // floor integrates to epsilon and sits below every shifted density
        let eps = c.epsilon(r);
        let (lo, hi, n) = (-400.0, 400.0, 800_000);
        let h = (hi - lo) / n as f64;
        let mass: f64 = (0..n).map(|i| c.floor_density(lo + (i as f64 + 0.5) * h, r) * h).sum();
        assert!((mass - eps).abs() < 2e-3, "{c:?}: {mass} vs {eps}");
        for &u in &[-r, -0.3 * r, 0.0, 0.7 * r, r] {
            for i in 0..2000 {
                let y = -20.0 + 0.02 * i as f64;
                assert!(c.floor_density(y, r) <= c.density(y - u) + 1e-15);
            }
        }
    }

    #[test]
    fn floors_are_minorants() {
        check_floor(Coord::Pareto { alpha: 1.5, scale: 1.0 }, 0.8);
        check_floor(Coord::SymPareto { alpha: 1.5, scale: 1.0, p: 0.3 }, 0.5);
        check_floor(Coord::Gaussian { mean: 0.4, sd: 1.2 }, 1.0);
    }

    #[test]
    fn floor_sampler_mean() {
        let c = Coord::Gaussian { mean: 0.0, sd: 1.0 };
        let r = 0.7;
        let mut rng = derive_stream(4, 4);
        let n = 200_000;
        let m: f64 = (0..n).map(|_| c.sample_floor(r, &mut rng).abs()).sum::<f64>() / n as f64;
        // E|Y| under density phi(|y| + r) / eps
        let h = 1e-4;
        let eps = c.epsilon(r);
        let exact: f64 = (0..200_000)
            .map(|i| {
                let y = (i as f64 + 0.5) * h;
                2.0 * y * c.floor_density(y, r) * h
            })
            .sum::<f64>()
            / eps;
        assert!((m - exact).abs() < 0.01, "{m} vs {exact}");
    }

    #[test]
    fn outside_never_regenerates() {
        let spec = ModelSpec::Var1(Var1Spec::scalar(0.5, TailLaw::pareto(1.5).unwrap()).unwrap());
        let m = MinorizationSpec::new(&spec, 3.0, None).unwrap();
        let mut rng = derive_stream(1, 1);
        for _ in 0..1000 {
            assert!(!split_step(&[10.0], &m, &mut rng).unwrap().1);
        }
    }

    #[test]
    fn epsilon_override_checked() {
        let spec = ModelSpec::Var1(Var1Spec::scalar(0.5, TailLaw::pareto(1.5).unwrap()).unwrap());
        let m = MinorizationSpec::new(&spec, 2.0, None).unwrap();
        assert!((m.epsilon_max - 3f64.powf(-1.5)).abs() < 1e-12);
        assert!(MinorizationSpec::new(&spec, 2.0, Some(0.9)).is_err());
        assert!(MinorizationSpec::new(&spec, 2.0, Some(0.1)).is_ok());
    }

    #[test]
    fn ks_statistic_of_shift() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..100).map(|i| i as f64 + 50.0).collect();
        assert!((ks_two_sample(&a, &b).0 - 0.5).abs() < 1e-12);
        assert_eq!(ks_two_sample(&a, &a).0, 0.0);
    }
}
