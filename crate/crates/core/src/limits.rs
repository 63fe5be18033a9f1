//! Monte Carlo checks of the stable central limit theorem, the precise large deviation
//! relation on `Lambda_n`, and the Gaussian central limit theorem over regeneration cycles.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::cluster::Direction;
use crate::error::{Error, Result};
use crate::models::{dot, simulate_path, simulate_sum, MarginalTail, ModelSpec};
use crate::parallel::replicate;
use crate::randkit::RngStream;
use crate::regen::RegenBlocks;
use crate::special::{pos_pow, stable_tail_constant};
use crate::tailstats::{default_hill_k, hill_estimate};

/// Direction-indexed pairs `(b(theta), b(-theta))` of a stable limit.
#[derive(Clone, Debug, Serialize)]
pub struct StableLawParams {
    pub alpha: f64,
    pub pairs: Vec<(Direction, f64, f64)>,
    pub c_alpha: f64,
}

impl StableLawParams {
    pub fn new(alpha: f64, pairs: Vec<(Direction, f64, f64)>) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::OutOfRegime(format!(
                "stable limits need alpha in (0, 2), got {alpha}"
            )));
        }
        if pairs.iter().any(|(_, p, m)| !(*p >= 0.0 && *m >= 0.0)) {
            return Err(Error::param("b values must be nonnegative"));
        }
        Ok(StableLawParams {
            alpha,
            pairs,
            c_alpha: stable_tail_constant(alpha),
        })
    }

    fn pair(&self, theta: &Direction) -> Result<(f64, f64)> {
        self.pairs
            .iter()
            .find(|(d, _, _)| d.theta.iter().zip(&theta.theta).all(|(a, b)| (a - b).abs() < 1e-9))
            .map(|(_, p, m)| (*p, *m))
            .ok_or_else(|| Error::param("direction has no stored (b(theta), b(-theta)) pair"))
    }

    /// `E|theta' Theta_0|^alpha = 0` convention: both values zero marks a degenerate direction.
    pub fn is_degenerate(&self, theta: &Direction) -> bool {
        matches!(self.pair(theta), Ok((p, m)) if p == 0.0 && m == 0.0)
    }
}

/// `exp{-|x|^alpha / C_alpha [(b+ + b-) - i sign(x) (b+ - b-) tan(pi alpha / 2)]}`.
pub fn stable_cf_value(alpha: f64, b_plus: f64, b_minus: f64, x: f64) -> Result<Complex64> {
    if x == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let asym = b_plus - b_minus;
    let skew = if (alpha - 1.0).abs() < 1e-12 {
        if asym.abs() > 1e-12 * (1.0 + b_plus + b_minus) {
            return Err(Error::UnsupportedCase(
                "alpha = 1 needs b(theta) = b(-theta)".into(),
            ));
        }
        0.0
    } else {
        x.signum() * asym * (std::f64::consts::FRAC_PI_2 * alpha).tan()
    };
    let scale = x.abs().powf(alpha) / stable_tail_constant(alpha);
    Ok((-Complex64::new(scale * (b_plus + b_minus), -scale * skew)).exp())
}

pub fn stable_cf(params: &StableLawParams, theta: &Direction, x: f64) -> Result<Complex64> {
    let (p, m) = params.pair(theta)?;
    stable_cf_value(params.alpha, p, m, x)
}

#[derive(Clone, Debug, Serialize)]
pub struct CfComparison {
    pub theta: Direction,
    pub grid: Vec<f64>,
    pub empirical: Vec<(f64, f64)>,
    pub theoretical: Vec<(f64, f64)>,
    pub sup_abs_gap: f64,
    pub mc_band: f64,
}

impl CfComparison {
    pub fn passes(&self) -> bool {
        self.sup_abs_gap <= self.mc_band
    }
}

/// How partial sums were centered.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "mean", rename_all = "snake_case")]
pub enum Centering {
    None,
    Exact(Vec<f64>),
    LongRun(Vec<f64>),
}

impl Centering {
    fn mean(&self, d: usize) -> Vec<f64> {
        match self {
            Centering::None => vec![0.0; d],
            Centering::Exact(m) | Centering::LongRun(m) => m.clone(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Centering::None => "none",
            Centering::Exact(_) => "exact",
            Centering::LongRun(_) => "long_run",
        }
    }
}

/// No centering for `alpha <= 1`; the exact mean when known, else the mean of an
/// independent run of length `long_run`, for `alpha > 1`.
pub fn choose_centering(spec: &ModelSpec, alpha: f64, long_run: usize, stream: &RngStream) -> Result<Centering> {
    if alpha <= 1.0 {
        return Ok(Centering::None);
    }
    if let Some(m) = spec.mean() {
        return Ok(Centering::Exact(m));
    }
    let mut rng = stream.fork(u64::MAX - 2);
    let s = simulate_sum(spec, long_run, spec.default_burn_in(), &mut rng)?;
    Ok(Centering::LongRun(s.iter().map(|v| v / long_run as f64).collect()))
}

/// `a_n = (n c)^{1/alpha}` from the marginal tail constant.
pub fn normalizing_constant(tail: &MarginalTail, n: u64) -> f64 {
    (n as f64 * tail.constant).powf(1.0 / tail.alpha)
}

/// Power-law tail `(alpha_hat, c_hat)` fitted by Hill on an independent stationary run,
/// with `c_hat = (k / m) X_(k+1)^alpha_hat`.
pub fn fitted_marginal_tail(spec: &ModelSpec, length: usize, stream: &RngStream) -> Result<MarginalTail> {
    let mut rng = stream.fork(u64::MAX - 3);
    let path = simulate_path(spec, length, spec.default_burn_in(), &mut rng)?;
    let norms = path.norms();
    let k = default_hill_k(length);
    let fit = hill_estimate(&norms, k)?;
    let mut sorted = norms;
    sorted.sort_by(|a, b| b.total_cmp(a));
    let c = k as f64 / length as f64 * sorted[k].powf(fit.alpha_hat);
    Ok(MarginalTail::power_law(fit.alpha_hat, c))
}

#[derive(Clone, Debug)]
pub struct StableCheckConfig {
    pub n: usize,
    pub reps: usize,
    pub burn_in: usize,
    pub a_n: f64,
    pub centering: Centering,
}

pub fn cf_grid() -> Vec<f64> {
    (0..61).map(|i| -3.0 + 0.1 * i as f64).collect()
}

/// Empirical characteristic function of `a_n^{-1} theta'(S_n - n mu)` against the stable
/// limit, one comparison per direction in `params`.
pub fn stable_check(
    spec: &ModelSpec,
    params: &StableLawParams,
    cfg: &StableCheckConfig,
    stream: &RngStream,
) -> Result<Vec<CfComparison>> {
    if cfg.reps < 2 || cfg.n == 0 {
        return Err(Error::param("stable check needs n >= 1 and reps >= 2"));
    }
    if !(cfg.a_n > 0.0) {
        return Err(Error::param("a_n must be positive"));
    }
    let d = spec.dim();
    let mu = cfg.centering.mean(d);
    let sums = replicate(stream, cfg.reps, |_, rng| {
        let mut s = simulate_sum(spec, cfg.n, cfg.burn_in, rng)?;
        for (v, m) in s.iter_mut().zip(&mu) {
            *v -= cfg.n as f64 * m;
        }
        Ok(s)
    })?;
    let grid = cf_grid();
    let mc_band = 3.0 * (2.0 / cfg.reps as f64).sqrt();
    let mut out = Vec::with_capacity(params.pairs.len());
    for (theta, bp, bm) in &params.pairs {
        let proj: Vec<f64> = sums.iter().map(|s| dot(&theta.theta, s) / cfg.a_n).collect();
        let mut empirical = Vec::with_capacity(grid.len());
        let mut theoretical = Vec::with_capacity(grid.len());
        let mut gap = 0.0f64;
        for &x in &grid {
            let (mut re, mut im) = (0.0, 0.0);
            for y in &proj {
                let (s, c) = (x * y).sin_cos();
                re += c;
                im += s;
            }
            let e = Complex64::new(re, im) / cfg.reps as f64;
            let t = stable_cf_value(params.alpha, *bp, *bm, x)?;
            gap = gap.max((e - t).norm());
            empirical.push((e.re, e.im));
            theoretical.push((t.re, t.im));
        }
        out.push(CfComparison {
            theta: theta.clone(),
            grid: grid.clone(),
            empirical,
            theoretical,
            sup_abs_gap: gap,
            mc_band,
        });
    }
    Ok(out)
}

/// `(b_n, c_n)` with `b_n = n^{1/alpha + eps}` (`alpha < 2`) or `n^{1/2 + eps}`, and
/// `c_n = c_factor b_n`.
pub fn ldp_region(n: usize, alpha: f64, eps: f64, c_factor: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0) || !(c_factor > 1.0) || !(alpha > 0.0) {
        return Err(Error::param("region needs eps > 0, c_factor > 1 and alpha > 0"));
    }
    let rate = if alpha < 2.0 { 1.0 / alpha } else { 0.5 };
    let b = (n as f64).powf(rate + eps);
    Ok((b, b * c_factor))
}

#[derive(Clone, Debug)]
pub struct LdpConfig {
    pub n: usize,
    pub region: (f64, f64),
    pub grid_size: usize,
    pub reps: usize,
    pub burn_in: usize,
    pub centering: Centering,
    pub min_exceedances: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LdpScanResult {
    pub n: usize,
    pub theta: Direction,
    pub xs: Vec<f64>,
    pub ratios: Vec<f64>,
    pub ratio_se: Vec<f64>,
    pub exceedances: Vec<u64>,
    pub target: f64,
    pub sup_dev: f64,
    pub centering: Centering,
}

impl LdpScanResult {
    /// Grid points whose ratio is within `k` binomial standard errors of the target.
    pub fn within_band(&self, k: f64) -> Vec<bool> {
        self.ratios
            .iter()
            .zip(&self.ratio_se)
            .map(|(r, se)| (r - self.target).abs() <= k * se)
            .collect()
    }

    /// `ratio(x_j) x_j^alpha / ratio(x_0) x_0^alpha` scaled by the tail ratio; equals one
    /// when `P(theta'S_n > x)` scales like `x^-alpha`.
    pub fn homogeneity(&self, alpha: f64, tail: &MarginalTail) -> Vec<f64> {
        let p: Vec<f64> = self
            .xs
            .iter()
            .zip(&self.ratios)
            .map(|(x, r)| r * tail.survival(*x) * x.powf(alpha))
            .collect();
        p.iter().map(|v| v / p[0]).collect()
    }
}

/// Log-spaced grid strictly inside `(b_n, c_n)`.
pub fn ldp_grid(region: (f64, f64), size: usize) -> Vec<f64> {
    let (b, c) = region;
    let ratio = (c / b).ln();
    (1..=size)
        .map(|j| b * (ratio * j as f64 / (size + 1) as f64).exp())
        .collect()
}

/// Ratios `P(theta'S_n > x) / (n P(|X| > x))` over the grid by direct counting over
/// `reps` independent paths.
pub fn ldp_scan(
    spec: &ModelSpec,
    theta: &Direction,
    target: f64,
    tail: &MarginalTail,
    cfg: &LdpConfig,
    stream: &RngStream,
) -> Result<LdpScanResult> {
    let (b, c) = cfg.region;
    if !(b > 0.0 && c > b) {
        return Err(Error::Region(format!("region ({b}, {c}) is empty")));
    }
    let alpha = tail.alpha;
    let rate = if alpha < 2.0 { 1.0 / alpha } else { 0.5 };
    let floor = (cfg.n as f64).powf(rate);
    if b <= floor {
        return Err(Error::Region(format!(
            "b_n = {b} does not exceed n^{rate:.4} = {floor}; the region must grow faster"
        )));
    }
    if cfg.grid_size == 0 || cfg.reps == 0 {
        return Err(Error::param("grid size and replica count must be positive"));
    }
    if theta.dim() != spec.dim() {
        return Err(Error::param("direction and model dimensions differ"));
    }
    let mu = cfg.centering.mean(spec.dim());
    let mut values = replicate(stream, cfg.reps, |_, rng| {
        let s = simulate_sum(spec, cfg.n, cfg.burn_in, rng)?;
        let centered: Vec<f64> = s.iter().zip(&mu).map(|(v, m)| v - cfg.n as f64 * m).collect();
        Ok(dot(&theta.theta, &centered))
    })?;
    values.sort_by(|a, b| a.total_cmp(b));
    let xs = ldp_grid(cfg.region, cfg.grid_size);
    let r = cfg.reps as f64;
    let mut ratios = Vec::with_capacity(xs.len());
    let mut ratio_se = Vec::with_capacity(xs.len());
    let mut exceedances = Vec::with_capacity(xs.len());
    for &x in &xs {
        let count = (values.len() - values.partition_point(|v| *v <= x)) as u64;
        if count < cfg.min_exceedances {
            return Err(Error::WidenReplicas { x, count });
        }
        let p = count as f64 / r;
        let denom = cfg.n as f64 * tail.survival(x);
        ratios.push(p / denom);
        ratio_se.push((p * (1.0 - p) / r).sqrt() / denom);
        exceedances.push(count);
    }
    let sup_dev = ratios.iter().map(|q| (q - target).abs()).fold(0.0, f64::max);
    Ok(LdpScanResult {
        n: cfg.n,
        theta: theta.clone(),
        xs,
        ratios,
        ratio_se,
        exceedances,
        target,
        sup_dev,
        centering: cfg.centering.clone(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussianCltReport {
    pub sigma_hat: Vec<Vec<f64>>,
    pub batch_sigma: Vec<Vec<f64>>,
    pub rel_gap: f64,
    pub cycles: usize,
    pub batch_size: usize,
}

/// Long-run covariance from complete cycles, `sum S(i) S(i)' / sum |cycle i|`, against
/// non-overlapping batch means of size `floor(sqrt(n))` on the raw path. Both are
/// centered by the path mean.
pub fn gaussian_sigma(blocks: &RegenBlocks) -> Result<GaussianCltReport> {
    let cycles = blocks.block_sums.len();
    if cycles < 30 {
        return Err(Error::InsufficientCycles {
            found: cycles,
            needed: 30,
        });
    }
    let path = &blocks.path;
    let d = path.dim;
    let n = path.rows;
    let mean: Vec<f64> = path.sum().iter().map(|s| s / n as f64).collect();
    let mut sig = DMatrix::<f64>::zeros(d, d);
    let mut total_len = 0usize;
    for (s, &len) in blocks.block_sums.iter().zip(&blocks.cycle_lengths) {
        let c: Vec<f64> = s.iter().zip(&mean).map(|(v, m)| v - len as f64 * m).collect();
        for i in 0..d {
            for j in 0..d {
                sig[(i, j)] += c[i] * c[j];
            }
        }
        total_len += len;
    }
    sig /= total_len as f64;

    let size = ((n as f64).sqrt().floor() as usize).max(1);
    let batches = n / size;
    let mut bsig = DMatrix::<f64>::zeros(d, d);
    for b in 0..batches {
        let mut m = vec![0.0; d];
        for t in b * size..(b + 1) * size {
            for (acc, v) in m.iter_mut().zip(path.row(t)) {
                *acc += v;
            }
        }
        let c: Vec<f64> = m.iter().zip(&mean).map(|(s, mu)| s / size as f64 - mu).collect();
        for i in 0..d {
            for j in 0..d {
                bsig[(i, j)] += c[i] * c[j];
            }
        }
    }
    bsig *= size as f64 / batches as f64;
    let gap = op_norm(&(&sig - &bsig)) / op_norm(&bsig);
    let to_rows = |m: &DMatrix<f64>| (0..d).map(|i| (0..d).map(|j| m[(i, j)]).collect()).collect();
    Ok(GaussianCltReport {
        sigma_hat: to_rows(&sig),
        batch_sigma: to_rows(&bsig),
        rel_gap: gap,
        cycles,
        batch_size: size,
    })
}

fn op_norm(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub weights: Vec<f64>,
    pub fitted_residual: f64,
    pub held_out: Vec<(f64, f64)>,
    pub max_held_out_gap: f64,
}

/// Fits a nonnegative discrete `Gamma_alpha` on `atoms` to
/// `b(theta) = C_alpha sum_j w_j (theta' s_j)_+^alpha` over `fit`, then predicts `b` on `held_out`.
pub fn spectral_closure(
    alpha: f64,
    fit: &[(Direction, f64)],
    atoms: &[Direction],
    held_out: &[(Direction, f64)],
) -> Result<ClosureReport> {
    if fit.is_empty() || atoms.is_empty() {
        return Err(Error::param("closure needs fit directions and atoms"));
    }
    let c = stable_tail_constant(alpha);
    let design = |rows: &[(Direction, f64)]| {
        DMatrix::from_fn(rows.len(), atoms.len(), |i, j| {
            c * pos_pow(dot(&rows[i].0.theta, &atoms[j].theta), alpha)
        })
    };
    let m = design(fit);
    let target: Vec<f64> = fit.iter().map(|f| f.1).collect();
    let w = nnls(&m, &target);
    let resid = (0..fit.len())
        .map(|i| (dot(&m.row(i).iter().copied().collect::<Vec<_>>(), &w) - target[i]).powi(2))
        .sum::<f64>()
        .sqrt();
    let h = design(held_out);
    let pairs: Vec<(f64, f64)> = (0..held_out.len())
        .map(|i| {
            let pred: f64 = (0..atoms.len()).map(|j| h[(i, j)] * w[j]).sum();
            (held_out[i].1, pred)
        })
        .collect();
    let gap = pairs.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(ClosureReport {
        weights: w,
        fitted_residual: resid,
        held_out: pairs,
        max_held_out_gap: gap,
    })
}

/// Nonnegative least squares by cyclic coordinate descent.
fn nnls(m: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    let k = m.ncols();
    let mut w = vec![0.0; k];
    let mut r: Vec<f64> = y.to_vec();
    let col_norm: Vec<f64> = (0..k).map(|j| m.column(j).norm_squared()).collect();
    for _ in 0..20_000 {
        let mut change = 0.0f64;
        for j in 0..k {
            if col_norm[j] == 0.0 {
                continue;
            }
            let g: f64 = (0..m.nrows()).map(|i| m[(i, j)] * r[i]).sum();
            let new = (w[j] + g / col_norm[j]).max(0.0);
            let delta = new - w[j];
            if delta != 0.0 {
                for (i, ri) in r.iter_mut().enumerate() {
                    *ri -= delta * m[(i, j)];
                }
                w[j] = new;
                change = change.max(delta.abs());
            }
        }
        if change < 1e-14 {
            break;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_pair_is_real() {
        let v = stable_cf_value(1.5, 0.7, 0.7, 1.3).unwrap();
        assert!(v.im.abs() < 1e-15);
        let expected = (-2.0 * 0.7 * 1.3f64.powf(1.5) / stable_tail_constant(1.5)).exp();
        assert!((v.re - expected).abs() < 1e-15);
    }

    #[test]
    fn half_alpha_example() {
        let v = stable_cf_value(0.5, 1.0, 0.0, 1.0).unwrap();
        let c = 0.5 / (crate::special::gamma(1.5) * std::f64::consts::FRAC_PI_4.cos());
        let expected = (-Complex64::new(1.0, -1.0) / c).exp();
        assert!((v - expected).norm() < 1e-12);
    }

    #[test]
    fn alpha_one_needs_symmetry() {
        assert!(stable_cf_value(1.0, 1.0, 0.5, 1.0).is_err());
        assert!(stable_cf_value(1.0, 1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn grid_is_inside_region() {
        let g = ldp_grid((10.0, 1000.0), 5);
        assert!(g[0] > 10.0 && g[4] < 1000.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn nnls_recovers_nonnegative_weights() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let w = nnls(&m, &[1.0, 2.0, 3.0]);
        assert!((w[0] - 1.0).abs() < 1e-10 && (w[1] - 2.0).abs() < 1e-10);
        let w = nnls(&m, &[-1.0, 2.0, 1.0]);
        assert!(w[0] == 0.0);
    }
}
