//! Hill estimation, normalizing sequences, empirical tail process and angular measure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::PathMatrix;
use crate::randkit::{quantile_tail, TailLaw};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailFit {
    pub alpha_hat: f64,
    pub k_used: usize,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl TailFit {
    pub fn overlaps(&self, other: &TailFit) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }

    pub fn covers(&self, alpha: f64) -> bool {
        self.ci_low <= alpha && alpha <= self.ci_high
    }
}

/// Hill estimator on the top `k` order statistics of `|samples|`.
pub fn hill_estimate(samples: &[f64], k: usize) -> Result<TailFit> {
    let n = samples.len();
    if k < 2 || k >= n {
        return Err(Error::param(format!("k = {k} must satisfy 2 <= k < n = {n}")));
    }
    let mut abs: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    abs.select_nth_unstable_by(n - k - 1, |a, b| a.total_cmp(b));
    let threshold = abs[n - k - 1];
    if !(threshold > 0.0) {
        return Err(Error::DegenerateSample(
            "the (k+1)-th largest absolute value is zero".into(),
        ));
    }
    let mut top = abs[n - k..].to_vec();
    top.sort_by(|a, b| b.total_cmp(a));
    let sum: f64 = top.iter().map(|x| (x / threshold).ln()).sum();
    if !(sum > 0.0) {
        return Err(Error::DegenerateSample("top order statistics are all equal".into()));
    }
    let alpha_hat = k as f64 / sum;
    let half = 1.96 / (k as f64).sqrt();
    Ok(TailFit {
        alpha_hat,
        k_used: k,
        ci_low: alpha_hat * (1.0 - half),
        ci_high: alpha_hat * (1.0 + half),
    })
}

/// `floor(sqrt(n))`.
pub fn default_hill_k(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).max(2)
}

pub enum NormSource<'a> {
    Law(TailLaw),
    Samples(&'a [f64]),
}

/// `a_n` with `n P(|X| > a_n) ~ 1`: analytic for a law, the `ceil(m/n)`-th largest
/// absolute value for `m` samples.
pub fn normalizing_sequence(source: NormSource<'_>, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    match source {
        NormSource::Law(law) => quantile_tail(&law, n),
        NormSource::Samples(xs) => {
            let m = xs.len();
            if n as usize > m {
                return Err(Error::param(format!("n = {n} exceeds sample size {m}")));
            }
            let rank = m.div_ceil(n as usize);
            let mut abs: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
            abs.select_nth_unstable_by(m - rank, |a, b| a.total_cmp(b));
            Ok(abs[m - rank])
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalTailProcess {
    pub horizon: usize,
    pub dim: usize,
    /// Row-major `(T+1) x d` conditional means of `X_{t+s} / |X_t|`.
    pub mean_profile: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub exceedance_count: usize,
    pub threshold: f64,
}

impl EmpiricalTailProcess {
    pub fn row(&self, s: usize) -> &[f64] {
        &self.mean_profile[s * self.dim..(s + 1) * self.dim]
    }

    pub fn se_row(&self, s: usize) -> &[f64] {
        &self.std_errors[s * self.dim..(s + 1) * self.dim]
    }
}

/// Forward profiles after every time whose norm exceeds the `q`-quantile of the norms.
/// Overlapping windows are all used.
pub fn empirical_tail_process(path: &PathMatrix, q: f64, horizon: usize) -> Result<EmpiricalTailProcess> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::param("quantile must lie in (0, 1)"));
    }
    if path.rows <= horizon {
        return Err(Error::param("path must be longer than the horizon"));
    }
    let norms = path.norms();
    let mut sorted = norms.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let idx = ((q * path.rows as f64).ceil() as usize).clamp(1, path.rows) - 1;
    let threshold = sorted[idx];
    let d = path.dim;
    let width = (horizon + 1) * d;
    let mut sum = vec![0.0; width];
    let mut sum2 = vec![0.0; width];
    let mut count = 0usize;
    for t in 0..path.rows - horizon {
        if norms[t] <= threshold {
            continue;
        }
        count += 1;
        for s in 0..=horizon {
            for (j, x) in path.row(t + s).iter().enumerate() {
                let v = x / norms[t];
                sum[s * d + j] += v;
                sum2[s * d + j] += v * v;
            }
        }
    }
    if count < 30 {
        return Err(Error::InsufficientExceedances {
            found: count,
            needed: 30,
        });
    }
    let c = count as f64;
    let mean_profile: Vec<f64> = sum.iter().map(|s| s / c).collect();
    let std_errors = sum2
        .iter()
        .zip(&mean_profile)
        .map(|(s2, m)| ((s2 / c - m * m).max(0.0) / (c - 1.0)).sqrt())
        .collect();
    Ok(EmpiricalTailProcess {
        horizon,
        dim: d,
        mean_profile,
        std_errors,
        exceedance_count: count,
        threshold,
    })
}

/// Discrete measure on the unit sphere.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngularMeasure {
    pub atoms: Vec<(Vec<f64>, f64)>,
    pub total: f64,
}

impl AngularMeasure {
    /// Merges atoms that coincide to `1e-12` and normalizes the total mass to one.
    pub fn from_weighted(points: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let mut atoms: Vec<(Vec<f64>, f64)> = Vec::new();
        for (u, w) in points {
            if w < 0.0 {
                return Err(Error::param("angular weights must be nonnegative"));
            }
            match atoms
                .iter_mut()
                .find(|(v, _)| v.iter().zip(&u).all(|(a, b)| (a - b).abs() <= 1e-12))
            {
                Some(atom) => atom.1 += w,
                None => atoms.push((u, w)),
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateSample("angular measure has no mass".into()));
        }
        for a in atoms.iter_mut() {
            a.1 /= total;
        }
        Ok(AngularMeasure { atoms, total: 1.0 })
    }

    /// Mass of the atoms satisfying `pred`.
    pub fn mass_where(&self, pred: impl Fn(&[f64]) -> bool) -> f64 {
        self.atoms.iter().filter(|(u, _)| pred(u)).map(|a| a.1).sum()
    }

    /// Masses of `buckets` equal angular sectors of the circle, starting at angle 0.
    pub fn circle_buckets(&self, buckets: usize) -> Vec<f64> {
        let mut out = vec![0.0; buckets];
        for (u, w) in &self.atoms {
            out[circle_bucket(u, buckets)] += w;
        }
        out
    }

    /// `integral f dP`.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.atoms.iter().map(|(u, w)| w * f(u)).sum()
    }
}

/// Sector index of a planar direction, with sectors centered on the angles `2 pi j / buckets`.
pub fn circle_bucket(u: &[f64], buckets: usize) -> usize {
    let tau = std::f64::consts::TAU;
    let width = tau / buckets as f64;
    let angle = (u[1].atan2(u[0]) + 0.5 * width).rem_euclid(tau);
    ((angle / width) as usize).min(buckets - 1)
}

/// Empirical law of `X / |X|` over the `k` largest rows by norm.
pub fn angular_measure(vectors: &PathMatrix, k: usize) -> Result<AngularMeasure> {
    let m = vectors.rows;
    if k == 0 || k > m {
        return Err(Error::param(format!("k = {k} must lie in 1..={m}")));
    }
    let norms = vectors.norms();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let points = order[..k]
        .iter()
        .filter(|&&i| norms[i] > 0.0)
        .map(|&i| (vectors.row(i).iter().map(|x| x / norms[i]).collect(), 1.0))
        .collect();
    AngularMeasure::from_weighted(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hill_bounds() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        assert!(hill_estimate(&xs, 10).is_err());
        assert!(hill_estimate(&xs, 1).is_err());
        assert!(matches!(
            hill_estimate(&[3.0; 50], 5),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn empirical_quantile_of_ranks() {
        let xs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(normalizing_sequence(NormSource::Samples(&xs), 100).unwrap(), 100.0);
        assert_eq!(normalizing_sequence(NormSource::Samples(&xs), 10).unwrap(), 91.0);
        assert!(normalizing_sequence(NormSource::Samples(&xs), 101).is_err());
    }

    #[test]
    fn ray_gives_single_atom() {
        let path = PathMatrix::from_rows(&[vec![1.0, 0.0], vec![5.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let m = angular_measure(&path, 3).unwrap();
        assert_eq!(m.atoms, vec![(vec![1.0, 0.0], 1.0)]);
        assert!(angular_measure(&path, 0).is_err());
    }

    #[test]
    fn buckets_center_on_axes() {
        assert_eq!(circle_bucket(&[1.0, 0.0], 8), 0);
        assert_eq!(circle_bucket(&[0.0, 1.0], 8), 2);
        assert_eq!(circle_bucket(&[-1.0, 0.0], 8), 4);
        assert_eq!(circle_bucket(&[0.0, -1.0], 8), 6);
        assert_eq!(circle_bucket(&[1.0, -1e-9], 8), 0);
    }
}
