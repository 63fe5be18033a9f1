//! Replica-parallel maps whose results do not depend on the worker count.

use rayon::prelude::*;

use crate::error::Result;
use crate::randkit::RngStream;

/// Runs `f(i, stream_i)` for `i in 0..count`, where `stream_i = stream.fork(i)`.
/// Results come back in index order, so any later reduction is sequential and fixed.
pub fn replicate<T, F>(stream: &RngStream, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut RngStream) -> Result<T> + Sync + Send,
{
    (0..count)
        .into_par_iter()
        .with_min_len(64)
        .map(|i| {
            let mut rng = stream.fork(i as u64);
            f(i, &mut rng)
        })
        .collect()
}

/// Builds a dedicated pool when `threads` is given, otherwise runs on the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, job: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(k) if k > 0 => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(job),
            Err(_) => job(),
        },
        _ => job(),
    }
}

/// Mean and plug-in standard error, accumulated in index order.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Delete-a-group jackknife standard error of the mean.
pub fn jackknife_se(values: &[f64], groups: usize) -> f64 {
    let n = values.len();
    let g = groups.min(n);
    if g < 2 {
        return f64::NAN;
    }
    let total: f64 = values.iter().sum();
    let mut partial = Vec::with_capacity(g);
    for j in 0..g {
        let (lo, hi) = (j * n / g, (j + 1) * n / g);
        let group: f64 = values[lo..hi].iter().sum();
        partial.push((total - group) / (n - (hi - lo)) as f64);
    }
    let m = partial.iter().sum::<f64>() / g as f64;
    let ss: f64 = partial.iter().map(|p| (p - m).powi(2)).sum();
    ((g as f64 - 1.0) / g as f64 * ss).sqrt()
}
