//! Special functions, quadrature and root finding shared across modules.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn erfc(x: f64) -> f64 {
    statrs::function::erf::erfc(x)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `(1 - a) / (Gamma(2 - a) cos(pi a / 2))`, continuously extended by `2/pi` at `a = 1`.
///
/// It is also the constant `c` in `P(|X| > x) ~ c x^-a` for a standard symmetric stable `X`.
pub fn stable_tail_constant(alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-9 {
        return 1.0 / FRAC_PI_2;
    }
    (1.0 - alpha) / (gamma(2.0 - alpha) * (FRAC_PI_2 * alpha).cos())
}

/// Gauss-Hermite rule for expectations under the standard normal law,
/// `E g(N) ~ sum w_i g(x_i)`, built by the Golub-Welsch eigenvalue method.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let off = (k as f64).sqrt();
        jacobi[(k - 1, k)] = off;
        jacobi[(k, k - 1)] = off;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], v * v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// The 128-node rule used for Gaussian moment equations.
pub fn gauss_hermite_128() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite(128))
}

pub fn gaussian_expectation(g: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = gauss_hermite_128();
    nodes.iter().zip(weights).map(|(&x, &w)| w * g(x)).sum()
}

/// Positive root of `g` where `g(0) = 0`, `g` is convex and negative just right of 0,
/// as for `log E|A|^k` in Kesten-type moment equations.
///
/// The bracket is grown by doubling until `g > 0`, then bisected to `tol`.
pub fn positive_root(g: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
    let mut hi = 1.0;
    let mut g_hi = g(hi);
    while !(g_hi > 0.0) {
        if !g_hi.is_finite() {
            return Err(Error::Bracket(format!("moment function is not finite at {hi}")));
        }
        hi *= 2.0;
        if hi > 4096.0 {
            return Err(Error::NoRoot(
                "no sign change on the expanded bracket (0, 4096]".into(),
            ));
        }
        g_hi = g(hi);
    }
    if !g_hi.is_finite() {
        // shrink back into the finite region
        let mut lo = hi / 2.0;
        while lo > 1e-9 && !g(lo).is_finite() {
            lo /= 2.0;
        }
        return Err(Error::Bracket(format!(
            "moment function is not finite at bracket end {hi} (finite up to about {lo})"
        )));
    }
    let mut lo = hi / 2.0;
    loop {
        let v = g(lo);
        if v < 0.0 {
            break;
        }
        if lo < 1e-9 {
            return Err(Error::NoRoot(
                "moment function is nonnegative near zero; the log-moment slope is not negative"
                    .into(),
            ));
        }
        hi = lo;
        lo /= 2.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Positive part raised to `alpha`; zero at zero for every `alpha`.
#[inline]
pub fn pos_pow(x: f64, alpha: f64) -> f64 {
    if x > 0.0 {
        x.powf(alpha)
    } else {
        0.0
    }
}

pub fn two_pi() -> f64 {
    2.0 * PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments() {
        let (x, w) = gauss_hermite(128);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m0 - 1.0).abs() < 1e-12);
        assert!((m2 - 1.0).abs() < 1e-12);
        assert!((m4 - 3.0).abs() < 1e-10);
    }

    #[test]
    fn stable_constant_is_continuous_at_one() {
        let left = stable_tail_constant(1.0 - 1e-6);
        let right = stable_tail_constant(1.0 + 1e-6);
        assert!((left - 2.0 / PI).abs() < 1e-5);
        assert!((right - 2.0 / PI).abs() < 1e-5);
    }

    #[test]
    fn stable_constant_matches_reflection_form() {
        for &a in &[0.3, 0.5, 0.8, 1.2, 1.5, 1.9] {
            let alt = 2.0 * gamma(a) * (FRAC_PI_2 * a).sin() / PI;
            assert!((stable_tail_constant(a) - alt).abs() < 1e-12, "alpha {a}");
        }
    }

    #[test]
    fn pos_pow_at_zero() {
        assert_eq!(pos_pow(0.0, 0.5), 0.0);
        assert_eq!(pos_pow(-1.0, 2.0), 0.0);
        assert_eq!(pos_pow(4.0, 0.5), 2.0);
    }

    #[test]
    fn root_of_lognormal_moment() {
        let (mu, s2) = (-0.5f64, 0.5f64);
        let k = positive_root(|k| k * mu + 0.5 * k * k * s2, 1e-12).unwrap();
        assert!((k - 2.0).abs() < 1e-9);
    }

    #[test]
    fn root_missing() {
        assert!(matches!(positive_root(|k| -k, 1e-10), Err(Error::NoRoot(_))));
        assert!(matches!(positive_root(|k| k, 1e-10), Err(Error::NoRoot(_))));
    }
}
