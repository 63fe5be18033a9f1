use super::{radius_draw, TailProcessPath, TailProcessSampler};
use crate::error::{Error, Result};
use crate::randkit::{derive_stream, RngStream};
use crate::special::{gaussian_expectation, positive_root};

/// Standardized innovation law (mean 0, variance 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GarchNoise {
    Gaussian,
    /// Student t with `nu > 2` degrees of freedom, rescaled to unit variance.
    StudentT { nu: f64 },
}

impl GarchNoise {
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            GarchNoise::Gaussian => rng.normal(),
            GarchNoise::StudentT { nu } => {
                use rand_distr::{ChiSquared, Distribution};
                let chi = ChiSquared::new(nu).expect("validated degrees of freedom");
                let t = rng.normal() / (chi.sample(rng) / nu).sqrt();
                t * ((nu - 2.0) / nu).sqrt()
            }
        }
    }

    /// `E g(Z)`: Gauss-Hermite for Gaussian noise, otherwise a fixed-stream Monte Carlo
    /// average over `10^6` draws.
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        match self {
            GarchNoise::Gaussian => gaussian_expectation(g),
            GarchNoise::StudentT { .. } => {
                let mut rng = derive_stream(0x6a5c, 0x7d);
                let n = 1_000_000;
                (0..n).map(|_| g(self.sample(&mut rng))).sum::<f64>() / n as f64
            }
        }
    }
}

/// GARCH(1,1): `X_t = sigma_t Z_t`, `sigma_t^2 = alpha0 + alpha1 X_{t-1}^2 + beta1 sigma_{t-1}^2`.
///
/// The chain is `(sigma_t, X_t)`.
#[derive(Clone, Debug)]
pub struct Garch11Spec {
    pub alpha0: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub noise: GarchNoise,
}

impl Garch11Spec {
    pub fn new(alpha0: f64, alpha1: f64, beta1: f64, noise: GarchNoise) -> Result<Self> {
        let spec = Garch11Spec {
            alpha0,
            alpha1,
            beta1,
            noise,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn gaussian(alpha0: f64, alpha1: f64, beta1: f64) -> Result<Self> {
        Self::new(alpha0, alpha1, beta1, GarchNoise::Gaussian)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha0", self.alpha0),
            ("alpha1", self.alpha1),
            ("beta1", self.beta1),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(format!("{name} must be positive, got {v}")));
            }
        }
        if let GarchNoise::StudentT { nu } = self.noise {
            if !(nu > 2.0) {
                return Err(Error::param("student t noise needs nu > 2"));
            }
        }
        let lyap = self.lyapunov();
        if !(lyap < 0.0) {
            return Err(Error::Divergence(format!(
                "E log(alpha1 Z^2 + beta1) = {lyap} is not negative"
            )));
        }
        Ok(())
    }

    /// `E log(alpha1 Z^2 + beta1)`.
    pub fn lyapunov(&self) -> f64 {
        let (a1, b1) = (self.alpha1, self.beta1);
        self.noise.expect(|z| (a1 * z * z + b1).ln())
    }

    /// `E(alpha1 Z^2 + beta1)^(k/2)`.
    pub fn moment(&self, k: f64) -> f64 {
        let (a1, b1) = (self.alpha1, self.beta1);
        self.noise.expect(|z| (a1 * z * z + b1).powf(k / 2.0))
    }

    pub fn tail_index(&self) -> Result<f64> {
        positive_root(|k| self.moment(k).ln(), 1e-10)
    }

    /// Geometric rate of the volatility recursion, `exp(E log A / 2)`.
    pub fn contraction(&self) -> Result<f64> {
        Ok((0.5 * self.lyapunov()).exp())
    }

    pub fn tail_sampler(&self) -> Result<GarchTailSampler> {
        if self.noise != GarchNoise::Gaussian {
            return Err(Error::UnsupportedCase(
                "the GARCH tail process sampler needs Gaussian noise".into(),
            ));
        }
        let alpha = self.tail_index()?;
        Ok(GarchTailSampler {
            alpha1: self.alpha1,
            beta1: self.beta1,
            alpha,
            tilt: TiltedNormal::new(alpha),
        })
    }
}

/// Draws from the density proportional to `(1 + z^2)^(alpha/2) phi(z)` by rejection
/// from `N(0, 1 + alpha/2)`.
#[derive(Clone, Copy, Debug)]
struct TiltedNormal {
    alpha: f64,
    sd: f64,
    c: f64,
    log_max: f64,
}

impl TiltedNormal {
    fn new(alpha: f64) -> Self {
        let s2 = 1.0 + alpha / 2.0;
        let c = 1.0 - 1.0 / s2;
        let u_star = (alpha / c - 1.0).max(0.0);
        let log_max = 0.5 * alpha * (1.0 + u_star).ln() - 0.5 * c * u_star;
        TiltedNormal {
            alpha,
            sd: s2.sqrt(),
            c,
            log_max,
        }
    }

    fn sample(&self, rng: &mut RngStream) -> f64 {
        loop {
            let z = self.sd * rng.normal();
            let u = z * z;
            let log_ratio = 0.5 * self.alpha * (1.0 + u).ln() - 0.5 * self.c * u;
            if rng.uniform().ln() <= log_ratio - self.log_max {
                return z;
            }
        }
    }
}

/// Spectral tail process of `(sigma_t, X_t)`:
/// `Theta_t = sqrt(Pi_t) (1, Z_t) / sqrt(1 + Z_0^2)` with `Z_0` size-biased by `(1 + Z_0^2)^(alpha/2)`.
pub struct GarchTailSampler {
    alpha1: f64,
    beta1: f64,
    alpha: f64,
    tilt: TiltedNormal,
}

impl TailProcessSampler for GarchTailSampler {
    fn dim(&self) -> usize {
        2
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn sample(&self, horizon: usize, rng: &mut RngStream) -> Result<TailProcessPath> {
        let z0 = self.tilt.sample(rng);
        let r0 = (1.0 + z0 * z0).sqrt();
        let mut theta = Vec::with_capacity(2 * (horizon + 1));
        theta.push(1.0 / r0);
        theta.push(z0 / r0);
        let mut pi = 1.0;
        let mut z_prev = z0;
        for _ in 0..horizon {
            pi *= self.alpha1 * z_prev * z_prev + self.beta1;
            let z = rng.normal();
            let s = pi.sqrt() / r0;
            theta.push(s);
            theta.push(s * z);
            z_prev = z;
        }
        Ok(TailProcessPath {
            theta,
            dim: 2,
            pareto_radius: radius_draw(rng, self.alpha),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrated_case_has_index_two() {
        let spec = Garch11Spec::gaussian(0.1, 0.3, 0.7).unwrap();
        assert!((spec.tail_index().unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn nonpositive_parameter_named() {
        let err = Garch11Spec::gaussian(0.1, -0.1, 0.8).unwrap_err();
        assert!(err.to_string().contains("alpha1"));
    }

    #[test]
    fn tilted_normal_second_moment() {
        // E Z^2 under the tilt equals E[Z^2 (1+Z^2)^(a/2)] / E[(1+Z^2)^(a/2)]
        let alpha = 3.0;
        let tilt = TiltedNormal::new(alpha);
        let exact = gaussian_expectation(|z| z * z * (1.0 + z * z).powf(alpha / 2.0))
            / gaussian_expectation(|z| (1.0 + z * z).powf(alpha / 2.0));
        let mut rng = derive_stream(5, 0);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| tilt.sample(&mut rng).powi(2)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((mean - exact).abs() < 4.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn tail_process_rows_have_unit_start() {
        let spec = Garch11Spec::gaussian(0.1, 0.1, 0.85).unwrap();
        let sampler = spec.tail_sampler().unwrap();
        let mut rng = derive_stream(1, 2);
        let p = sampler.sample(5, &mut rng).unwrap();
        let r: f64 = p.row(0).iter().map(|x| x * x).sum();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(p.row(3)[0] > 0.0);
    }
}
