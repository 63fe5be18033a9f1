use nalgebra::{DMatrix, DVector};

use super::var1::spectral_radius;
use super::{norm, radius_draw, Chain, ModelSpec, TailProcessPath, TailProcessSampler};
use crate::error::{Error, Result};
use crate::randkit::{derive_stream, RngStream, TailFamily, TailLaw};
use crate::special::{gamma, normal_cdf, positive_root};

/// Scalar laws for the multiplicative and additive parts of the recursion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarLaw {
    Constant(f64),
    /// `exp(mu + sigma N)` with `sigma^2 = sigma2`.
    LogNormal { mu: f64, sigma2: f64 },
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, sd: f64 },
    TwoPoint { x: f64, y: f64, p: f64 },
    Tail(TailLaw),
}

impl ScalarLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ScalarLaw::Constant(c) if !c.is_finite() => Err(Error::param("constant must be finite")),
            ScalarLaw::LogNormal { sigma2, .. } if !(sigma2 >= 0.0) => {
                Err(Error::param("lognormal sigma2 must be nonnegative"))
            }
            ScalarLaw::Uniform { lo, hi } if !(lo < hi) => Err(Error::param("uniform needs lo < hi")),
            ScalarLaw::Gaussian { sd, .. } if !(sd > 0.0) => Err(Error::param("gaussian sd must be positive")),
            ScalarLaw::TwoPoint { p, .. } if !(0.0..=1.0).contains(&p) => {
                Err(Error::param("two-point probability must lie in [0, 1]"))
            }
            ScalarLaw::Tail(law) => law.validate(),
            _ => Ok(()),
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            ScalarLaw::Constant(c) => c,
            ScalarLaw::LogNormal { mu, sigma2 } => (mu + sigma2.sqrt() * rng.normal()).exp(),
            ScalarLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.uniform(),
            ScalarLaw::Gaussian { mean, sd } => mean + sd * rng.normal(),
            ScalarLaw::TwoPoint { x, y, p } => {
                if rng.uniform() < p {
                    x
                } else {
                    y
                }
            }
            ScalarLaw::Tail(law) => law.sample(rng),
        }
    }

    /// `E|A|^k`, infinite when the moment does not exist.
    pub fn abs_moment(&self, k: f64) -> f64 {
        match *self {
            ScalarLaw::Constant(c) => c.abs().powf(k),
            ScalarLaw::LogNormal { mu, sigma2 } => (k * mu + 0.5 * k * k * sigma2).exp(),
            ScalarLaw::Uniform { lo, hi } => {
                let f = |x: f64| x.signum() * x.abs().powf(k + 1.0) / (k + 1.0);
                (f(hi) - f(lo)) / (hi - lo)
            }
            ScalarLaw::Gaussian { mean, sd } => {
                if mean == 0.0 {
                    sd.powf(k) * 2f64.powf(k / 2.0) * gamma((k + 1.0) / 2.0)
                        / std::f64::consts::PI.sqrt()
                } else {
                    crate::special::gaussian_expectation(|z| (mean + sd * z).abs().powf(k))
                }
            }
            ScalarLaw::TwoPoint { x, y, p } => p * x.abs().powf(k) + (1.0 - p) * y.abs().powf(k),
            ScalarLaw::Tail(law) => match law.family {
                TailFamily::Pareto | TailFamily::SymmetricPareto if k < law.alpha => {
                    law.scale.powf(k) * law.alpha / (law.alpha - k)
                }
                _ => f64::INFINITY,
            },
        }
    }

    /// `E log|A|`.
    pub fn log_moment(&self) -> f64 {
        match *self {
            ScalarLaw::Constant(c) => c.abs().ln(),
            ScalarLaw::LogNormal { mu, .. } => mu,
            ScalarLaw::Uniform { lo, hi } => {
                let g = |x: f64| if x == 0.0 { 0.0 } else { x * x.abs().ln() - x };
                (g(hi) - g(lo)) / (hi - lo)
            }
            ScalarLaw::Gaussian { mean, sd } => {
                if mean == 0.0 {
                    // E log|N| = -(gamma_E + ln 2) / 2
                    sd.ln() - 0.5 * (0.577_215_664_901_532_9 + std::f64::consts::LN_2)
                } else {
                    crate::special::gaussian_expectation(|z| (mean + sd * z).abs().ln())
                }
            }
            ScalarLaw::TwoPoint { x, y, p } => p * x.abs().ln() + (1.0 - p) * y.abs().ln(),
            ScalarLaw::Tail(law) => match law.family {
                TailFamily::Pareto | TailFamily::SymmetricPareto => law.scale.ln() + 1.0 / law.alpha,
                _ => f64::NAN,
            },
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match *self {
            ScalarLaw::Constant(c) => Some(c),
            ScalarLaw::LogNormal { mu, sigma2 } => Some((mu + 0.5 * sigma2).exp()),
            ScalarLaw::Uniform { lo, hi } => Some(0.5 * (lo + hi)),
            ScalarLaw::Gaussian { mean, .. } => Some(mean),
            ScalarLaw::TwoPoint { x, y, p } => Some(p * x + (1.0 - p) * y),
            ScalarLaw::Tail(law) => law.mean(),
        }
    }

    pub fn prob_negative(&self) -> f64 {
        match *self {
            ScalarLaw::Constant(c) => (c < 0.0) as u8 as f64,
            ScalarLaw::LogNormal { .. } => 0.0,
            ScalarLaw::Uniform { lo, hi } => ((0.0f64.min(hi) - lo) / (hi - lo)).max(0.0),
            ScalarLaw::Gaussian { mean, sd } => normal_cdf(-mean / sd),
            ScalarLaw::TwoPoint { x, y, p } => {
                p * (x < 0.0) as u8 as f64 + (1.0 - p) * (y < 0.0) as u8 as f64
            }
            ScalarLaw::Tail(law) => match law.family {
                TailFamily::Pareto | TailFamily::LogNormal => 0.0,
                TailFamily::SymmetricPareto => 1.0 - law.tail_balance(),
                _ => 0.5,
            },
        }
    }

    pub fn is_heavy(&self) -> bool {
        matches!(self, ScalarLaw::Tail(law) if law.is_regularly_varying())
    }
}

/// Joint law of `(A_t, B_t)`, independent across `t`.
#[derive(Clone, Debug)]
pub enum KestenLaw {
    Scalar { a: ScalarLaw, b: ScalarLaw },
    /// `A_t = s_t M` with a scalar factor and fixed matrix; `B_t` has independent coordinates.
    ScaledMatrix {
        factor: ScalarLaw,
        matrix: DMatrix<f64>,
        b: Vec<ScalarLaw>,
    },
}

/// Length and upper-quantile level of the pilot run used to estimate `Theta_0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PilotConfig {
    pub length: usize,
    pub quantile: f64,
}

impl Default for PilotConfig {
    fn default() -> Self {
        PilotConfig {
            length: 1_000_000,
            quantile: 0.001,
        }
    }
}

/// Stochastic recurrence `X_t = A_t X_{t-1} + B_t`.
#[derive(Clone, Debug)]
pub struct KestenSpec {
    pub law: KestenLaw,
    pub alpha_hint: Option<f64>,
    pub pilot: PilotConfig,
}

impl KestenSpec {
    pub fn new(law: KestenLaw) -> Result<Self> {
        let spec = KestenSpec {
            law,
            alpha_hint: None,
            pilot: PilotConfig::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn scalar(a: ScalarLaw, b: ScalarLaw) -> Result<Self> {
        Self::new(KestenLaw::Scalar { a, b })
    }

    pub fn dim(&self) -> usize {
        match &self.law {
            KestenLaw::Scalar { .. } => 1,
            KestenLaw::ScaledMatrix { matrix, .. } => matrix.nrows(),
        }
    }

    /// Top Lyapunov exponent; exact for both supported laws.
    pub fn lyapunov(&self) -> f64 {
        match &self.law {
            KestenLaw::Scalar { a, .. } => a.log_moment(),
            KestenLaw::ScaledMatrix { factor, matrix, .. } => {
                factor.log_moment() + spectral_radius(matrix).ln()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.law {
            KestenLaw::Scalar { a, b } => {
                a.validate()?;
                b.validate()?;
            }
            KestenLaw::ScaledMatrix { factor, matrix, b } => {
                factor.validate()?;
                for l in b {
                    l.validate()?;
                }
                if matrix.nrows() != matrix.ncols() || matrix.nrows() != b.len() || b.is_empty() {
                    return Err(Error::param("matrix and additive law dimensions disagree"));
                }
            }
        }
        let gamma = self.lyapunov();
        if !(gamma < 0.0) {
            return Err(Error::Divergence(format!(
                "Lyapunov exponent {gamma} is not negative"
            )));
        }
        if let Some(a) = self.alpha_hint {
            if !(a > 0.0) {
                return Err(Error::param("alpha_hint must be positive"));
            }
        }
        Ok(())
    }

    /// Geometric rate `exp(gamma)` used for burn-in.
    pub fn contraction(&self) -> Result<f64> {
        Ok(self.lyapunov().exp())
    }

    fn heavy_additive(&self) -> Option<f64> {
        match &self.law {
            KestenLaw::Scalar { b, .. } => match b {
                ScalarLaw::Tail(law) if law.is_regularly_varying() => Some(law.alpha),
                _ => None,
            },
            KestenLaw::ScaledMatrix { b, .. } => b
                .iter()
                .filter_map(|l| match l {
                    ScalarLaw::Tail(law) if law.is_regularly_varying() => Some(law.alpha),
                    _ => None,
                })
                .min_by(f64::total_cmp),
        }
    }

    /// Root of `E|A|^k = 1`, or the index of a heavier additive term.
    pub fn tail_index(&self) -> Result<f64> {
        if let Some(a) = self.alpha_hint {
            return Ok(a);
        }
        let heavy = self.heavy_additive();
        match &self.law {
            KestenLaw::Scalar { a, .. } => {
                if let Some(ab) = heavy {
                    if a.abs_moment(ab) < 1.0 {
                        return Ok(ab);
                    }
                }
                let root = positive_root(|k| a.abs_moment(k).ln(), 1e-10)?;
                Ok(match heavy {
                    Some(ab) => root.min(ab),
                    None => root,
                })
            }
            KestenLaw::ScaledMatrix { factor, matrix, .. } => {
                let rho = matrix.clone().svd(false, false).singular_values.max();
                match heavy {
                    Some(ab) if factor.abs_moment(ab) * rho.powf(ab) < 1.0 => Ok(ab),
                    _ => Err(Error::UnsupportedCase(
                        "matrix recursion needs alpha_hint or a dominating heavy-tailed B".into(),
                    )),
                }
            }
        }
    }

    pub fn mean(&self) -> Option<Vec<f64>> {
        match &self.law {
            KestenLaw::Scalar { a, b } => {
                let ma = a.mean()?;
                if a.abs_moment(1.0) >= 1.0 {
                    return None;
                }
                Some(vec![b.mean()? / (1.0 - ma)])
            }
            KestenLaw::ScaledMatrix { factor, matrix, b } => {
                if factor.abs_moment(1.0) * spectral_radius(matrix) >= 1.0 {
                    return None;
                }
                let mb: Option<Vec<f64>> = b.iter().map(|l| l.mean()).collect();
                let d = matrix.nrows();
                let inv = (DMatrix::identity(d, d) - matrix * factor.mean()?).try_inverse()?;
                Some((inv * DVector::from_vec(mb?)).iter().copied().collect())
            }
        }
    }

    pub(crate) fn draw_pair(&self, rng: &mut RngStream, a_out: &mut f64, b_out: &mut [f64]) {
        match &self.law {
            KestenLaw::Scalar { a, b } => {
                *a_out = a.sample(rng);
                b_out[0] = b.sample(rng);
            }
            KestenLaw::ScaledMatrix { factor, b, .. } => {
                *a_out = factor.sample(rng);
                for (o, l) in b_out.iter_mut().zip(b) {
                    *o = l.sample(rng);
                }
            }
        }
    }

    /// Applies `A_t` with scalar factor `s` to `v` in place.
    pub(crate) fn apply(&self, s: f64, v: &mut [f64], scratch: &mut [f64]) {
        match &self.law {
            KestenLaw::Scalar { .. } => v[0] *= s,
            KestenLaw::ScaledMatrix { matrix, .. } => {
                super::var1::mat_vec(matrix, v, scratch);
                for (o, x) in v.iter_mut().zip(scratch.iter()) {
                    *o = s * x;
                }
            }
        }
    }

    pub(crate) fn draw_factor(&self, rng: &mut RngStream) -> f64 {
        match &self.law {
            KestenLaw::Scalar { a, .. } => a.sample(rng),
            KestenLaw::ScaledMatrix { factor, .. } => factor.sample(rng),
        }
    }

    /// `Z_1 = sum_{t=1}^{T} Pi_t` in distribution, through the recursion `Z <- A_t (Z + I)`.
    pub fn sample_z1(&self, horizon: usize, rng: &mut RngStream) -> DMatrix<f64> {
        let d = self.dim();
        let mut z = DMatrix::<f64>::zeros(d, d);
        let id = DMatrix::<f64>::identity(d, d);
        for _ in 0..horizon {
            let s = self.draw_factor(rng);
            z = match &self.law {
                KestenLaw::Scalar { .. } => (z + &id) * s,
                KestenLaw::ScaledMatrix { matrix, .. } => matrix * (z + &id) * s,
            };
        }
        z
    }

    /// Exact `Theta_0` when the sign structure pins it down, otherwise `None`.
    fn exact_theta0(&self) -> Option<ThetaZero> {
        match &self.law {
            KestenLaw::Scalar { a, b } => {
                if a.prob_negative() > 0.0 {
                    Some(ThetaZero::PlusMinus)
                } else if b.prob_negative() == 0.0 {
                    Some(ThetaZero::Plus)
                } else {
                    None
                }
            }
            KestenLaw::ScaledMatrix { .. } => None,
        }
    }

    pub fn tail_sampler(&self, stream: &RngStream) -> Result<KestenTailSampler> {
        let alpha = self.tail_index()?;
        let theta0 = match self.exact_theta0() {
            Some(t) => t,
            None => ThetaZero::Empirical(self.pilot_directions(stream)?),
        };
        Ok(KestenTailSampler {
            spec: self.clone(),
            alpha,
            theta0,
        })
    }

    /// Unit directions of the largest-norm states of a long pilot run.
    fn pilot_directions(&self, stream: &RngStream) -> Result<Vec<Vec<f64>>> {
        let PilotConfig { length, quantile } = self.pilot;
        if !(quantile > 0.0 && quantile < 1.0) || length == 0 {
            return Err(Error::param("pilot quantile must lie in (0, 1) and length be positive"));
        }
        let keep = ((length as f64 * quantile).ceil() as usize).max(1);
        let mut rng = stream.clone();
        let spec = ModelSpec::Kesten(self.clone());
        let mut chain = Chain::new(&spec, &mut rng)?;
        for _ in 0..spec.default_burn_in() {
            chain.step(&mut rng)?;
        }
        let mut states = Vec::with_capacity(length);
        for _ in 0..length {
            chain.step(&mut rng)?;
            let s = chain.state();
            states.push((norm(s), s.to_vec()));
        }
        states.select_nth_unstable_by(length - keep, |a, b| a.0.total_cmp(&b.0));
        let mut top: Vec<(f64, Vec<f64>)> = states.split_off(length - keep);
        top.sort_by(|a, b| b.0.total_cmp(&a.0));
        Ok(top
            .into_iter()
            .filter(|(r, _)| *r > 0.0)
            .map(|(r, v)| v.iter().map(|x| x / r).collect())
            .collect())
    }
}

#[derive(Clone, Debug)]
enum ThetaZero {
    Plus,
    PlusMinus,
    Empirical(Vec<Vec<f64>>),
}

pub struct KestenTailSampler {
    spec: KestenSpec,
    alpha: f64,
    theta0: ThetaZero,
}

impl KestenTailSampler {
    pub fn uses_pilot(&self) -> bool {
        matches!(self.theta0, ThetaZero::Empirical(_))
    }

    pub fn sample_theta0(&self, rng: &mut RngStream) -> Vec<f64> {
        match &self.theta0 {
            ThetaZero::Plus => vec![1.0],
            ThetaZero::PlusMinus => vec![if rng.uniform() < 0.5 { 1.0 } else { -1.0 }],
            ThetaZero::Empirical(dirs) => {
                let k = ((rng.uniform() * dirs.len() as f64) as usize).min(dirs.len() - 1);
                dirs[k].clone()
            }
        }
    }

    pub fn spec(&self) -> &KestenSpec {
        &self.spec
    }
}

impl TailProcessSampler for KestenTailSampler {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn sample(&self, horizon: usize, rng: &mut RngStream) -> Result<TailProcessPath> {
        let d = self.dim();
        let mut v = self.sample_theta0(rng);
        let mut scratch = vec![0.0; d];
        let mut theta = Vec::with_capacity((horizon + 1) * d);
        theta.extend_from_slice(&v);
        for _ in 0..horizon {
            let s = self.spec.draw_factor(rng);
            self.spec.apply(s, &mut v, &mut scratch);
            theta.extend_from_slice(&v);
        }
        Ok(TailProcessPath {
            theta,
            dim: d,
            pareto_radius: radius_draw(rng, self.alpha),
        })
    }
}

/// Fixed stream for deterministic pilot runs when the caller has none.
pub fn pilot_stream() -> RngStream {
    derive_stream(0x5eed, 0x9170)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lognormal_root_is_two() {
        let spec = KestenSpec::scalar(
            ScalarLaw::LogNormal { mu: -0.5, sigma2: 0.5 },
            ScalarLaw::Constant(1.0),
        )
        .unwrap();
        assert!((spec.tail_index().unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn heavy_additive_term_dominates() {
        let spec = KestenSpec::scalar(
            ScalarLaw::Constant(0.5),
            ScalarLaw::Tail(TailLaw::pareto(1.5).unwrap()),
        )
        .unwrap();
        assert_eq!(spec.tail_index().unwrap(), 1.5);
    }

    #[test]
    fn uniform_moments() {
        let u = ScalarLaw::Uniform { lo: -1.0, hi: 1.0 };
        assert!((u.abs_moment(2.0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((u.log_moment() + 1.0).abs() < 1e-12);
        assert!((u.prob_negative() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gaussian_abs_moment_closed_form() {
        let g = ScalarLaw::Gaussian { mean: 0.0, sd: 1.0 };
        assert!((g.abs_moment(2.0) - 1.0).abs() < 1e-12);
        assert!((g.abs_moment(1.0) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn explosive_recursion_rejected() {
        let r = KestenSpec::scalar(ScalarLaw::Constant(1.5), ScalarLaw::Constant(1.0));
        assert!(matches!(r, Err(Error::Divergence(_))));
    }

    #[test]
    fn constant_a_gives_geometric_path() {
        let spec = KestenSpec::scalar(
            ScalarLaw::Constant(0.5),
            ScalarLaw::Tail(TailLaw::pareto(1.5).unwrap()),
        )
        .unwrap();
        let sampler = spec.tail_sampler(&pilot_stream()).unwrap();
        let mut rng = derive_stream(3, 3);
        let p = sampler.sample(6, &mut rng).unwrap();
        for t in 0..=6 {
            assert_eq!(p.theta[t], 0.5f64.powi(t as i32));
        }
    }
}
