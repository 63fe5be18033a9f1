//! Reproducible random streams and the heavy-tailed samplers built on them.
//!
//! Every stream is a ChaCha8 keystream keyed by `(master_seed, stream_id, substream)`.
//! The position inside the keystream is the stream's counter, so the output is a pure
//! function of those values and never of thread scheduling.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::stable_tail_constant;

const KEY_TAG: u64 = 0x6865_6176_7974_6169;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A counter-based random stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    substream: u64,
    core: ChaCha8Rng,
}

impl PartialEq for RngStream {
    fn eq(&self, other: &Self) -> bool {
        self.master_seed == other.master_seed
            && self.stream_id == other.stream_id
            && self.substream == other.substream
            && self.counter() == other.counter()
    }
}

impl RngStream {
    fn keyed(master_seed: u64, stream_id: u64, substream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&stream_id.to_le_bytes());
        key[16..24].copy_from_slice(&substream.to_le_bytes());
        key[24..].copy_from_slice(&KEY_TAG.to_le_bytes());
        RngStream {
            master_seed,
            stream_id,
            substream,
            core: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn substream(&self) -> u64 {
        self.substream
    }

    /// Position in the keystream, in 32-bit words.
    pub fn counter(&self) -> u128 {
        self.core.get_word_pos()
    }

    pub fn set_counter(&mut self, counter: u128) {
        self.core.set_word_pos(counter);
    }

    /// Child stream number `index`. Depends only on the identity of `self`, not on how
    /// far `self` has been consumed, so replicas forked by index are order independent.
    pub fn fork(&self, index: u64) -> RngStream {
        let sub = splitmix64(self.substream ^ splitmix64(index ^ 0xA5A5_5A5A_0F0F_F0F0));
        RngStream::keyed(self.master_seed, self.stream_id, sub.max(1))
    }

    /// Uniform draw on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.core.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.core)
    }

    #[inline]
    pub fn exponential(&mut self) -> f64 {
        Exp1.sample(&mut self.core)
    }

    /// Index drawn from a cumulative weight table (last entry is the total).
    pub fn pick(&mut self, cumulative: &[f64]) -> usize {
        let total = *cumulative.last().expect("empty weight table");
        let target = self.uniform() * total;
        cumulative
            .partition_point(|&c| c <= target)
            .min(cumulative.len() - 1)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.core.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.core.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.core.try_fill_bytes(dest)
    }
}

pub fn derive_stream(master_seed: u64, stream_id: u64) -> RngStream {
    RngStream::keyed(master_seed, stream_id, 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailFamily {
    Pareto,
    SymmetricPareto,
    Stable,
    LogNormal,
    Gaussian,
}

/// A one-dimensional law used for innovations.
///
/// * `Pareto`: `P(X > x) = (x/scale)^-alpha` for `x >= scale`.
/// * `SymmetricPareto`: a Pareto magnitude with a random sign, `P(sign = +1) = (1 + skew)/2`.
/// * `Stable`: `scale` times a standard stable variable with index `alpha` and skewness `skew`.
/// * `LogNormal`: `scale * exp(N / alpha)`, light tailed.
/// * `Gaussian`: `N(0, scale^2)`; `alpha` is ignored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailLaw {
    pub family: TailFamily,
    pub alpha: f64,
    pub scale: f64,
    pub skew: f64,
}

impl TailLaw {
    pub fn new(family: TailFamily, alpha: f64, scale: f64, skew: f64) -> Result<Self> {
        let law = TailLaw {
            family,
            alpha,
            scale,
            skew,
        };
        law.validate()?;
        Ok(law)
    }

    pub fn pareto(alpha: f64) -> Result<Self> {
        Self::new(TailFamily::Pareto, alpha, 1.0, 1.0)
    }

    pub fn symmetric_pareto(alpha: f64) -> Result<Self> {
        Self::new(TailFamily::SymmetricPareto, alpha, 1.0, 0.0)
    }

    pub fn stable(alpha: f64, skew: f64) -> Result<Self> {
        Self::new(TailFamily::Stable, alpha, 1.0, skew)
    }

    pub fn gaussian(sd: f64) -> Result<Self> {
        Self::new(TailFamily::Gaussian, 2.0, sd, 0.0)
    }

    pub fn lognormal(shape: f64) -> Result<Self> {
        Self::new(TailFamily::LogNormal, shape, 1.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::param(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::param(format!("scale must be positive, got {}", self.scale)));
        }
        if !(-1.0..=1.0).contains(&self.skew) {
            return Err(Error::param(format!("skew must lie in [-1, 1], got {}", self.skew)));
        }
        if self.family == TailFamily::Stable && self.alpha > 2.0 {
            return Err(Error::param(format!(
                "stable index must lie in (0, 2], got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn is_regularly_varying(&self) -> bool {
        match self.family {
            TailFamily::Pareto | TailFamily::SymmetricPareto => true,
            TailFamily::Stable => self.alpha < 2.0,
            TailFamily::LogNormal | TailFamily::Gaussian => false,
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self.family {
            TailFamily::Pareto => self.scale * pareto_from_uniform(rng.uniform(), self.alpha),
            TailFamily::SymmetricPareto => {
                let magnitude = self.scale * pareto_from_uniform(rng.uniform(), self.alpha);
                if rng.uniform() < 0.5 * (1.0 + self.skew) {
                    magnitude
                } else {
                    -magnitude
                }
            }
            TailFamily::Stable => self.scale * stable_draw(rng, self.alpha, self.skew),
            TailFamily::LogNormal => self.scale * (rng.normal() / self.alpha).exp(),
            TailFamily::Gaussian => self.scale * rng.normal(),
        }
    }

    /// Constant `c` with `P(|X| > x) ~ c x^-alpha`.
    pub fn tail_constant(&self) -> Option<f64> {
        match self.family {
            TailFamily::Pareto | TailFamily::SymmetricPareto => Some(self.scale.powf(self.alpha)),
            TailFamily::Stable if self.alpha < 2.0 => {
                Some(stable_tail_constant(self.alpha) * self.scale.powf(self.alpha))
            }
            _ => None,
        }
    }

    /// Limit of `P(X > x) / P(|X| > x)`.
    pub fn tail_balance(&self) -> f64 {
        match self.family {
            TailFamily::Pareto => 1.0,
            TailFamily::SymmetricPareto | TailFamily::Stable => 0.5 * (1.0 + self.skew),
            TailFamily::LogNormal => 1.0,
            TailFamily::Gaussian => 0.5,
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match self.family {
            TailFamily::Pareto if self.alpha > 1.0 => {
                Some(self.alpha * self.scale / (self.alpha - 1.0))
            }
            TailFamily::SymmetricPareto if self.alpha > 1.0 => {
                Some(self.skew * self.alpha * self.scale / (self.alpha - 1.0))
            }
            TailFamily::Stable if self.alpha > 1.0 => Some(0.0),
            TailFamily::LogNormal => Some(self.scale * (0.5 / (self.alpha * self.alpha)).exp()),
            TailFamily::Gaussian => Some(0.0),
            _ => None,
        }
    }

    /// Exact `P(|X| > x)` where available.
    pub fn survival_abs(&self, x: f64) -> Option<f64> {
        let x = x.max(0.0);
        match self.family {
            TailFamily::Pareto | TailFamily::SymmetricPareto => {
                if x <= self.scale {
                    Some(1.0)
                } else {
                    Some((x / self.scale).powf(-self.alpha))
                }
            }
            TailFamily::Gaussian => Some(crate::special::erfc(x / (self.scale * 2f64.sqrt()))),
            TailFamily::LogNormal => {
                if x <= 0.0 {
                    Some(1.0)
                } else {
                    let z = self.alpha * (x / self.scale).ln();
                    Some(0.5 * crate::special::erfc(z / 2f64.sqrt()))
                }
            }
            TailFamily::Stable => None,
        }
    }

    /// Lebesgue density where available.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self.family {
            TailFamily::Pareto => Some(pareto_density(x, self.alpha, self.scale)),
            TailFamily::SymmetricPareto => {
                let p = 0.5 * (1.0 + self.skew);
                Some(if x >= 0.0 {
                    p * pareto_density(x, self.alpha, self.scale)
                } else {
                    (1.0 - p) * pareto_density(-x, self.alpha, self.scale)
                })
            }
            TailFamily::Gaussian => {
                let z = x / self.scale;
                Some((-0.5 * z * z).exp() / (self.scale * (2.0 * PI).sqrt()))
            }
            TailFamily::LogNormal => {
                if x <= 0.0 {
                    return Some(0.0);
                }
                let z = self.alpha * (x / self.scale).ln();
                Some(self.alpha * (-0.5 * z * z).exp() / (x * (2.0 * PI).sqrt()))
            }
            TailFamily::Stable => None,
        }
    }
}

fn pareto_density(x: f64, alpha: f64, scale: f64) -> f64 {
    if x < scale {
        0.0
    } else {
        alpha / scale * (x / scale).powf(-alpha - 1.0)
    }
}

/// Exact inversion `u^(-1/alpha)` of the unit-scale Pareto survival function.
#[inline]
pub fn pareto_from_uniform(u: f64, alpha: f64) -> f64 {
    (-u.ln() / alpha).exp()
}

pub fn sample_pareto(stream: &mut RngStream, alpha: f64, n: usize) -> Result<Vec<f64>> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::param(format!("Pareto index must be positive, got {alpha}")));
    }
    Ok((0..n)
        .map(|_| pareto_from_uniform(stream.uniform(), alpha))
        .collect())
}

/// Standard stable draws by the Chambers-Mallows-Stuck transform, characteristic
/// function `exp(-|t|^a (1 - i b sign(t) tan(pi a / 2)))` for `a != 1`.
pub fn sample_stable(stream: &mut RngStream, alpha: f64, beta: f64, n: usize) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::param(format!("stable index must lie in (0, 2], got {alpha}")));
    }
    if !(-1.0..=1.0).contains(&beta) {
        return Err(Error::param(format!("stable skewness must lie in [-1, 1], got {beta}")));
    }
    Ok((0..n).map(|_| stable_draw(stream, alpha, beta)).collect())
}

pub(crate) fn stable_draw(rng: &mut RngStream, alpha: f64, beta: f64) -> f64 {
    let v = PI * (rng.uniform() - 0.5);
    let w = rng.exponential();
    if (alpha - 1.0).abs() < 1e-12 {
        let shifted = FRAC_PI_2 + beta * v;
        return (shifted * v.tan() - beta * (FRAC_PI_2 * w * v.cos() / shifted).ln()) / FRAC_PI_2;
    }
    let tan_term = beta * (FRAC_PI_2 * alpha).tan();
    let shift = tan_term.atan() / alpha;
    let scale = (1.0 + tan_term * tan_term).powf(0.5 / alpha);
    let phase = alpha * (v + shift);
    scale * phase.sin() / v.cos().powf(1.0 / alpha)
        * ((v - phase).cos() / w).powf((1.0 - alpha) / alpha)
}

/// The level `a_n` with `n P(|X| > a_n) = 1`.
///
/// Exact for the Pareto families; for stable laws the asymptotic tail `c x^-alpha` is inverted.
pub fn quantile_tail(law: &TailLaw, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    law.validate()?;
    let n = n as f64;
    match law.family {
        TailFamily::Pareto | TailFamily::SymmetricPareto => {
            Ok(law.scale * n.powf(1.0 / law.alpha))
        }
        TailFamily::Stable if law.alpha < 2.0 => {
            Ok((n * law.tail_constant().unwrap_or(1.0)).powf(1.0 / law.alpha))
        }
        _ => Err(Error::UnsupportedLaw(format!(
            "{:?} is not regularly varying; no tail quantile",
            law.family
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inversion_hits_exact_value() {
        assert_eq!(pareto_from_uniform(0.25, 2.0), 2.0);
    }

    #[test]
    fn pareto_rejects_bad_index() {
        let mut s = derive_stream(1, 0);
        assert!(sample_pareto(&mut s, 0.0, 3).is_err());
        assert!(sample_pareto(&mut s, -1.0, 3).is_err());
        assert!(sample_pareto(&mut s, 1.0, 0).unwrap().is_empty());
    }

    #[test]
    fn stable_rejects_bad_index() {
        let mut s = derive_stream(1, 0);
        assert!(sample_stable(&mut s, 2.5, 0.0, 1).is_err());
        assert!(sample_stable(&mut s, 0.0, 0.0, 1).is_err());
    }

    #[test]
    fn quantiles() {
        let law = TailLaw::pareto(2.0).unwrap();
        assert!((quantile_tail(&law, 100).unwrap() - 10.0).abs() < 1e-12);
        let law = TailLaw::pareto(1.0).unwrap();
        assert_eq!(quantile_tail(&law, 1).unwrap(), 1.0);
        let law = TailLaw::lognormal(1.0).unwrap();
        assert!(matches!(quantile_tail(&law, 10), Err(Error::UnsupportedLaw(_))));
    }

    #[test]
    fn forks_do_not_depend_on_consumption() {
        let mut a = derive_stream(9, 3);
        let b = a.clone();
        for _ in 0..17 {
            a.uniform();
        }
        let mut fa = a.fork(5);
        let mut fb = b.fork(5);
        assert_eq!(fa.next_u64(), fb.next_u64());
        assert_ne!(a.fork(5).next_u64(), a.fork(6).next_u64());
    }

    #[test]
    fn counter_rewinds() {
        let mut a = derive_stream(4, 4);
        let start = a.counter();
        let first: Vec<u64> = (0..5).map(|_| a.next_u64()).collect();
        a.set_counter(start);
        let again: Vec<u64> = (0..5).map(|_| a.next_u64()).collect();
        assert_eq!(first, again);
    }
}
