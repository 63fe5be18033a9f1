use heavytail::randkit::{
    derive_stream, pareto_from_uniform, quantile_tail, sample_pareto, sample_stable, TailFamily, TailLaw,
};
use rand::RngCore;

fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn streams_are_reproducible_and_distinct() {
    let mut a = derive_stream(42, 7);
    let mut b = derive_stream(42, 7);
    let mut c = derive_stream(42, 8);
    let xa: Vec<u64> = (0..64).map(|_| a.next_u64()).collect();
    let xb: Vec<u64> = (0..64).map(|_| b.next_u64()).collect();
    let xc: Vec<u64> = (0..64).map(|_| c.next_u64()).collect();
    assert_eq!(xa, xb);
    assert_ne!(xa, xc);
    assert_eq!(a.stream_id(), 7);
    assert_eq!(a.master_seed(), 42);
}

#[test]
fn forks_are_uncorrelated() {
    let root = derive_stream(1, 0);
    let mut f0 = root.fork(0);
    let mut f1 = root.fork(1);
    let n = 100_000;
    let cross: f64 = (0..n).map(|_| (f0.uniform() - 0.5) * (f1.uniform() - 0.5)).sum::<f64>() / n as f64;
    // sd of the product of two centred uniforms is 1/12
    assert!(cross.abs() < 4.0 / 12.0 / (n as f64).sqrt(), "{cross}");
}

#[test]
fn uniform_is_open_interval() {
    let mut s = derive_stream(3, 3);
    for _ in 0..100_000 {
        let u = s.uniform();
        assert!(u > 0.0 && u < 1.0);
    }
}

#[test]
fn pareto_mean_matches_closed_form() {
    let mut s = derive_stream(5, 0);
    let x = sample_pareto(&mut s, 3.0, 400_000).unwrap();
    let (m, se) = mean_se(&x);
    assert!((m - 1.5).abs() < 4.0 * se, "{m} +- {se}");
    assert!(x.iter().all(|v| *v >= 1.0));
}

#[test]
fn pareto_survival_at_quantiles() {
    let mut s = derive_stream(5, 1);
    let n = 200_000;
    let x = sample_pareto(&mut s, 1.5, n).unwrap();
    for t in [2.0f64, 5.0, 20.0] {
        let p: f64 = t.powf(-1.5);
        let hits = x.iter().filter(|v| **v > t).count() as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits - p).abs() < 4.0 * se, "t = {t}: {hits} vs {p}");
    }
}

#[test]
fn symmetric_pareto_balance() {
    let law = TailLaw::new(TailFamily::SymmetricPareto, 1.2, 1.0, 0.4).unwrap();
    assert!((law.tail_balance() - 0.7).abs() < 1e-15);
    let mut s = derive_stream(6, 0);
    let n = 200_000;
    let pos = (0..n).filter(|_| law.sample(&mut s) > 0.0).count() as f64 / n as f64;
    assert!((pos - 0.7).abs() < 4.0 * (0.21 / n as f64).sqrt(), "{pos}");
}

#[test]
fn symmetric_stable_characteristic_function() {
    let mut s = derive_stream(7, 0);
    let n = 200_000;
    let x = sample_stable(&mut s, 1.5, 0.0, n).unwrap();
    for t in [0.5f64, 1.0, 2.0] {
        let c: Vec<f64> = x.iter().map(|v| (t * v).cos()).collect();
        let (m, se) = mean_se(&c);
        let expected = (-t.powf(1.5)).exp();
        assert!((m - expected).abs() < 4.0 * se, "t = {t}: {m} vs {expected}");
    }
}

#[test]
fn skewed_stable_characteristic_function() {
    let mut s = derive_stream(7, 1);
    let n = 200_000;
    let (alpha, beta) = (1.5f64, 0.6f64);
    let x = sample_stable(&mut s, alpha, beta, n).unwrap();
    let t = 0.8f64;
    let modulus = (-t.powf(alpha)).exp();
    let phase = beta * (std::f64::consts::FRAC_PI_2 * alpha).tan() * t.powf(alpha);
    let re: Vec<f64> = x.iter().map(|v| (t * v).cos()).collect();
    let im: Vec<f64> = x.iter().map(|v| (t * v).sin()).collect();
    let (mr, ser) = mean_se(&re);
    let (mi, sei) = mean_se(&im);
    assert!((mr - modulus * phase.cos()).abs() < 4.0 * ser);
    assert!((mi - modulus * phase.sin()).abs() < 4.0 * sei);
}

#[test]
fn tail_quantiles() {
    let law = TailLaw::pareto(2.0).unwrap();
    assert!((quantile_tail(&law, 10_000).unwrap() - 100.0).abs() < 1e-9);
    assert!(quantile_tail(&TailLaw::gaussian(1.0).unwrap(), 100).is_err());
    assert_eq!(pareto_from_uniform(1.0, 2.0), 1.0);
    assert!((pareto_from_uniform(0.25, 2.0) - 2.0).abs() < 1e-15);
}

#[test]
fn light_tails_are_not_regularly_varying() {
    let g = TailLaw::gaussian(2.0).unwrap();
    assert!(!g.is_regularly_varying());
    assert!(g.tail_constant().is_none());
    assert!(TailLaw::stable(1.5, 0.0).unwrap().is_regularly_varying());
    assert!(TailLaw::pareto(0.0).is_err());
    assert!(TailLaw::stable(2.5, 0.0).is_err());
}
