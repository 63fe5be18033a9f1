use heavytail::cluster::{circle_grid, Direction};
use heavytail::error::Error;
use heavytail::limits::{
    cf_grid, choose_centering, gaussian_sigma, ldp_grid, ldp_region, ldp_scan, normalizing_constant,
    spectral_closure, stable_cf_value, stable_check, Centering, LdpConfig, StableCheckConfig, StableLawParams,
};
use heavytail::models::{MarginalTail, ModelSpec, Var1Spec};
use heavytail::randkit::{derive_stream, TailLaw};
use heavytail::regen::{harvest_blocks, MinorizationSpec};
use heavytail::special::stable_tail_constant;

#[test]
fn stable_constant_values() {
    assert!((stable_tail_constant(1.0) - 2.0 / std::f64::consts::PI).abs() < 1e-12);
    // (1 - a) / (Gamma(2 - a) cos(pi a / 2)) at a = 1/2: Gamma(3/2) = sqrt(pi)/2
    let half = 0.5 / (std::f64::consts::PI.sqrt() / 2.0 * (std::f64::consts::PI / 4.0).cos());
    assert!((stable_tail_constant(0.5) - half).abs() < 1e-12);
}

#[test]
fn cf_at_origin_and_conjugate() {
    for x in [0.3, 1.0, 2.7] {
        let p = stable_cf_value(1.3, 0.9, 0.2, x).unwrap();
        let m = stable_cf_value(1.3, 0.9, 0.2, -x).unwrap();
        assert!((p - m.conj()).norm() < 1e-15);
        assert!(p.norm() <= 1.0);
    }
    assert!((stable_cf_value(1.3, 0.9, 0.2, 0.0).unwrap().re - 1.0).abs() < 1e-15);
}

#[test]
fn regime_checks() {
    assert!(matches!(
        StableLawParams::new(2.5, vec![(Direction::plus(), 1.0, 1.0)]),
        Err(Error::OutOfRegime(_))
    ));
    assert!(ldp_region(100, 1.5, 0.0, 10.0).is_err());
    let (b, c) = ldp_region(2000, 1.5, 0.1, 100.0).unwrap();
    assert!((b - 2000f64.powf(1.0 / 1.5 + 0.1)).abs() < 1e-9);
    assert!((c / b - 100.0).abs() < 1e-9);
    let g = ldp_grid((b, c), 5);
    assert!(g.iter().all(|x| *x > b && *x < c));
}

#[test]
fn iid_stable_check_passes() {
    let spec = ModelSpec::Var1(Var1Spec::scalar(0.0, TailLaw::symmetric_pareto(1.2).unwrap()).unwrap());
    let params = StableLawParams::new(1.2, vec![(Direction::plus(), 0.5, 0.5)]).unwrap();
    let tail = spec.marginal_tail().unwrap();
    let cfg = StableCheckConfig {
        n: 500,
        reps: 2000,
        burn_in: 0,
        a_n: normalizing_constant(&tail, 500),
        centering: choose_centering(&spec, 1.2, 0, &derive_stream(0, 0)).unwrap(),
    };
    let r = stable_check(&spec, &params, &cfg, &derive_stream(1, 0)).unwrap();
    assert_eq!(r[0].grid, cf_grid());
    assert!(r[0].passes(), "{} vs {}", r[0].sup_abs_gap, r[0].mc_band);
}

#[test]
fn ldp_scan_errors() {
    let spec = ModelSpec::Var1(Var1Spec::scalar(0.0, TailLaw::pareto(0.8).unwrap()).unwrap());
    let tail = spec.marginal_tail().unwrap();
    let mut cfg = LdpConfig {
        n: 100,
        region: (10.0, 1000.0),
        grid_size: 4,
        reps: 1000,
        burn_in: 0,
        centering: Centering::None,
        min_exceedances: 50,
    };
    assert!(matches!(
        ldp_scan(&spec, &Direction::plus(), 1.0, &tail, &cfg, &derive_stream(0, 0)),
        Err(Error::Region(_))
    ));
    cfg.region = ldp_region(100, 0.8, 1.5, 100.0).unwrap();
    let e = ldp_scan(&spec, &Direction::plus(), 1.0, &tail, &cfg, &derive_stream(0, 0)).unwrap_err();
    assert!(matches!(e, Error::WidenReplicas { .. }));
    assert!(e.is_numeric_regime());
}

#[test]
fn iid_ldp_ratios_approach_one() {
    let spec = ModelSpec::Var1(Var1Spec::scalar(0.0, TailLaw::pareto(0.8).unwrap()).unwrap());
    let cfg = LdpConfig {
        n: 100,
        region: ldp_region(100, 0.8, 1.0, 10.0).unwrap(),
        grid_size: 5,
        reps: 50_000,
        burn_in: 0,
        centering: Centering::None,
        min_exceedances: 50,
    };
    let r = ldp_scan(&spec, &Direction::plus(), 1.0, &spec.marginal_tail().unwrap(), &cfg, &derive_stream(2, 0)).unwrap();
    assert!(r.within_band(3.0).iter().all(|w| *w), "{:?}", r.ratios);
    let h = r.homogeneity(0.8, &MarginalTail::power_law(0.8, 1.0));
    assert!(h.iter().all(|v| (v - 1.0).abs() < 0.2), "{h:?}");
}

#[test]
fn gaussian_long_run_variance() {
    let spec = ModelSpec::Var1(Var1Spec::scalar(0.5, TailLaw::gaussian(1.0).unwrap()).unwrap());
    let minor = MinorizationSpec::new(&spec, 1.0, None).unwrap();
    let blocks = harvest_blocks(&spec, &minor, 400_000, 50, &mut derive_stream(3, 0)).unwrap();
    let r = gaussian_sigma(&blocks).unwrap();
    // sigma^2 = 1 / (1 - a)^2
    assert!((r.sigma_hat[0][0] / 4.0 - 1.0).abs() < 0.05, "{:?}", r.sigma_hat);
    assert!(r.rel_gap < 0.1);
}

#[test]
fn spectral_closure_recovers_held_out_directions() {
    let alpha = 1.5;
    let c = stable_tail_constant(alpha);
    let atoms = circle_grid(16);
    // a measure with mass on two atoms
    let truth = |d: &Direction| {
        c * (0.7 * (d.theta[0]).max(0.0).powf(alpha)
            + 0.3 * (-d.theta[0] * 0.0 + d.theta[1]).max(0.0).powf(alpha))
    };
    let fit: Vec<(Direction, f64)> = circle_grid(64).into_iter().map(|d| {
        let b = truth(&d);
        (d, b)
    }).collect();
    let held: Vec<(Direction, f64)> = (0..10)
        .map(|j| Direction::angle(0.37 + 0.6 * j as f64))
        .map(|d| {
            let b = truth(&d);
            (d, b)
        })
        .collect();
    let r = spectral_closure(alpha, &fit, &atoms, &held).unwrap();
    assert!(r.max_held_out_gap < 1e-6, "{}", r.max_held_out_gap);
    assert!(r.weights.iter().all(|w| *w >= 0.0));
}
