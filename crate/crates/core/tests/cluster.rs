use heavytail::cluster::{
    circle_grid, closed_form_cluster_index, cluster_index_tail_process, direction_grid, extremal_index, nu_alpha,
    telescoping_difference, var1_baseline, var1_cluster_index_exact, Direction, LimitMeasureEvaluator,
};
use heavytail::models::{Garch11Spec, Innovation, KestenSpec, MatrixLaw, ModelSpec, ScalarLaw, Var1Spec};
use heavytail::parallel::with_threads;
use heavytail::randkit::{derive_stream, TailLaw};
use nalgebra::DMatrix;

fn pos(x: f64, a: f64) -> f64 {
    if x > 0.0 {
        x.powf(a)
    } else {
        0.0
    }
}

/// Scalar AR(1) with innovations P(Z > x) ~ p x^-alpha, P(Z < -x) ~ (1-p) x^-alpha:
/// Theta_0 = sign(a^i s) with weight |a|^{i alpha} per innovation sign s.
fn scalar_oracle(a: f64, alpha: f64, p: f64, theta: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..400 {
        let w = a.abs().powf(alpha * i as f64);
        for (s, ps) in [(1.0, p), (-1.0, 1.0 - p)] {
            let t0 = (a.powi(i) * s).signum();
            num += w * ps * (pos(theta * t0 / (1.0 - a), alpha) - pos(theta * a * t0 / (1.0 - a), alpha));
            den += w * ps;
        }
    }
    num / den
}

#[test]
fn exact_scalar_values_match_oracle() {
    for (a, law, p) in [
        (0.5, TailLaw::pareto(1.5).unwrap(), 1.0),
        (-0.5, TailLaw::pareto(1.0).unwrap(), 1.0),
        (0.7, TailLaw::symmetric_pareto(0.8).unwrap(), 0.5),
        (-0.3, TailLaw::stable(1.2, 0.4).unwrap(), 0.7),
    ] {
        let v = Var1Spec::scalar(a, law).unwrap();
        for theta in [1.0, -1.0] {
            let d = Direction::new(vec![theta]).unwrap();
            let got = var1_cluster_index_exact(&v, &d).unwrap();
            let want = scalar_oracle(a, law.alpha, p, theta);
            assert!((got - want).abs() < 1e-12, "a = {a}, theta = {theta}: {got} vs {want}");
        }
    }
    // frozen
    let v = Var1Spec::scalar(-0.5, TailLaw::pareto(1.0).unwrap()).unwrap();
    assert!((var1_cluster_index_exact(&v, &Direction::plus()).unwrap() - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn tail_process_agrees_with_closed_form() {
    let v = Var1Spec::scalar(0.7, TailLaw::symmetric_pareto(0.8).unwrap()).unwrap();
    let spec = ModelSpec::Var1(v.clone());
    let sampler = spec.tail_sampler(&derive_stream(1, 9)).unwrap();
    let s = derive_stream(1, 0);
    let theta = Direction::plus();
    let exact = var1_cluster_index_exact(&v, &theta).unwrap();
    let tp = cluster_index_tail_process(sampler.as_ref(), &theta, 0.8, 60, 50_000, &s).unwrap();
    let cf = closed_form_cluster_index(&spec, &theta, 50_000, 60, &s).unwrap();
    assert!(tp.within(exact, 3.0), "{} +- {} vs {exact}", tp.value, tp.std_error);
    assert!(cf.within(exact, 3.0), "{} +- {} vs {exact}", cf.value, cf.std_error);
}

#[test]
fn telescoping_at_alpha_one_is_exact() {
    // for alpha = 1 and a positive the truncated functional is S_0 - S_1 = Theta_0
    let spec = ModelSpec::Var1(Var1Spec::scalar(0.5, TailLaw::pareto(1.0).unwrap()).unwrap());
    let sampler = spec.tail_sampler(&derive_stream(0, 0)).unwrap();
    let e = telescoping_difference(sampler.as_ref(), &Direction::plus(), 1.0, 5, 1000, &derive_stream(0, 1)).unwrap();
    assert!((e.value - 1.0).abs() < 1e-12);
}

#[test]
fn extremal_index_of_ar1() {
    for (alpha, want) in [(1.0, 0.5), (2.0, 0.75)] {
        let spec = ModelSpec::Var1(Var1Spec::scalar(0.5, TailLaw::pareto(alpha).unwrap()).unwrap());
        let sampler = spec.tail_sampler(&derive_stream(0, 0)).unwrap();
        let e = extremal_index(sampler.as_ref(), &Direction::plus(), alpha, 40, 1000, &derive_stream(0, 2)).unwrap();
        assert!((e.value - want).abs() < 1e-12, "{alpha}: {}", e.value);
    }
}

#[test]
fn kesten_routes_agree() {
    let k = KestenSpec::scalar(ScalarLaw::LogNormal { mu: -0.5, sigma2: 0.5 }, ScalarLaw::Constant(1.0)).unwrap();
    let spec = ModelSpec::Kesten(k);
    let sampler = spec.tail_sampler(&derive_stream(2, 9)).unwrap();
    let theta = Direction::plus();
    let tp = cluster_index_tail_process(sampler.as_ref(), &theta, 2.0, 60, 40_000, &derive_stream(2, 0)).unwrap();
    let cf = closed_form_cluster_index(&spec, &theta, 40_000, 60, &derive_stream(2, 1)).unwrap();
    let se = (tp.std_error.powi(2) + cf.std_error.powi(2)).sqrt();
    assert!((tp.value - cf.value).abs() < 3.0 * se, "{} vs {} (se {se})", tp.value, cf.value);
    // alpha = 2 expands the square: b = 1 + 2 E[A] / (1 - E[A])
    let ea = (-0.25f64).exp();
    let oracle = 1.0 + 2.0 * ea / (1.0 - ea);
    assert!(tp.within(oracle, 3.0), "{} +- {} vs {oracle}", tp.value, tp.std_error);
}

#[test]
fn garch_cluster_index_is_nonnegative() {
    let spec = ModelSpec::Garch11(Garch11Spec::gaussian(0.1, 0.3, 0.65).unwrap());
    let alpha = spec.alpha().unwrap();
    let sampler = spec.tail_sampler(&derive_stream(3, 9)).unwrap();
    for theta in direction_grid(1).unwrap() {
        let mut d = vec![0.0, theta.theta[0]];
        d[0] = 0.0;
        let dir = Direction::new(d).unwrap();
        let e = cluster_index_tail_process(sampler.as_ref(), &dir, alpha, 80, 20_000, &derive_stream(3, 0)).unwrap();
        assert!(e.value > -3.0 * e.std_error, "{}", e.value);
        assert!(e.value <= e.baseline + 3.0 * e.gap_se || alpha > 1.0);
    }
    assert!(closed_form_cluster_index(&spec, &Direction::new(vec![0.0, 1.0]).unwrap(), 1000, 10, &derive_stream(3, 1)).is_err());
}

#[test]
fn bivariate_baseline_and_symmetry() {
    let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, -0.1, 0.3]);
    let law = TailLaw::symmetric_pareto(1.5).unwrap();
    let v = Var1Spec::new(MatrixLaw::Fixed(a), Innovation::Independent(vec![law, law])).unwrap();
    for d in circle_grid(12) {
        let b = var1_cluster_index_exact(&v, &d).unwrap();
        let bm = var1_cluster_index_exact(&v, &d.neg()).unwrap();
        assert!((b - bm).abs() < 1e-12, "symmetric innovations give b(theta) = b(-theta)");
        assert!(b >= 0.0);
        assert!(var1_baseline(&v, &d).unwrap() > 0.0);
    }
}

#[test]
fn estimates_do_not_depend_on_threads() {
    let spec = ModelSpec::Var1(Var1Spec::scalar(0.6, TailLaw::symmetric_pareto(1.3).unwrap()).unwrap());
    let sampler = spec.tail_sampler(&derive_stream(4, 9)).unwrap();
    let run = |k| {
        with_threads(Some(k), || {
            cluster_index_tail_process(sampler.as_ref(), &Direction::plus(), 1.3, 30, 5000, &derive_stream(4, 0))
                .unwrap()
                .value
        })
    };
    assert_eq!(run(1).to_bits(), run(3).to_bits());
}

#[test]
fn limit_measure_homogeneity() {
    let eval = LimitMeasureEvaluator::new(1.5, vec![(Direction::plus(), 0.8), (Direction::plus().neg(), 0.2)]).unwrap();
    let t = nu_alpha(&eval, &Direction::plus(), 2.0).unwrap();
    assert!((t - 0.8 * 2f64.powf(-1.5)).abs() < 1e-15);
    assert!(!eval.uniqueness_flag());
    let int = LimitMeasureEvaluator::new(1.0, vec![(Direction::plus(), 0.8), (Direction::plus().neg(), 0.2)]).unwrap();
    assert!(int.uniqueness_flag());
    assert!(LimitMeasureEvaluator::new(1.0, vec![(Direction::plus(), -0.1)]).is_err());
}
