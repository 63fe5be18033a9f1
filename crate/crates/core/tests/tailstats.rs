use heavytail::models::{simulate_path, ModelSpec, PathMatrix, Var1Spec};
use heavytail::randkit::{derive_stream, sample_pareto, TailLaw};
use heavytail::tailstats::{
    angular_measure, circle_bucket, default_hill_k, empirical_tail_process, hill_estimate, normalizing_sequence,
    NormSource,
};

#[test]
fn hill_covers_pareto_index() {
    let mut s = derive_stream(1, 0);
    for alpha in [0.5, 1.5, 4.0] {
        let x = sample_pareto(&mut s, alpha, 100_000).unwrap();
        let fit = hill_estimate(&x, default_hill_k(x.len())).unwrap();
        assert!(fit.covers(alpha), "{alpha}: {fit:?}");
        assert_eq!(fit.k_used, 316);
    }
}

#[test]
fn hill_rejects_bad_k() {
    let x = vec![1.0, 2.0, 3.0];
    assert!(hill_estimate(&x, 0).is_err());
    assert!(hill_estimate(&x, 3).is_err());
}

#[test]
fn normalizing_sequence_exact_and_empirical() {
    let law = TailLaw::pareto(1.5).unwrap();
    let exact = normalizing_sequence(NormSource::Law(law), 1000).unwrap();
    assert!((exact - 100.0).abs() < 1e-9);
    let mut s = derive_stream(1, 1);
    let x = sample_pareto(&mut s, 1.5, 1_000_000).unwrap();
    let emp = normalizing_sequence(NormSource::Samples(&x), 1000).unwrap();
    assert!((emp / exact - 1.0).abs() < 0.05, "{emp}");
}

#[test]
fn empirical_tail_process_of_positive_ar1() {
    let spec = ModelSpec::Var1(Var1Spec::scalar(0.5, TailLaw::pareto(1.5).unwrap()).unwrap());
    let path = simulate_path(&spec, 1_000_000, 50, &mut derive_stream(2, 0)).unwrap();
    let e = empirical_tail_process(&path, 0.999, 3).unwrap();
    assert_eq!(e.exceedance_count, 1000);
    assert!((e.row(0)[0] - 1.0).abs() < 1e-12);
    // X_1 / X_0 = a + Z_1 / X_0 with a small positive bias at a finite threshold
    assert!(e.row(1)[0] > 0.5 && e.row(1)[0] < 0.55, "{}", e.row(1)[0]);
}

#[test]
fn independent_coordinates_charge_the_axes() {
    let law = TailLaw::symmetric_pareto(1.0).unwrap();
    let mut s = derive_stream(3, 0);
    let n = 200_000;
    let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![law.sample(&mut s), law.sample(&mut s)]).collect();
    let m = angular_measure(&PathMatrix::from_rows(&rows).unwrap(), 2000).unwrap();
    let buckets = m.circle_buckets(8);
    for i in [0, 2, 4, 6] {
        assert!((buckets[i] - 0.25).abs() < 0.04, "{buckets:?}");
    }
    assert!(buckets[1] + buckets[3] + buckets[5] + buckets[7] < 0.02);
}

#[test]
fn circle_buckets_center_on_axes() {
    assert_eq!(circle_bucket(&[1.0, 0.0], 8), 0);
    assert_eq!(circle_bucket(&[1.0, 0.3], 8), 0);
    assert_eq!(circle_bucket(&[0.0, 1.0], 8), 2);
    assert_eq!(circle_bucket(&[-1.0, -1.0], 8), 5);
    assert_eq!(circle_bucket(&[1.0, -0.3], 8), 0);
}
