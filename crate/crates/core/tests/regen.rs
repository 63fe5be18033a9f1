use heavytail::models::{simulate_path, Innovation, KestenSpec, MatrixLaw, ModelSpec, ScalarLaw, Var1Spec};
use heavytail::randkit::{derive_stream, TailLaw};
use heavytail::regen::{
    block_spectral_measure, harvest_blocks, kac_check, kac_from_lengths, kernel_fidelity, small_set_probability,
    split_step, var1_cycle_angular_law, MinorizationSpec,
};
use heavytail::error::Error;
use heavytail::tailstats::{default_hill_k, hill_estimate};
use nalgebra::DMatrix;

fn ar1(a: f64, law: TailLaw) -> ModelSpec {
    ModelSpec::Var1(Var1Spec::scalar(a, law).unwrap())
}

#[test]
fn iid_chain_is_atomized() {
    let spec = ar1(0.0, TailLaw::pareto(1.5).unwrap());
    let minor = MinorizationSpec::whole_space(&spec).unwrap();
    assert_eq!(minor.epsilon, 1.0);
    let n = 5000;
    let b = harvest_blocks(&spec, &minor, n, 0, &mut derive_stream(0, 0)).unwrap();
    assert!(b.cycle_lengths.iter().all(|l| *l == 1));
    for (i, s) in b.block_sums.iter().enumerate() {
        assert_eq!(s[0], b.path.row(b.cycle_starts[i])[0]);
    }
    let k = kac_check(&b, 1.0).unwrap();
    assert_eq!(k.mean_length, 1.0);
    assert!(MinorizationSpec::whole_space(&ar1(0.5, TailLaw::pareto(1.5).unwrap())).is_err());
}

#[test]
fn decomposition_is_exact() {
    let models = [
        ar1(0.5, TailLaw::symmetric_pareto(1.5).unwrap()),
        ar1(-0.8, TailLaw::pareto(0.9).unwrap()),
        ModelSpec::Kesten(KestenSpec::scalar(ScalarLaw::Uniform { lo: -0.9, hi: 0.9 }, ScalarLaw::Tail(TailLaw::symmetric_pareto(1.5).unwrap())).unwrap()),
    ];
    for (i, spec) in models.iter().enumerate() {
        let minor = MinorizationSpec::new(spec, 2.0, None).unwrap();
        let b = harvest_blocks(spec, &minor, 50_000, 100, &mut derive_stream(1, i as u64)).unwrap();
        assert!(b.decomposition_exact(), "model {i}");
        assert!(!b.block_sums.is_empty());
    }
}

#[test]
fn kac_identity_for_ar1() {
    let spec = ar1(0.5, TailLaw::symmetric_pareto(1.5).unwrap());
    let minor = MinorizationSpec::new(&spec, 2.0, None).unwrap();
    let b = harvest_blocks(&spec, &minor, 400_000, 100, &mut derive_stream(2, 0)).unwrap();
    let pi = small_set_probability(&spec, &minor, 1_000_000, &derive_stream(2, 1)).unwrap();
    let k = kac_check(&b, minor.epsilon * pi).unwrap();
    assert!(k.within(3.0), "{k:?}");
    assert!(k.log_tail_slope < 0.0);
}

#[test]
fn geometric_cycle_lengths() {
    let mut rng = derive_stream(3, 0);
    let lengths: Vec<usize> = (0..20_000)
        .map(|_| {
            let mut l = 1;
            while rng.uniform() > 0.2 {
                l += 1;
            }
            l
        })
        .collect();
    let k = kac_from_lengths(&lengths, 0.2).unwrap();
    assert!(k.within(3.0), "{k:?}");
    assert!((k.geometric_rate - 0.8).abs() < 0.02, "{}", k.geometric_rate);
    assert!(matches!(kac_from_lengths(&lengths[..10], 0.2), Err(Error::InsufficientCycles { .. })));
}

#[test]
fn too_few_steps_for_a_cycle() {
    let spec = ar1(0.5, TailLaw::symmetric_pareto(1.5).unwrap());
    let minor = MinorizationSpec::new(&spec, 1e-3, None).unwrap();
    let e = harvest_blocks(&spec, &minor, 3, 20, &mut derive_stream(4, 0)).unwrap_err();
    assert!(matches!(e, Error::NoCycles(3)), "{e:?}");
}

#[test]
fn split_kernel_matches_model_kernel() {
    let spec = ar1(0.5, TailLaw::symmetric_pareto(1.5).unwrap());
    let minor = MinorizationSpec::new(&spec, 1.0, Some(0.2)).unwrap();
    for (i, x) in [0.0, 0.9, -0.5, 5.0].iter().enumerate() {
        let (d, crit) = kernel_fidelity(&spec, &minor, &[*x], 10_000, &derive_stream(5, i as u64)).unwrap();
        assert!(d < crit, "x = {x}: {d} vs {crit}");
    }
}

#[test]
fn outside_small_set_never_regenerates() {
    let spec = ar1(0.5, TailLaw::symmetric_pareto(1.5).unwrap());
    let minor = MinorizationSpec::new(&spec, 1.0, None).unwrap();
    let mut rng = derive_stream(6, 0);
    for _ in 0..10_000 {
        assert!(!split_step(&[1.5], &minor, &mut rng).unwrap().1);
    }
}

#[test]
fn block_sums_share_the_tail_index() {
    let spec = ar1(0.5, TailLaw::symmetric_pareto(1.5).unwrap());
    let minor = MinorizationSpec::new(&spec, 2.0, None).unwrap();
    let b = harvest_blocks(&spec, &minor, 1_000_000, 100, &mut derive_stream(7, 0)).unwrap();
    let s = b.block_matrix().norms();
    let x = b.path.norms();
    let hs = hill_estimate(&s, default_hill_k(s.len())).unwrap();
    let hx = hill_estimate(&x, default_hill_k(x.len())).unwrap();
    assert!(hs.overlaps(&hx), "{hs:?} {hx:?}");
}

#[test]
fn blocks_look_independent() {
    let spec = ar1(0.5, TailLaw::gaussian(1.0).unwrap());
    let minor = MinorizationSpec::new(&spec, 1.0, None).unwrap();
    let b = harvest_blocks(&spec, &minor, 200_000, 50, &mut derive_stream(8, 0)).unwrap();
    let v: Vec<f64> = b.block_sums.iter().map(|s| s[0].abs()).collect();
    let n = v.len() - 1;
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    let cov: f64 = (0..n).map(|i| (v[i] - m) * (v[i + 1] - m)).sum();
    let r = cov / var;
    assert!(r.abs() < 3.0 / (n as f64).sqrt(), "lag-1 correlation {r}");
}

#[test]
fn positive_chain_blocks_point_up() {
    let spec = ar1(0.5, TailLaw::pareto(1.5).unwrap());
    let minor = MinorizationSpec::new(&spec, 3.0, None).unwrap();
    let b = harvest_blocks(&spec, &minor, 100_000, 100, &mut derive_stream(9, 0)).unwrap();
    let m = block_spectral_measure(&b, 200).unwrap();
    assert!((m.mass_where(|u| u[0] > 0.0) - 1.0).abs() < 1e-12);
    assert!(block_spectral_measure(&b, 0).is_err());
}

#[test]
fn bivariate_cycle_angular_law() {
    let a = DMatrix::from_row_slice(2, 2, &[0.6, 0.0, 0.0, 0.2]);
    let law = TailLaw::symmetric_pareto(1.5).unwrap();
    let v = Var1Spec::new(MatrixLaw::Fixed(a), Innovation::Independent(vec![law, law])).unwrap();
    let spec = ModelSpec::Var1(v.clone());
    let minor = MinorizationSpec::new(&spec, 2.0, None).unwrap();
    let b = harvest_blocks(&spec, &minor, 2_000_000, 100, &mut derive_stream(10, 0)).unwrap();
    let k = b.block_sums.len() / 100;
    let emp = block_spectral_measure(&b, k).unwrap().circle_buckets(8);
    let truth = var1_cycle_angular_law(&v).unwrap().circle_buckets(8);
    for i in [0, 2, 4, 6] {
        let se = (truth[i] * (1.0 - truth[i]) / k as f64).sqrt();
        assert!((emp[i] - truth[i]).abs() < 3.0 * se, "bucket {i}: {} vs {}", emp[i], truth[i]);
    }
    // off-axis cells carry no limit mass, only finite-level leakage
    let off: f64 = [1, 3, 5, 7].iter().map(|i| emp[*i]).sum();
    assert!(off < 0.05, "{off}");
    // single observations put less mass on the fast coordinate's axis than cycle sums do
    let path = simulate_path(&spec, 400_000, 100, &mut derive_stream(10, 1)).unwrap();
    let single = heavytail::tailstats::angular_measure(&path, 2000).unwrap().circle_buckets(8);
    assert!(single[0] + single[4] < truth[0] + truth[4]);
}
