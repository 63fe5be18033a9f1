//! Angular measure of large cycle sums for a bivariate autoregression.

use heavytail::models::{simulate_path, MatrixLaw, Innovation, ModelSpec, Var1Spec};
use heavytail::randkit::{derive_stream, TailLaw};
use heavytail::regen::{block_spectral_measure, harvest_blocks, var1_cycle_angular_law, MinorizationSpec};
use heavytail::tailstats::angular_measure;
use nalgebra::DMatrix;

fn main() -> heavytail::Result<()> {
    let a = DMatrix::from_row_slice(2, 2, &[0.6, 0.0, 0.0, 0.2]);
    let law = TailLaw::symmetric_pareto(1.5)?;
    let v = Var1Spec::new(MatrixLaw::Fixed(a), Innovation::Independent(vec![law, law]))?;
    let spec = ModelSpec::Var1(v.clone());

    let path = simulate_path(&spec, 400_000, spec.default_burn_in(), &mut derive_stream(10, 0))?;
    let single = angular_measure(&path, 2000)?;
    let minor = MinorizationSpec::new(&spec, 2.0, None)?;
    let blocks = harvest_blocks(&spec, &minor, 2_000_000, 100, &mut derive_stream(10, 1))?;
    let k = blocks.block_sums.len() / 100;
    let cycle = block_spectral_measure(&blocks, k)?;
    let truth = var1_cycle_angular_law(&v)?;

    println!("{} cycles, top {k} used", blocks.block_sums.len());
    println!("bucket   single   cycles   theory");
    let (s, c, t) = (single.circle_buckets(8), cycle.circle_buckets(8), truth.circle_buckets(8));
    for i in 0..8 {
        println!("{i:>6}   {:.4}   {:.4}   {:.4}", s[i], c[i], t[i]);
    }
    Ok(())
}
