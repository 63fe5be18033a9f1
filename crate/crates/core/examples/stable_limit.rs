//! Characteristic function of normalized partial sums against the stable limit.

use heavytail::cluster::{var1_cluster_index_exact, Direction};
use heavytail::limits::{choose_centering, normalizing_constant, stable_check, StableCheckConfig, StableLawParams};
use heavytail::models::{ModelSpec, Var1Spec};
use heavytail::randkit::{derive_stream, TailLaw};

fn main() -> heavytail::Result<()> {
    for a in [0.0, 0.5] {
        let v = Var1Spec::scalar(a, TailLaw::symmetric_pareto(1.5)?)?;
        let plus = Direction::plus();
        let bp = var1_cluster_index_exact(&v, &plus)?;
        let bm = var1_cluster_index_exact(&v, &plus.neg())?;
        let spec = ModelSpec::Var1(v);
        let params = StableLawParams::new(1.5, vec![(plus, bp, bm)])?;
        let tail = spec.marginal_tail().expect("known marginal tail");
        let n = 1000;
        let cfg = StableCheckConfig {
            n,
            reps: 2000,
            burn_in: spec.default_burn_in(),
            a_n: normalizing_constant(&tail, n as u64),
            centering: choose_centering(&spec, 1.5, 0, &derive_stream(7, 1))?,
        };
        let cmp = &stable_check(&spec, &params, &cfg, &derive_stream(7, 0))?[0];
        println!(
            "a = {a}: b(+1) = {bp:.4}, b(-1) = {bm:.4}, sup gap {:.4} vs band {:.4}",
            cmp.sup_abs_gap, cmp.mc_band
        );
        for i in (0..cmp.grid.len()).step_by(10) {
            println!(
                "  x = {:+.1}  empirical {:.4}  limit {:.4}",
                cmp.grid[i], cmp.empirical[i].0, cmp.theoretical[i].0
            );
        }
    }
    Ok(())
}
