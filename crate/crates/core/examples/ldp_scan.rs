//! Large-deviation ratios P(S_n > x) / (n P(|X| > x)) over the region (b_n, c_n).

use heavytail::cluster::{var1_cluster_index_exact, Direction};
use heavytail::limits::{choose_centering, ldp_region, ldp_scan, LdpConfig};
use heavytail::models::{ModelSpec, Var1Spec};
use heavytail::randkit::{derive_stream, TailLaw};

fn main() -> heavytail::Result<()> {
    for (a, alpha, n, eps) in [(0.0, 0.8, 100, 1.0), (0.5, 1.5, 200, 0.3)] {
        let v = Var1Spec::scalar(a, TailLaw::pareto(alpha)?)?;
        let target = var1_cluster_index_exact(&v, &Direction::plus())?;
        let spec = ModelSpec::Var1(v);
        let tail = spec.marginal_tail().expect("known marginal tail");
        let cfg = LdpConfig {
            n,
            region: ldp_region(n, alpha, eps, 10.0)?,
            grid_size: 6,
            reps: 50_000,
            burn_in: spec.default_burn_in(),
            centering: choose_centering(&spec, alpha, 0, &derive_stream(6, 1))?,
            min_exceedances: 50,
        };
        let res = ldp_scan(&spec, &Direction::plus(), target, &tail, &cfg, &derive_stream(6, 0))?;
        println!("a = {a}, alpha = {alpha}, n = {n}: target {target:.4}, centering {}", res.centering.label());
        for i in 0..res.xs.len() {
            println!(
                "  x = {:>12.1}  ratio = {:.4} +- {:.4}  ({} hits)",
                res.xs[i], res.ratios[i], res.ratio_se[i], res.exceedances[i]
            );
        }
    }
    Ok(())
}
