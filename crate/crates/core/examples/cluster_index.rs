//! Cluster index of an AR(1) by every route, against the exact value.

use heavytail::cluster::{
    closed_form_cluster_index, cluster_index_tail_process, extremal_index, telescoping_difference,
    var1_cluster_index_exact, Direction,
};
use heavytail::models::{ModelSpec, Var1Spec};
use heavytail::randkit::{derive_stream, TailLaw};

fn main() -> heavytail::Result<()> {
    for (a, law) in [
        (0.5, TailLaw::pareto(1.5)?),
        (0.5, TailLaw::symmetric_pareto(1.5)?),
        (-0.5, TailLaw::pareto(1.0)?),
    ] {
        let v = Var1Spec::scalar(a, law)?;
        let spec = ModelSpec::Var1(v.clone());
        let alpha = law.alpha;
        let sampler = spec.tail_sampler(&derive_stream(5, 100))?;
        let stream = derive_stream(5, 0);
        println!("a = {a}, {:?}({alpha})", law.family);
        for theta in [Direction::plus(), Direction::plus().neg()] {
            let exact = var1_cluster_index_exact(&v, &theta)?;
            let ests = [
                cluster_index_tail_process(sampler.as_ref(), &theta, alpha, 40, 100_000, &stream)?,
                closed_form_cluster_index(&spec, &theta, 100_000, 40, &stream)?,
                telescoping_difference(sampler.as_ref(), &theta, alpha, 30, 100_000, &stream)?,
                extremal_index(sampler.as_ref(), &theta, alpha, 40, 100_000, &stream)?,
            ];
            println!("  theta = {:+}: exact b = {exact:.6}", theta.theta[0]);
            for e in &ests {
                println!("    {:<13} {:.6} +- {:.2e}", e.route.name(), e.value, e.std_error);
            }
        }
    }
    Ok(())
}
