//! Spectral tail process of an AR(1): exact sampler against the empirical tail process.

use heavytail::models::{simulate_path, ModelSpec, Var1Spec};
use heavytail::randkit::{derive_stream, TailLaw};
use heavytail::tailstats::empirical_tail_process;

fn main() -> heavytail::Result<()> {
    let spec = ModelSpec::Var1(Var1Spec::scalar(0.6, TailLaw::pareto(1.5)?)?);
    let horizon = 6;
    let sampler = spec.tail_sampler(&derive_stream(4, 99))?;
    let mut rng = derive_stream(4, 0);
    let draws = 20_000;
    let mut mean = vec![0.0; horizon + 1];
    for _ in 0..draws {
        let p = sampler.sample(horizon, &mut rng)?;
        for (t, m) in mean.iter_mut().enumerate() {
            *m += p.row(t)[0] / draws as f64;
        }
    }
    let path = simulate_path(&spec, 1_000_000, spec.default_burn_in(), &mut rng)?;
    let emp = empirical_tail_process(&path, 0.999, horizon)?;
    println!("{} exceedances above {:.2}", emp.exceedance_count, emp.threshold);
    println!(" t   sampler E[Theta_t]   empirical E[X_t/|X_0|]   a^t");
    for t in 0..=horizon {
        println!(
            "{t:>2}   {:>10.4}   {:>10.4} +- {:.4}   {:.4}",
            mean[t],
            emp.row(t)[0],
            emp.se_row(t)[0],
            0.6f64.powi(t as i32)
        );
    }
    Ok(())
}
