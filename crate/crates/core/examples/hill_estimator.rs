//! Hill estimates and normalizing constants on iid samples.

use heavytail::randkit::{derive_stream, sample_pareto, sample_stable, TailLaw};
use heavytail::tailstats::{default_hill_k, hill_estimate, normalizing_sequence, NormSource};

fn main() -> heavytail::Result<()> {
    let n = 100_000;
    let mut rng = derive_stream(3, 0);
    for alpha in [0.8, 1.5, 3.0] {
        let x = sample_pareto(&mut rng, alpha, n)?;
        let fit = hill_estimate(&x, default_hill_k(n))?;
        let a_exact = normalizing_sequence(NormSource::Law(TailLaw::pareto(alpha)?), n as u64)?;
        let a_emp = normalizing_sequence(NormSource::Samples(&x), n as u64)?;
        println!(
            "pareto({alpha}): hill {:.3} [{:.3}, {:.3}]  a_n exact {:.1}, empirical {:.1}",
            fit.alpha_hat, fit.ci_low, fit.ci_high, a_exact, a_emp
        );
    }
    let s: Vec<f64> = sample_stable(&mut rng, 1.5, 0.0, n)?.iter().map(|v| v.abs()).collect();
    for k in [100, 316, 1000, 3000] {
        let fit = hill_estimate(&s, k)?;
        println!("stable(1.5) k = {k:>4}: hill {:.3}", fit.alpha_hat);
    }
    Ok(())
}
