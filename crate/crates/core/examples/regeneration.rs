//! Nummelin splitting of an AR(1): cycles, Kac's identity, kernel fidelity.

use heavytail::models::{ModelSpec, Var1Spec};
use heavytail::randkit::{derive_stream, TailLaw};
use heavytail::regen::{harvest_blocks, kac_check, kernel_fidelity, small_set_probability, MinorizationSpec};
use heavytail::tailstats::{default_hill_k, hill_estimate};

fn main() -> heavytail::Result<()> {
    let spec = ModelSpec::Var1(Var1Spec::scalar(0.5, TailLaw::symmetric_pareto(1.5)?)?);
    let minor = MinorizationSpec::new(&spec, 2.0, None)?;
    println!("small set |x| <= {}, epsilon = {:.4}", minor.radius, minor.epsilon);

    let n = 500_000;
    let blocks = harvest_blocks(&spec, &minor, n, spec.default_burn_in(), &mut derive_stream(9, 0))?;
    println!(
        "{} cycles, decomposition exact: {}",
        blocks.block_sums.len(),
        blocks.decomposition_exact()
    );
    let pi = small_set_probability(&spec, &minor, n, &derive_stream(9, 1))?;
    let kac = kac_check(&blocks, minor.epsilon * pi)?;
    println!(
        "mean cycle {:.3} +- {:.3}, Kac {:.3}, geometric rate {:.3}",
        kac.mean_length, kac.std_error, kac.expected, kac.geometric_rate
    );
    let (ks, crit) = kernel_fidelity(&spec, &minor, &[1.0], 10_000, &derive_stream(9, 2))?;
    println!("kernel fidelity KS {ks:.4} (1% critical {crit:.4})");

    let sums = blocks.block_matrix().norms();
    let xs = blocks.path.norms();
    let hb = hill_estimate(&sums, default_hill_k(sums.len()))?;
    let hx = hill_estimate(&xs, default_hill_k(xs.len()))?;
    println!(
        "hill |S(i)| {:.3} [{:.3}, {:.3}], |X| {:.3} [{:.3}, {:.3}]",
        hb.alpha_hat, hb.ci_low, hb.ci_high, hx.alpha_hat, hx.ci_low, hx.ci_high
    );
    Ok(())
}
