//! Long-run variance from regeneration cycles against batch means, light-tailed AR(1).

use heavytail::limits::gaussian_sigma;
use heavytail::models::{ModelSpec, Var1Spec};
use heavytail::randkit::{derive_stream, TailLaw};
use heavytail::regen::{harvest_blocks, MinorizationSpec};

fn main() -> heavytail::Result<()> {
    let spec = ModelSpec::Var1(Var1Spec::scalar(0.5, TailLaw::gaussian(1.0)?)?);
    let minor = MinorizationSpec::new(&spec, 1.0, None)?;
    let blocks = harvest_blocks(&spec, &minor, 1_000_000, 50, &mut derive_stream(11, 0))?;
    let r = gaussian_sigma(&blocks)?;
    println!(
        "cycles {}: sigma^2 blocks {:.4}, batch means {:.4} (batch {}), exact {:.4}, gap {:.3}",
        r.cycles,
        r.sigma_hat[0][0],
        r.batch_sigma[0][0],
        r.batch_size,
        1.0 / (0.5f64 * 0.5),
        r.rel_gap
    );
    Ok(())
}
