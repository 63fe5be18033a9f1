//! Tail indices from the moment equations of GARCH(1,1) and the Kesten recursion.

use heavytail::models::{Garch11Spec, GarchNoise, KestenSpec, ScalarLaw};

fn main() -> heavytail::Result<()> {
    for (a1, b1) in [(0.1, 0.85), (0.15, 0.8), (0.3, 0.7), (0.05, 0.9)] {
        let g = Garch11Spec::gaussian(0.1, a1, b1)?;
        println!("garch({a1}, {b1}) gaussian: alpha = {:.6}", g.tail_index()?);
    }
    let t = Garch11Spec::new(0.1, 0.1, 0.85, GarchNoise::StudentT { nu: 8.0 })?;
    println!("garch(0.1, 0.85) student t(8): alpha = {:.4}", t.tail_index()?);

    for (mu, s2) in [(-0.5, 0.5), (-0.25, 0.5), (-1.0, 1.0)] {
        let k = KestenSpec::scalar(ScalarLaw::LogNormal { mu, sigma2: s2 }, ScalarLaw::Constant(1.0))?;
        println!(
            "kesten lognormal({mu}, {s2}): kappa = {:.8} (closed form {})",
            k.tail_index()?,
            -2.0 * mu / s2
        );
    }
    Ok(())
}
