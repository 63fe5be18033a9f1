//! Foster-Lyapunov drift fits and the horizon they imply.

use heavytail::models::{drift_margin, horizon_for_tolerance, Garch11Spec, ModelSpec, Var1Spec};
use heavytail::randkit::{derive_stream, TailLaw};

fn main() -> heavytail::Result<()> {
    let var1 = ModelSpec::Var1(Var1Spec::scalar(0.5, TailLaw::symmetric_pareto(1.5)?)?);
    let garch = ModelSpec::Garch11(Garch11Spec::gaussian(0.1, 0.1, 0.85)?);
    let states = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0];
    for (spec, p) in [(&var1, 1.0), (&garch, 1.0)] {
        let grid: Vec<Vec<f64>> = states
            .iter()
            .map(|&s| if spec.dim() == 2 { vec![s, 0.0] } else { vec![s] })
            .collect();
        let r = drift_margin(spec, p, 1, &grid, 4000, &derive_stream(8, 0))?;
        println!(
            "{}: beta = {:.4} +- {:.4}, b = {:.4}, pass = {}, horizon(1e-4) = {}",
            spec.name(),
            r.beta,
            r.beta_se,
            r.intercept,
            r.pass,
            horizon_for_tolerance(r.beta, 1.0, 1e-4)?
        );
    }
    Ok(())
}
