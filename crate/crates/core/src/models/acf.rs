use super::{Chain, ModelSpec, PathMatrix};
use crate::error::{Error, Result};
use crate::randkit::RngStream;

/// Lag products `X_t X_{t-1}, ..., X_t X_{t-h}` followed by `X_t^2`, for `t = h+1, ..., h+n`.
///
/// `X` is the observation of a scalar Kesten chain or the return of a GARCH(1,1) chain.
pub fn acf_functional_path(
    spec: &ModelSpec,
    lag_max: usize,
    n: usize,
    burn_in: usize,
    stream: &mut RngStream,
) -> Result<PathMatrix> {
    let column = match spec {
        ModelSpec::Garch11(_) => 1,
        ModelSpec::Kesten(k) if k.dim() == 1 => 0,
        _ => {
            return Err(Error::UnsupportedCase(
                "lag-product functional needs GARCH(1,1) or a scalar Kesten chain".into(),
            ))
        }
    };
    if n <= lag_max {
        return Err(Error::param(format!("n = {n} must exceed lag_max = {lag_max}")));
    }
    let mut chain = Chain::new(spec, stream)?;
    for _ in 0..burn_in {
        chain.step(stream)?;
    }
    let mut window = vec![0.0; lag_max + 1];
    for slot in window.iter_mut().rev() {
        chain.step(stream)?;
        *slot = chain.state()[column];
    }
    let dim = lag_max + 1;
    let mut values = Vec::with_capacity(n * dim);
    for _ in 0..n {
        chain.step(stream)?;
        window.rotate_right(1);
        window[0] = chain.state()[column];
        let x = window[0];
        for lag in 1..=lag_max {
            values.push(x * window[lag]);
        }
        values.push(x * x);
    }
    Ok(PathMatrix {
        values,
        rows: n,
        dim,
        burn_in_used: burn_in,
        stream_id: stream.stream_id(),
    })
}
