use nalgebra::{DMatrix, DVector};

use super::{dot, norm, radius_draw, MarginalTail, TailProcessPath, TailProcessSampler};
use crate::error::{Error, Result};
use crate::randkit::{RngStream, TailLaw};

/// Law of the (path-wise constant) coefficient matrix `A`.
#[derive(Clone, Debug)]
pub enum MatrixLaw {
    Fixed(DMatrix<f64>),
    /// Finitely many matrices with probabilities; one is drawn per path.
    Finite(Vec<(DMatrix<f64>, f64)>),
}

impl MatrixLaw {
    pub fn support(&self) -> Vec<(&DMatrix<f64>, f64)> {
        match self {
            MatrixLaw::Fixed(m) => vec![(m, 1.0)],
            MatrixLaw::Finite(items) => {
                let total: f64 = items.iter().map(|(_, w)| w).sum();
                items.iter().map(|(m, w)| (m, w / total)).collect()
            }
        }
    }

    pub(crate) fn draw_index(&self, rng: &mut RngStream) -> usize {
        match self {
            MatrixLaw::Fixed(_) => 0,
            MatrixLaw::Finite(items) => {
                let mut acc = 0.0;
                let cumulative: Vec<f64> = items
                    .iter()
                    .map(|(_, w)| {
                        acc += w;
                        acc
                    })
                    .collect();
                rng.pick(&cumulative)
            }
        }
    }

    pub(crate) fn matrix(&self, index: usize) -> &DMatrix<f64> {
        match self {
            MatrixLaw::Fixed(m) => m,
            MatrixLaw::Finite(items) => &items[index].0,
        }
    }
}

/// Regularly varying innovation vector.
#[derive(Clone, Debug)]
pub enum Innovation {
    /// Independent coordinates with their own laws. Only the heaviest coordinates
    /// contribute to the angular measure, on the axes.
    Independent(Vec<TailLaw>),
    /// `Z = R U`: a radial law times a direction drawn from weighted unit vectors.
    Radial {
        radius: TailLaw,
        directions: Vec<(Vec<f64>, f64)>,
    },
}

impl Innovation {
    pub fn dim(&self) -> usize {
        match self {
            Innovation::Independent(laws) => laws.len(),
            Innovation::Radial { directions, .. } => directions.first().map_or(0, |d| d.0.len()),
        }
    }

    pub fn alpha(&self) -> Result<f64> {
        match self {
            Innovation::Independent(laws) => laws
                .iter()
                .filter(|l| l.is_regularly_varying())
                .map(|l| l.alpha)
                .min_by(f64::total_cmp)
                .ok_or_else(|| {
                    Error::UnsupportedLaw("no regularly varying innovation coordinate".into())
                }),
            Innovation::Radial { radius, .. } => {
                if radius.is_regularly_varying() {
                    Ok(radius.alpha)
                } else {
                    Err(Error::UnsupportedLaw("radial law is not regularly varying".into()))
                }
            }
        }
    }

    pub(crate) fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        match self {
            Innovation::Independent(laws) => {
                for (o, law) in out.iter_mut().zip(laws) {
                    *o = law.sample(rng);
                }
            }
            Innovation::Radial { radius, directions } => {
                let r = radius.sample(rng);
                let mut acc = 0.0;
                let target = rng.uniform() * directions.iter().map(|d| d.1).sum::<f64>();
                let mut chosen = &directions[directions.len() - 1].0;
                for (dir, w) in directions {
                    acc += w;
                    if target < acc {
                        chosen = dir;
                        break;
                    }
                }
                let len = norm(chosen);
                for (o, u) in out.iter_mut().zip(chosen) {
                    *o = r * u / len;
                }
            }
        }
    }

    /// Normalized angular atoms of the innovation's limit measure and the constant
    /// `C` with `P(|Z| > x) ~ C x^-alpha`.
    pub fn angular_atoms(&self) -> Result<(Vec<(Vec<f64>, f64)>, f64)> {
        let alpha = self.alpha()?;
        let d = self.dim();
        let mut atoms = Vec::new();
        let total;
        match self {
            Innovation::Independent(laws) => {
                let mut c_total = 0.0;
                for (i, law) in laws.iter().enumerate() {
                    if !law.is_regularly_varying() || (law.alpha - alpha).abs() > 1e-12 {
                        continue;
                    }
                    let c = law.tail_constant().unwrap_or(0.0);
                    let p = law.tail_balance();
                    c_total += c;
                    let mut e = vec![0.0; d];
                    e[i] = 1.0;
                    if p > 0.0 {
                        atoms.push((e.clone(), c * p));
                    }
                    if p < 1.0 {
                        e[i] = -1.0;
                        atoms.push((e, c * (1.0 - p)));
                    }
                }
                total = c_total;
            }
            Innovation::Radial { radius, directions } => {
                let c = radius.tail_constant().unwrap_or(0.0);
                let p = radius.tail_balance();
                let wsum: f64 = directions.iter().map(|d| d.1).sum();
                for (dir, w) in directions {
                    let len = norm(dir);
                    let u: Vec<f64> = dir.iter().map(|x| x / len).collect();
                    if p > 0.0 {
                        atoms.push((u.clone(), c * w / wsum * p));
                    }
                    if p < 1.0 {
                        atoms.push((u.iter().map(|x| -x).collect(), c * w / wsum * (1.0 - p)));
                    }
                }
                total = c;
            }
        }
        if !(total > 0.0) {
            return Err(Error::UnsupportedLaw("innovation tail constant unknown".into()));
        }
        for a in atoms.iter_mut() {
            a.1 /= total;
        }
        Ok((atoms, total))
    }

    pub fn mean(&self) -> Option<Vec<f64>> {
        match self {
            Innovation::Independent(laws) => laws.iter().map(|l| l.mean()).collect(),
            Innovation::Radial { radius, directions } => {
                let m = radius.mean()?;
                let wsum: f64 = directions.iter().map(|d| d.1).sum();
                let mut out = vec![0.0; self.dim()];
                for (dir, w) in directions {
                    let len = norm(dir);
                    for (o, u) in out.iter_mut().zip(dir) {
                        *o += m * w / wsum * u / len;
                    }
                }
                Some(out)
            }
        }
    }
}

/// Vector autoregression `X_t = A X_{t-1} + Z_t` with `A` drawn once per path.
#[derive(Clone, Debug)]
pub struct Var1Spec {
    pub a_law: MatrixLaw,
    pub innovation: Innovation,
}

impl Var1Spec {
    pub fn new(a_law: MatrixLaw, innovation: Innovation) -> Result<Self> {
        let spec = Var1Spec { a_law, innovation };
        spec.validate()?;
        Ok(spec)
    }

    /// Scalar AR(1) with a fixed coefficient.
    pub fn scalar(a: f64, law: TailLaw) -> Result<Self> {
        Self::new(
            MatrixLaw::Fixed(DMatrix::from_element(1, 1, a)),
            Innovation::Independent(vec![law]),
        )
    }

    pub fn dim(&self) -> usize {
        self.innovation.dim()
    }

    pub fn alpha(&self) -> Result<f64> {
        self.innovation.alpha()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        if let Innovation::Radial { directions, .. } = &self.innovation {
            if directions.is_empty() || directions.iter().any(|(v, w)| v.len() != d || *w < 0.0 || norm(v) == 0.0) {
                return Err(Error::param("radial directions must be nonzero with nonnegative weights"));
            }
        }
        for (m, w) in self.a_law.support() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::param(format!(
                    "coefficient matrix is {}x{}, innovation dimension is {d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if !(w >= 0.0) {
                return Err(Error::param("matrix weights must be nonnegative"));
            }
            let rho = spectral_radius(m);
            if rho >= 1.0 {
                return Err(Error::Divergence(format!(
                    "spectral radius {rho} of a support matrix is not below 1"
                )));
            }
        }
        Ok(())
    }

    pub fn spectral_radius(&self) -> f64 {
        self.a_law
            .support()
            .iter()
            .map(|(m, _)| spectral_radius(m))
            .fold(0.0, f64::max)
    }

    pub fn mean(&self) -> Option<Vec<f64>> {
        let mz = DVector::from_vec(self.innovation.mean()?);
        let d = self.dim();
        let mut out = DVector::zeros(d);
        for (m, w) in self.a_law.support() {
            let inv = (DMatrix::identity(d, d) - m).try_inverse()?;
            out += inv * &mz * w;
        }
        Some(out.iter().copied().collect())
    }

    pub fn theta_zero_table(&self) -> Result<ThetaZeroTable> {
        ThetaZeroTable::build(self)
    }

    pub fn marginal_tail(&self) -> Result<MarginalTail> {
        let table = self.theta_zero_table()?;
        let (_, c_z) = self.innovation.angular_atoms()?;
        let innovation = match &self.innovation {
            Innovation::Independent(laws) if laws.len() == 1 => Some(laws[0]),
            Innovation::Radial { radius, .. } => Some(*radius),
            _ => None,
        };
        Ok(MarginalTail {
            alpha: self.alpha()?,
            constant: c_z * table.total_weight,
            innovation_weight: table.total_weight,
            innovation,
        })
    }

    pub fn tail_sampler(&self) -> Result<Var1TailSampler> {
        Ok(Var1TailSampler {
            spec: self.clone(),
            table: self.theta_zero_table()?,
            alpha: self.alpha()?,
        })
    }
}

/// Joint law of `(A, Theta_0)` for the autoregression: the innovation atoms pushed
/// through `A^i`, weighted by `|A^i s|^alpha`.
#[derive(Clone, Debug)]
pub struct ThetaZeroTable {
    pub entries: Vec<(usize, Vec<f64>)>,
    pub weights: Vec<f64>,
    cumulative: Vec<f64>,
    /// Sum of all weights; `P(|X| > x) / P(|Z| > x)` tends to this value.
    pub total_weight: f64,
}

impl ThetaZeroTable {
    fn build(spec: &Var1Spec) -> Result<Self> {
        let alpha = spec.alpha()?;
        let (atoms, _) = spec.innovation.angular_atoms()?;
        let d = spec.dim();
        let mut entries = Vec::new();
        let mut weights = Vec::new();
        for (index, (m, pm)) in spec.a_law.support().into_iter().enumerate() {
            if pm == 0.0 {
                continue;
            }
            for (s, ws) in &atoms {
                let mut v = DVector::from_column_slice(s);
                let mut first = 0.0;
                for i in 0..200_000 {
                    let len = v.norm();
                    let w = pm * ws * len.powf(alpha);
                    if i == 0 {
                        first = w;
                    }
                    if len == 0.0 || w < first * 1e-17 {
                        break;
                    }
                    entries.push((index, v.iter().map(|x| x / len).collect::<Vec<f64>>()));
                    weights.push(w);
                    v = m * v;
                }
            }
            let _ = d;
        }
        if weights.is_empty() {
            return Err(Error::UnsupportedLaw("empty angular measure".into()));
        }
        let mut acc = 0.0;
        let cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(ThetaZeroTable {
            entries,
            weights,
            total_weight: acc,
            cumulative,
        })
    }

    pub fn draw(&self, rng: &mut RngStream) -> (usize, &[f64]) {
        let k = rng.pick(&self.cumulative);
        (self.entries[k].0, &self.entries[k].1)
    }

    /// Exact `E f(A, Theta_0)` under the table's law.
    pub fn expect(&self, mut f: impl FnMut(usize, &[f64]) -> f64) -> f64 {
        self.entries
            .iter()
            .zip(&self.weights)
            .map(|((i, v), w)| w * f(*i, v))
            .sum::<f64>()
            / self.total_weight
    }
}

pub struct Var1TailSampler {
    spec: Var1Spec,
    table: ThetaZeroTable,
    alpha: f64,
}

impl Var1TailSampler {
    pub fn table(&self) -> &ThetaZeroTable {
        &self.table
    }
}

impl TailProcessSampler for Var1TailSampler {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn sample(&self, horizon: usize, rng: &mut RngStream) -> Result<TailProcessPath> {
        let d = self.dim();
        let (index, theta0) = self.table.draw(rng);
        let a = self.spec.a_law.matrix(index);
        let mut theta = Vec::with_capacity((horizon + 1) * d);
        theta.extend_from_slice(theta0);
        let mut next = vec![0.0; d];
        for t in 1..=horizon {
            let prev = &theta[(t - 1) * d..t * d];
            for (r, slot) in next.iter_mut().enumerate() {
                *slot = (0..d).map(|c| a[(r, c)] * prev[c]).sum();
            }
            theta.extend_from_slice(&next);
        }
        Ok(TailProcessPath {
            theta,
            dim: d,
            pareto_radius: radius_draw(rng, self.alpha),
        })
    }
}

pub(crate) fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)].abs();
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub(crate) fn mat_vec(m: &DMatrix<f64>, v: &[f64], out: &mut [f64]) {
    let d = v.len();
    for (r, o) in out.iter_mut().enumerate() {
        *o = (0..d).map(|c| m[(r, c)] * v[c]).sum();
    }
}

#[allow(dead_code)]
pub(crate) fn project(theta: &[f64], v: &[f64]) -> f64 {
    dot(theta, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randkit::derive_stream;

    #[test]
    fn rejects_explosive_coefficients() {
        let law = TailLaw::pareto(1.5).unwrap();
        assert!(matches!(Var1Spec::scalar(1.2, law), Err(Error::Divergence(_))));
    }

    #[test]
    fn positive_scalar_table_is_plus_one() {
        let spec = Var1Spec::scalar(0.5, TailLaw::pareto(1.5).unwrap()).unwrap();
        let table = spec.theta_zero_table().unwrap();
        assert!(table.entries.iter().all(|(_, v)| v == &vec![1.0]));
        let expected = 1.0 / (1.0 - 0.5f64.powf(1.5));
        assert!((table.total_weight - expected).abs() < 1e-12);
    }

    #[test]
    fn negative_coefficient_alternates_sign() {
        let spec = Var1Spec::scalar(-0.5, TailLaw::pareto(1.0).unwrap()).unwrap();
        let table = spec.theta_zero_table().unwrap();
        // P(Theta_0 = +1) = sum over even i of 0.5^i / sum of all = 2/3
        let plus = table.expect(|_, v| if v[0] > 0.0 { 1.0 } else { 0.0 });
        assert!((plus - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn radial_directions_are_normalized() {
        let spec = Var1Spec::new(
            MatrixLaw::Fixed(DMatrix::zeros(2, 2)),
            Innovation::Radial {
                radius: TailLaw::pareto(1.0).unwrap(),
                directions: vec![(vec![3.0, 4.0], 1.0)],
            },
        )
        .unwrap();
        let mut rng = derive_stream(1, 1);
        let mut z = [0.0; 2];
        spec.innovation.sample_into(&mut rng, &mut z);
        assert!((z[0] / z[1] - 0.75).abs() < 1e-12);
    }
}
