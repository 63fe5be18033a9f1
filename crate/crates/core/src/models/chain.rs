use super::{var1::mat_vec, ModelSpec};
use crate::error::{Error, Result};
use crate::randkit::RngStream;

/// Step-by-step simulator of one model chain.
pub struct Chain<'a> {
    spec: &'a ModelSpec,
    state: Vec<f64>,
    scratch: Vec<f64>,
    noise: Vec<f64>,
    matrix_index: usize,
}

impl<'a> Chain<'a> {
    /// Starts at the origin (or the unconditional variance level for GARCH). For the
    /// autoregression the path's coefficient matrix is drawn here from `stream`.
    pub fn new(spec: &'a ModelSpec, stream: &mut RngStream) -> Result<Self> {
        let d = spec.dim();
        let (state, matrix_index) = match spec {
            ModelSpec::Var1(s) => (vec![0.0; d], s.a_law.draw_index(stream)),
            ModelSpec::Kesten(_) => (vec![0.0; d], 0),
            ModelSpec::Garch11(g) => {
                let persistence = g.alpha1 + g.beta1;
                let var = if persistence < 1.0 {
                    g.alpha0 / (1.0 - persistence)
                } else {
                    g.alpha0
                };
                (vec![var.sqrt(), 0.0], 0)
            }
        };
        Ok(Chain {
            spec,
            state,
            scratch: vec![0.0; d],
            noise: vec![0.0; d],
            matrix_index,
        })
    }

    /// Same as [`Chain::new`] but started from `state`.
    pub fn from_state(spec: &'a ModelSpec, state: &[f64], stream: &mut RngStream) -> Result<Self> {
        let mut chain = Self::new(spec, stream)?;
        if state.len() != chain.state.len() {
            return Err(Error::param(format!(
                "initial state has dimension {}, model has {}",
                state.len(),
                chain.state.len()
            )));
        }
        chain.state.copy_from_slice(state);
        Ok(chain)
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn set_state(&mut self, state: &[f64]) {
        self.state.copy_from_slice(state);
    }

    pub fn matrix_index(&self) -> usize {
        self.matrix_index
    }

    pub fn step(&mut self, stream: &mut RngStream) -> Result<()> {
        match self.spec {
            ModelSpec::Var1(s) => {
                s.innovation.sample_into(stream, &mut self.noise);
                let a = s.a_law.matrix(self.matrix_index);
                if self.state.len() == 1 {
                    self.state[0] = a[(0, 0)] * self.state[0] + self.noise[0];
                } else {
                    mat_vec(a, &self.state, &mut self.scratch);
                    for ((x, ax), z) in self.state.iter_mut().zip(&self.scratch).zip(&self.noise) {
                        *x = ax + z;
                    }
                }
            }
            ModelSpec::Kesten(s) => {
                let mut factor = 0.0;
                s.draw_pair(stream, &mut factor, &mut self.noise);
                s.apply(factor, &mut self.state, &mut self.scratch);
                for (x, b) in self.state.iter_mut().zip(&self.noise) {
                    *x += b;
                }
            }
            ModelSpec::Garch11(g) => {
                let (sigma, x) = (self.state[0], self.state[1]);
                let var = g.alpha0 + g.alpha1 * x * x + g.beta1 * sigma * sigma;
                let sigma = var.sqrt();
                self.state[0] = sigma;
                self.state[1] = sigma * g.noise.sample(stream);
            }
        }
        if self.state.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence(format!(
                "{} recursion produced a non-finite state; check the contraction condition",
                self.spec.name()
            )));
        }
        Ok(())
    }
}
