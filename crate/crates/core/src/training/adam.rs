//! Adam with bias-corrected moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha > 0.0
            && self.alpha.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps > 0.0
            && self.eps.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!(
                "invalid Adam hyperparameters {self:?}"
            )))
        }
    }
}

#[derive(Clone, Debug)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: Vec<Matrix>,
    pub v: Vec<Matrix>,
    pub t: u64,
    // beta^t, kept as running products so every step is the same sequence
    // of multiplications on every platform.
    beta1_t: f64,
    beta2_t: f64,
}

impl AdamState {
    /// Zero moments for parameters of the given shapes.
    pub fn new(config: AdamConfig, shapes: &[(usize, usize)]) -> Result<Self> {
        config.validate()?;
        let zeros = || shapes.iter().map(|&(r, c)| Matrix::zeros(r, c)).collect();
        Ok(Self {
            config,
            m: zeros(),
            v: zeros(),
            t: 0,
            beta1_t: 1.0,
            beta2_t: 1.0,
        })
    }

    /// One update: `θ ← θ − α m̂ / (√v̂ + ε)`.
    ///
    /// Gradients are checked before anything is touched, so a rejected step
    /// leaves both parameters and state as they were.
    pub fn step(&mut self, params: Vec<&mut Matrix>, grads: &[Matrix]) -> Result<()> {
        if params.len() != grads.len() || grads.len() != self.m.len() {
            return Err(Error::State(format!(
                "Adam tracks {} tensors, got {} parameters and {} gradients",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.shape() != g.shape() || g.shape() != self.m[i].shape() {
                return Err(Error::Dimension {
                    op: "adam step",
                    lhs: p.shape(),
                    rhs: g.shape(),
                });
            }
            g.ensure_finite(|| format!("gradient of parameter tensor {i}"))?;
        }

        let AdamConfig {
            alpha,
            beta1,
            beta2,
            eps,
        } = self.config;
        self.t += 1;
        self.beta1_t *= beta1;
        self.beta2_t *= beta2;
        let bc1 = 1.0 - self.beta1_t;
        let bc2 = 1.0 - self.beta2_t;

        for ((p, g), (m, v)) in params
            .into_iter()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            let moments = m.data_mut().iter_mut().zip(v.data_mut().iter_mut());
            for ((theta, &g), (m, v)) in p.data_mut().iter_mut().zip(g.data()).zip(moments) {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *theta -= alpha * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
