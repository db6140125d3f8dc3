//! Central finite-difference check of backprop.
//!
//! The analytic gradient is the model's own `f64` backward pass. The
//! numeric side re-evaluates the loss with a separate forward pass written
//! in double-double arithmetic, so the difference quotient is not swamped by
//! `f64` rounding: with degree-8 blocks a loss near 1e9 changes by less than
//! one ulp for a 1e-6 step, and entries near 1e-10 drown in rounding noise.

use crate::activation::{factorial, Activation, Basis};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::{Forward, Init, LayerSpec, Model, ModelConfig, SwagShape};
use crate::rng::Rng;
use crate::training::dd::Dd;
use crate::training::loss::Loss;

pub const DEFAULT_STEP: f64 = 1e-6;

/// Column-major batch of double-double values: `cols[j][i]` is row `i`.
type Batch = Vec<Vec<Dd>>;

struct Reference<'a> {
    layers: &'a [LayerSpec],
    basis: Basis,
    /// Weight then bias per parameterised layer, row-major.
    params: Vec<Vec<Dd>>,
    shapes: Vec<(usize, usize)>,
    loss: Loss,
    inputs: Batch,
    targets: Batch,
}

fn to_batch(m: &Matrix) -> Batch {
    (0..m.cols())
        .map(|c| m.col(c).into_iter().map(Dd::from).collect())
        .collect()
}

fn affine(w: &[Dd], b: &[Dd], (rows, cols): (usize, usize), x: &Batch) -> Batch {
    x.iter()
        .map(|col| {
            (0..rows)
                .map(|r| {
                    w[r * cols..(r + 1) * cols]
                        .iter()
                        .zip(col)
                        .fold(b[r], |acc, (&wi, &xi)| acc + wi * xi)
                })
                .collect()
        })
        .collect()
}

fn sigma(z: Dd, p: u32, basis: Basis) -> Dd {
    match basis {
        Basis::Factorial => z.powi(p) / Dd::from(factorial(p)),
        Basis::Plain => z.powi(p),
    }
}

fn sigmoid(z: Dd) -> Dd {
    if z >= Dd::ZERO {
        Dd::ONE / (Dd::ONE + (-z).exp())
    } else {
        let e = z.exp();
        e / (Dd::ONE + e)
    }
}

fn activate(z: Dd, a: Activation, basis: Basis) -> Dd {
    match a {
        Activation::Monomial(p) => sigma(z, p, basis),
        Activation::Linear | Activation::Softmax => z,
        Activation::Relu => {
            if z > Dd::ZERO {
                z
            } else {
                Dd::ZERO
            }
        }
        Activation::Sigmoid => sigmoid(z),
        Activation::Tanh => {
            let t = Dd::ONE - Dd::from(2.0) / ((z.abs() * Dd::from(2.0)).exp() + Dd::ONE);
            if z.to_f64() < 0.0 {
                -t
            } else {
                t
            }
        }
        Activation::Softplus => {
            let pos = if z > Dd::ZERO { z } else { Dd::ZERO };
            pos + (Dd::ONE + (-z.abs()).exp()).ln()
        }
    }
}

fn log_sum_exp(col: &[Dd]) -> Dd {
    let max = col
        .iter()
        .copied()
        .fold(col[0], |m, z| if z > m { z } else { m });
    let sum = col.iter().fold(Dd::ZERO, |acc, &z| acc + (z - max).exp());
    max + sum.ln()
}

impl Reference<'_> {
    fn loss(&self) -> Dd {
        let mut h = self.inputs.clone();
        let mut pi = 0;
        let last = self
            .layers
            .iter()
            .rposition(|l| !matches!(l, LayerSpec::Dropout { .. }));
        for (i, layer) in self.layers.iter().enumerate() {
            match *layer {
                LayerSpec::MonomialBlock { width, .. } => {
                    let (w, b) = (&self.params[pi], &self.params[pi + 1]);
                    let mut z = affine(w, b, self.shapes[pi], &h);
                    for col in &mut z {
                        for (r, v) in col.iter_mut().enumerate() {
                            *v = sigma(*v, (r / width) as u32 + 1, self.basis);
                        }
                    }
                    h = z;
                    pi += 2;
                }
                LayerSpec::Affine { activation, .. } => {
                    let (w, b) = (&self.params[pi], &self.params[pi + 1]);
                    let mut z = affine(w, b, self.shapes[pi], &h);
                    let logits_out = Some(i) == last && self.loss.wants_logits();
                    if activation == Activation::Softmax && !logits_out {
                        for col in &mut z {
                            let lse = log_sum_exp(col);
                            for v in col.iter_mut() {
                                *v = (*v - lse).exp();
                            }
                        }
                    } else if !logits_out {
                        for v in z.iter_mut().flatten() {
                            *v = activate(*v, activation, self.basis);
                        }
                    }
                    h = z;
                    pi += 2;
                }
                LayerSpec::Dropout { .. } => {}
            }
        }

        let n = h.len().max(1);
        match self.loss {
            Loss::Mse => {
                let count = (h.first().map_or(0, Vec::len) * n).max(1);
                let sum = h.iter().flatten().zip(self.targets.iter().flatten()).fold(
                    Dd::ZERO,
                    |acc, (&p, &t)| {
                        let r = p - t;
                        acc + r * r
                    },
                );
                sum / Dd::from(count as f64)
            }
            Loss::SoftmaxCrossEntropy => {
                let sum = h.iter().zip(&self.targets).fold(Dd::ZERO, |acc, (z, t)| {
                    let y = t.iter().position(|&v| v == Dd::ONE).unwrap_or(0);
                    acc + log_sum_exp(z) - z[y]
                });
                sum / Dd::from(n as f64)
            }
        }
    }
}

/// Largest `|analytic - numeric| / max(1e-8, |analytic| + |numeric|)` over
/// every parameter, where `numeric` is the central difference with step `h`.
/// Dropout is off. A model without parameters scores 0.
pub fn grad_check(
    model: &mut Model,
    loss: Loss,
    inputs: &Matrix,
    targets: &Matrix,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::config(format!(
            "finite-difference step {h} must be positive"
        )));
    }
    let out = model.forward_with(
        inputs,
        Forward {
            dropout: None,
            logits: loss.wants_logits(),
        },
    )?;
    let (_, grad) = loss.evaluate(&out, targets)?;
    let analytic = model.backward(&grad)?.params;

    let params = model.parameters();
    let mut reference = Reference {
        layers: &model.config().layers,
        basis: model.config().basis,
        params: params
            .iter()
            .map(|m| m.data().iter().copied().map(Dd::from).collect())
            .collect(),
        shapes: params.iter().map(|m| m.shape()).collect(),
        loss,
        inputs: to_batch(inputs),
        targets: to_batch(targets),
    };
    let step = Dd::from(h);
    let mut worst: f64 = 0.0;
    for (pi, g) in analytic.iter().enumerate() {
        for (j, &a) in g.data().iter().enumerate() {
            let original = reference.params[pi][j];
            reference.params[pi][j] = original + step;
            let up = reference.loss();
            reference.params[pi][j] = original - step;
            let down = reference.loss();
            reference.params[pi][j] = original;
            let numeric = ((up - down) / (step + step)).to_f64();
            if !numeric.is_finite() {
                return Err(Error::numeric(format!(
                    "finite difference for parameter tensor {pi}, entry {j}"
                )));
            }
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}

/// One SWAG shape of the gradient suite: `layers` counts both the monomial
/// blocks and the affine layers, so it is even.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GradCase {
    pub degree: u32,
    pub width: usize,
    pub layers: usize,
}

impl GradCase {
    /// k in {1, 2, 8}, l in {1, 5}, 2 or 4 layers.
    pub fn matrix() -> Vec<GradCase> {
        let mut cases = Vec::with_capacity(12);
        for degree in [1, 2, 8] {
            for width in [1, 5] {
                for layers in [2, 4] {
                    cases.push(GradCase {
                        degree,
                        width,
                        layers,
                    });
                }
            }
        }
        cases
    }

    pub fn config(self) -> Result<ModelConfig> {
        if self.layers == 0 || self.layers % 2 != 0 {
            return Err(Error::config(format!(
                "layer count {} must be a positive even number",
                self.layers
            )));
        }
        let shape = SwagShape {
            degree: self.degree,
            width: self.width,
            blocks: self.layers / 2,
            hidden: self.width,
            output_dim: 1,
            output_activation: Activation::Linear,
        };
        let mut cfg = ModelConfig::swag("gradcheck", 1, shape);
        cfg.init = Init::StandardNormal;
        cfg.widths()?;
        Ok(cfg)
    }

    /// Builds the case from `seed` and checks it on four uniform inputs with
    /// uniform MSE targets.
    pub fn check(self, seed: u64) -> Result<f64> {
        let mut model = Model::build(self.config()?, &mut Rng::stream(seed, 0))?;
        let mut rng = Rng::stream(seed, 4);
        let mut uniform =
            |rows: usize| Matrix::from_vec(rows, 4, (0..rows * 4).map(|_| rng.uniform()).collect());
        let x = uniform(1)?;
        let y = uniform(1)?;
        grad_check(&mut model, Loss::Mse, &x, &y, DEFAULT_STEP)
    }
}

impl std::fmt::Display for GradCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "k={} l={} layers={}",
            self.degree, self.width, self.layers
        )
    }
}

impl std::str::FromStr for GradCase {
    type Err = Error;

    /// `K,L,LAYERS`, e.g. `8,5,4`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::config(format!("expected K,L,LAYERS, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let case = GradCase {
            degree: parts[0].parse().map_err(|_| bad())?,
            width: parts[1].parse().map_err(|_| bad())?,
            layers: parts[2].parse().map_err(|_| bad())?,
        };
        case.config()?;
        Ok(case)
    }
}
