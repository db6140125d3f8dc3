//! Network descriptions, the SWAG builder, baselines and checkpoints.
//!
//! A SWAG network alternates two kinds of layer. A monomial block runs `k`
//! affine maps of width `l` over the same input, applies `σ_p` to the `p`-th,
//! and stacks the results into an `l·k` vector. The block is followed by a
//! linear affine layer. The pattern repeats, and the last affine layer
//! produces the output.

mod baseline;
mod checkpoint;
mod config;
mod model;

pub use baseline::{build_baseline, Baseline};
pub use checkpoint::{Checkpoint, LayerParameters, FORMAT_VERSION};
pub use config::{Init, LayerSpec, ModelConfig, SwagShape};
pub use model::{Forward, Model, ParamGrads};

use crate::activation::{factorial, Activation, Basis, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Rng;

/// Builds a SWAG model: weights N(0, 1) in layer order (sub-layers by
/// ascending power), biases zero.
pub fn build_swag(config: ModelConfig, rng: &mut Rng) -> Result<Model> {
    if !config.is_swag() {
        return Err(Error::config(format!(
            "{} has no monomial block; use build_baseline",
            config.name
        )));
    }
    Model::build(config, rng)
}

/// A two-layer SWAG model on scalar input that computes
/// `a_0 + a_1 x + ... + a_k x^k` exactly: one monomial block with `l = 1`,
/// unit weights and zero biases, then an output layer whose weight on the
/// `σ_p` slot undoes the basis scaling.
pub fn exact_polynomial_weights(coeffs: &[f64], basis: Basis) -> Result<Model> {
    let degree = coeffs.len().saturating_sub(1).max(1);
    if degree > MAX_DEGREE as usize {
        return Err(Error::config(format!(
            "polynomial degree {degree} exceeds {MAX_DEGREE}"
        )));
    }
    let coeff = |p: usize| coeffs.get(p).copied().unwrap_or(0.0);
    let config = ModelConfig::swag(
        "exact-polynomial",
        1,
        SwagShape {
            degree: degree as u32,
            width: 1,
            blocks: 1,
            hidden: 0,
            output_dim: 1,
            output_activation: Activation::Linear,
        },
    )
    .with_basis(basis);

    let out_weights: Vec<f64> = (1..=degree)
        .map(|p| match basis {
            Basis::Factorial => coeff(p) * factorial(p as u32),
            Basis::Plain => coeff(p),
        })
        .collect();
    let params = vec![
        Matrix::filled(degree, 1, 1.0),
        Matrix::zeros(degree, 1),
        Matrix::row_vector(&out_weights),
        Matrix::column(&[coeff(0)]),
    ];
    Model::from_parameters(config, params)
}
