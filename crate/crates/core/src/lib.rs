//! Feedforward networks built on the scaled monomial basis `σ_p(x) = x^p / p!`.
//!
//! The crate covers the whole pipeline: dense `f64` matrices and a seeded
//! generator ([`matrix`], [`rng`]), the activation family ([`activation`]),
//! SWAG and baseline networks with backprop and checkpoints ([`network`]),
//! losses, Adam and the training loop ([`training`]), and the synthetic and
//! MNIST datasets ([`data`]).
//!
//! ```
//! use swag_core::{exact_polynomial_weights, Basis, Matrix};
//!
//! // 1 + 2x^2 written as SWAG weights.
//! let model = exact_polynomial_weights(&[1.0, 0.0, 2.0], Basis::Factorial).unwrap();
//! let y = model.predict(&Matrix::column(&[0.5])).unwrap();
//! assert!((y.get(0, 0) - 1.5).abs() < 1e-12);
//! ```

pub mod activation;
pub mod data;
pub mod error;
pub mod fault;
pub mod matrix;
pub mod network;
pub mod rng;
pub mod training;

pub use activation::{Activation, Basis};
pub use data::{Dataset, Protocol, Source, TargetFn};
pub use error::{Error, Result};
pub use matrix::{affine, matmul, Matrix};
pub use network::{
    build_baseline, build_swag, exact_polynomial_weights, Baseline, Checkpoint, Init, LayerSpec,
    Model, ModelConfig, SwagShape,
};
pub use rng::Rng;
pub use training::{fit, AdamConfig, AdamState, FitOptions, Loss, TrainReport};
