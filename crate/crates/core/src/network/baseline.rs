//! Conventional dense networks used as comparison points.
//!
//! A–E are the five scalar-regression stacks (one input, one output); their
//! layer lists, including dropout placement, are reproduced literally. The
//! MNIST baseline is 784 → 1024 → 1024 → 10 with ReLU hidden layers.

use std::fmt;
use std::str::FromStr;

use crate::activation::{Activation, Basis};
use crate::error::{Error, Result};
use crate::network::config::{Init, LayerSpec, ModelConfig};
use crate::network::model::Model;
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Baseline {
    A,
    B,
    C,
    D,
    E,
    Mnist,
}

const DROPOUT: f64 = 0.2;

impl Baseline {
    /// The five regression baselines, A to E.
    pub const REGRESSION: [Baseline; 5] = [
        Baseline::A,
        Baseline::B,
        Baseline::C,
        Baseline::D,
        Baseline::E,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::A => "baseline-a",
            Baseline::B => "baseline-b",
            Baseline::C => "baseline-c",
            Baseline::D => "baseline-d",
            Baseline::E => "baseline-e",
            Baseline::Mnist => "mnist-baseline",
        }
    }

    /// Expected trainable parameter totals.
    pub fn reference_param_count(self) -> Option<usize> {
        match self {
            Baseline::A => Some(2_476),
            Baseline::B => Some(2_272),
            Baseline::C => Some(2_747),
            Baseline::D => Some(1_131),
            Baseline::E => Some(2_076),
            Baseline::Mnist => None,
        }
    }

    pub fn config(self) -> ModelConfig {
        use Activation::{Relu, Sigmoid, Softmax, Softplus, Tanh};

        let dense = |out, activation| LayerSpec::Affine { out, activation };
        let drop = LayerSpec::Dropout { rate: DROPOUT };
        let (input_dim, layers) = match self {
            Baseline::A => (
                1,
                vec![
                    dense(10, Relu),
                    dense(20, Sigmoid),
                    dense(30, Tanh),
                    dense(20, Relu),
                    dense(15, Sigmoid),
                    dense(25, Relu),
                    dense(10, Relu),
                    dense(1, Tanh),
                    drop.clone(),
                ],
            ),
            Baseline::B => (
                1,
                vec![
                    dense(5, Relu),
                    dense(10, Relu),
                    dense(50, Tanh),
                    dense(18, Relu),
                    dense(15, Tanh),
                    dense(18, Sigmoid),
                    drop.clone(),
                    dense(8, Relu),
                    drop.clone(),
                    dense(1, Relu),
                ],
            ),
            Baseline::C => (
                1,
                vec![
                    dense(5, Relu),
                    dense(10, Relu),
                    dense(20, Tanh),
                    dense(15, Relu),
                    dense(25, Tanh),
                    dense(20, Sigmoid),
                    dense(25, Relu),
                    dense(20, Relu),
                    drop.clone(),
                    dense(8, Relu),
                    drop.clone(),
                    dense(1, Relu),
                ],
            ),
            Baseline::D => (
                1,
                vec![
                    dense(40, Relu),
                    dense(25, Relu),
                    drop.clone(),
                    dense(1, Relu),
                    drop.clone(),
                ],
            ),
            Baseline::E => (
                1,
                vec![
                    dense(5, Softplus),
                    dense(10, Softplus),
                    dense(20, Tanh),
                    dense(15, Relu),
                    dense(25, Tanh),
                    dense(20, Sigmoid),
                    dense(25, Relu),
                    dense(1, Softplus),
                    drop.clone(),
                ],
            ),
            Baseline::Mnist => (
                784,
                vec![dense(1024, Relu), dense(1024, Relu), dense(10, Softmax)],
            ),
        };
        ModelConfig {
            name: self.name().to_string(),
            input_dim,
            layers,
            basis: Basis::Factorial,
            init: Init::GlorotUniform,
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase();
        let key = key.strip_prefix("baseline-").unwrap_or(&key);
        match key {
            "a" => Ok(Baseline::A),
            "b" => Ok(Baseline::B),
            "c" => Ok(Baseline::C),
            "d" => Ok(Baseline::D),
            "e" => Ok(Baseline::E),
            "mnist" | "mnist-baseline" | "baseline" => Ok(Baseline::Mnist),
            _ => Err(Error::config(format!("unknown baseline {s:?}"))),
        }
    }
}

/// Builds a baseline by name, checking its size against the reference total.
pub fn build_baseline(name: &str, rng: &mut Rng) -> Result<Model> {
    let which: Baseline = name.parse()?;
    let model = Model::build(which.config(), rng)?;
    if let Some(expected) = which.reference_param_count() {
        assert_eq!(model.param_count(), expected, "{which} parameter count");
    }
    Ok(model)
}
