use serde::{Deserialize, Serialize};

use crate::activation::{check_degree, Activation, Basis};
use crate::error::{Error, Result};

/// One layer of a network description. Input widths are inferred when the
/// config is validated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    /// `degree` parallel affine sub-layers of `width` neurons, the `p`-th
    /// followed by `σ_p`, stacked into `degree * width` outputs (p ascending).
    MonomialBlock {
        degree: u32,
        width: usize,
    },
    Affine {
        out: usize,
        activation: Activation,
    },
    /// Inverted dropout; identity outside training.
    Dropout {
        rate: f64,
    },
}

impl LayerSpec {
    pub fn output_width(&self, input_width: usize) -> usize {
        match *self {
            LayerSpec::MonomialBlock { degree, width } => degree as usize * width,
            LayerSpec::Affine { out, .. } => out,
            LayerSpec::Dropout { .. } => input_width,
        }
    }

    /// Closed-form trainable parameter count given the input width.
    pub fn param_count(&self, input_width: usize) -> usize {
        match *self {
            LayerSpec::MonomialBlock { degree, width } => {
                degree as usize * (width * input_width + width)
            }
            LayerSpec::Affine { out, .. } => out * input_width + out,
            LayerSpec::Dropout { .. } => 0,
        }
    }
}

/// How weight matrices are initialised. Biases always start at zero.
///
/// Glorot is the default for every network. Unit-variance weights feeding
/// degree-7 and degree-8 blocks start the function network at losses near
/// 1e25 and leave MNIST SWAG stuck near 93% after four epochs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// i.i.d. N(0, 1).
    StandardNormal,
    /// U(-a, a) with `a = sqrt(6 / (fan_in + fan_out))`.
    #[default]
    GlorotUniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub name: String,
    pub input_dim: usize,
    pub layers: Vec<LayerSpec>,
    #[serde(default)]
    pub basis: Basis,
    #[serde(default)]
    pub init: Init,
}

/// Parameters of a SWAG stack: `blocks` repetitions of
/// (monomial block, affine), the last affine being the output layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwagShape {
    pub degree: u32,
    pub width: usize,
    pub blocks: usize,
    /// Output width of the intermediate affine layers.
    pub hidden: usize,
    pub output_dim: usize,
    pub output_activation: Activation,
}

impl SwagShape {
    /// l = 50, k = 8, four layers, intermediate width 50, scalar output.
    pub const FUNCTION: SwagShape = SwagShape {
        degree: 8,
        width: 50,
        blocks: 2,
        hidden: 50,
        output_dim: 1,
        output_activation: Activation::Linear,
    };

    /// l = 500, k = 7, two layers, softmax over 10 classes.
    pub const MNIST: SwagShape = SwagShape {
        degree: 7,
        width: 500,
        blocks: 1,
        hidden: 0,
        output_dim: 10,
        output_activation: Activation::Softmax,
    };
}

impl ModelConfig {
    pub fn swag(name: impl Into<String>, input_dim: usize, shape: SwagShape) -> Self {
        let mut layers = Vec::with_capacity(shape.blocks * 2);
        for i in 0..shape.blocks {
            layers.push(LayerSpec::MonomialBlock {
                degree: shape.degree,
                width: shape.width,
            });
            let last = i + 1 == shape.blocks;
            layers.push(LayerSpec::Affine {
                out: if last { shape.output_dim } else { shape.hidden },
                activation: if last {
                    shape.output_activation
                } else {
                    Activation::Linear
                },
            });
        }
        Self {
            name: name.into(),
            input_dim,
            layers,
            basis: Basis::Factorial,
            init: Init::GlorotUniform,
        }
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_basis(mut self, basis: Basis) -> Self {
        self.basis = basis;
        self
    }

    /// Validates the config and returns the output width of every layer.
    pub fn widths(&self) -> Result<Vec<usize>> {
        if self.input_dim == 0 {
            return Err(Error::config("input_dim must be at least 1"));
        }
        let end = self.param_layer_count_end();
        if end == 0 || !matches!(self.layers[end - 1], LayerSpec::Affine { .. }) {
            return Err(Error::config(format!(
                "{}: the final parameterised layer must be affine",
                self.name
            )));
        }

        let mut widths = Vec::with_capacity(self.layers.len());
        let mut input = self.input_dim;
        for (i, layer) in self.layers.iter().enumerate() {
            match *layer {
                LayerSpec::MonomialBlock { degree, width } => {
                    check_degree(degree).map_err(|e| Error::config(format!("layer {i}: {e}")))?;
                    if width == 0 {
                        return Err(Error::config(format!("layer {i}: block width is 0")));
                    }
                }
                LayerSpec::Affine { out, activation } => {
                    if out == 0 {
                        return Err(Error::config(format!("layer {i}: affine width is 0")));
                    }
                    activation
                        .validate()
                        .map_err(|e| Error::config(format!("layer {i}: {e}")))?;
                    if activation == Activation::Softmax && i + 1 != self.param_layer_count_end() {
                        return Err(Error::config(format!(
                            "layer {i}: softmax is only supported on the output layer"
                        )));
                    }
                }
                LayerSpec::Dropout { rate } => {
                    if !(0.0..1.0).contains(&rate) {
                        return Err(Error::config(format!(
                            "layer {i}: dropout rate {rate} outside [0, 1)"
                        )));
                    }
                }
            }
            input = layer.output_width(input);
            widths.push(input);
        }

        if self.is_swag() {
            let params: Vec<_> = self
                .layers
                .iter()
                .filter(|l| !matches!(l, LayerSpec::Dropout { .. }))
                .collect();
            let alternates = params.iter().enumerate().all(|(i, l)| {
                matches!(
                    (i % 2, l),
                    (0, LayerSpec::MonomialBlock { .. }) | (1, LayerSpec::Affine { .. })
                )
            });
            if !alternates {
                return Err(Error::config(format!(
                    "{}: monomial blocks and affine layers must alternate, starting with a block",
                    self.name
                )));
            }
        }
        Ok(widths)
    }

    // Index one past the last parameterised layer.
    fn param_layer_count_end(&self) -> usize {
        self.layers
            .iter()
            .rposition(|l| !matches!(l, LayerSpec::Dropout { .. }))
            .map_or(0, |i| i + 1)
    }

    pub fn is_swag(&self) -> bool {
        self.layers
            .iter()
            .any(|l| matches!(l, LayerSpec::MonomialBlock { .. }))
    }

    pub fn output_dim(&self) -> Result<usize> {
        Ok(*self.widths()?.last().expect("validated config has layers"))
    }

    /// Sum of the closed-form per-layer parameter counts.
    pub fn param_count(&self) -> Result<usize> {
        let widths = self.widths()?;
        let mut input = self.input_dim;
        let mut total = 0;
        for (layer, &out) in self.layers.iter().zip(&widths) {
            total += layer.param_count(input);
            input = out;
        }
        Ok(total)
    }

    /// True when the output layer is softmax, i.e. a classifier.
    pub fn has_softmax_output(&self) -> bool {
        self.layers.iter().rev().find_map(|l| match l {
            LayerSpec::Affine { activation, .. } => Some(*activation == Activation::Softmax),
            _ => None,
        }) == Some(true)
    }
}
