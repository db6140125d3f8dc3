use crate::activation::{
    classic_backward, classic_forward, monomial_backward, monomial_backward_slice,
    monomial_forward, monomial_forward_slice, softmax_columns_inplace, Activation, Basis,
};
use crate::error::{Error, Result};
use crate::matrix::{affine, matmul_nt, matmul_tn, Matrix};
use crate::network::config::{Init, LayerSpec, ModelConfig};
use crate::rng::{gaussian_matrix, Rng};

/// Options for a caching forward pass.
#[derive(Default)]
pub struct Forward<'a> {
    /// Draws dropout masks when set. Without it dropout is the identity.
    pub dropout: Option<&'a mut Rng>,
    /// Return the output layer's pre-softmax values instead of probabilities.
    /// The following backward then treats its input as a gradient with
    /// respect to those logits.
    pub logits: bool,
}

/// Gradients in the same order as [`Model::parameters`].
#[derive(Clone, Debug)]
pub struct ParamGrads {
    pub params: Vec<Matrix>,
    /// Gradient with respect to the network input, when requested.
    pub input: Option<Matrix>,
}

/// Weight and bias gradients (absent for dropout) and the input gradient.
type LayerGrads = (Option<(Matrix, Matrix)>, Option<Matrix>);

#[derive(Clone, Debug)]
enum Kind {
    Block {
        degree: u32,
        width: usize,
        basis: Basis,
        /// The `degree` sub-layer weight matrices stacked vertically,
        /// `W_1` in rows `0..width`, `W_2` next, and so on.
        weight: Matrix,
        bias: Matrix,
    },
    Dense {
        activation: Activation,
        basis: Basis,
        weight: Matrix,
        bias: Matrix,
    },
    Dropout {
        rate: f64,
    },
}

#[derive(Clone, Debug)]
enum Cache {
    Block {
        input: Matrix,
        pre: Matrix,
    },
    Dense {
        input: Matrix,
        pre: Matrix,
        /// Softmax probabilities, kept for the Jacobian product.
        softmax: Option<Matrix>,
        activated: bool,
    },
    Dropout {
        mask: Option<Matrix>,
    },
}

#[derive(Clone, Debug)]
struct Layer {
    kind: Kind,
    cache: Option<Cache>,
}

#[derive(Clone, Debug)]
pub struct Model {
    config: ModelConfig,
    layers: Vec<Layer>,
    /// Index of the last layer that has parameters.
    output_layer: usize,
}

fn tag_layer(i: usize, e: Error) -> Error {
    match e {
        Error::Numeric(m) => Error::Numeric(format!("layer {i}: {m}")),
        other => other,
    }
}

impl Kind {
    fn apply(
        &self,
        x: Matrix,
        skip_softmax: bool,
        dropout: Option<&mut Rng>,
    ) -> Result<(Matrix, Cache)> {
        match self {
            Kind::Block {
                degree,
                width,
                basis,
                weight,
                bias,
            } => {
                let pre = affine(weight, bias, &x)?;
                pre.ensure_finite(|| "monomial block pre-activation".into())?;
                let mut out = Matrix::zeros(pre.rows(), pre.cols());
                for p in 1..=*degree {
                    let rows = (p as usize - 1) * width..p as usize * width;
                    let dst = out.row_range_mut(rows.clone());
                    monomial_forward_slice(pre.row_range(rows), p, *basis, dst);
                    if !dst.iter().all(|v| v.is_finite()) {
                        return Err(Error::numeric(format!("monomial block overflow in σ_{p}")));
                    }
                }
                Ok((out, Cache::Block { input: x, pre }))
            }
            Kind::Dense {
                activation,
                basis,
                weight,
                bias,
            } => {
                let pre = affine(weight, bias, &x)?;
                let (out, softmax, activated) = match activation {
                    Activation::Softmax if skip_softmax => (pre.clone(), None, false),
                    Activation::Softmax => {
                        pre.ensure_finite(|| "softmax input".into())?;
                        let mut s = pre.clone();
                        softmax_columns_inplace(&mut s);
                        (s.clone(), Some(s), true)
                    }
                    Activation::Monomial(p) => (monomial_forward(&pre, *p, *basis)?, None, true),
                    other => (classic_forward(&pre, *other)?, None, true),
                };
                out.ensure_finite(|| format!("affine layer ({activation:?})"))?;
                Ok((
                    out,
                    Cache::Dense {
                        input: x,
                        pre,
                        softmax,
                        activated,
                    },
                ))
            }
            Kind::Dropout { rate } => match dropout {
                Some(rng) if *rate > 0.0 => {
                    let keep = 1.0 - rate;
                    let scale = 1.0 / keep;
                    let mut mask = Matrix::zeros(x.rows(), x.cols());
                    for m in mask.data_mut() {
                        *m = if rng.bernoulli(keep) { scale } else { 0.0 };
                    }
                    let out = x.hadamard(&mask)?;
                    Ok((out, Cache::Dropout { mask: Some(mask) }))
                }
                _ => Ok((x, Cache::Dropout { mask: None })),
            },
        }
    }

    /// Returns (weight grad, bias grad) if the layer has parameters, and the
    /// input gradient if requested.
    fn backward(&self, cache: Cache, grad: Matrix, want_input: bool) -> Result<LayerGrads> {
        match (self, cache) {
            (
                Kind::Block {
                    degree,
                    width,
                    basis,
                    weight,
                    ..
                },
                Cache::Block { input, pre },
            ) => {
                check_grad_shape(&grad, &pre)?;
                let mut dz = grad;
                for p in 1..=*degree {
                    let rows = (p as usize - 1) * width..p as usize * width;
                    monomial_backward_slice(
                        pre.row_range(rows.clone()),
                        p,
                        *basis,
                        dz.row_range_mut(rows),
                    );
                }
                let dw = matmul_nt(&dz, &input)?;
                let db = dz.row_sums();
                let dx = want_input.then(|| matmul_tn(weight, &dz)).transpose()?;
                Ok((Some((dw, db)), dx))
            }
            (
                Kind::Dense {
                    activation,
                    basis,
                    weight,
                    ..
                },
                Cache::Dense {
                    input,
                    pre,
                    softmax,
                    activated,
                },
            ) => {
                check_grad_shape(&grad, &pre)?;
                let dz = if !activated {
                    grad
                } else {
                    match (activation, softmax) {
                        (Activation::Softmax, Some(s)) => softmax_vjp(&s, &grad),
                        (Activation::Monomial(p), _) => {
                            grad.hadamard(&monomial_backward(&pre, *p, *basis)?)?
                        }
                        (Activation::Linear, _) => grad,
                        (tag, _) => grad.hadamard(&classic_backward(&pre, *tag)?)?,
                    }
                };
                let dw = matmul_nt(&dz, &input)?;
                let db = dz.row_sums();
                let dx = want_input.then(|| matmul_tn(weight, &dz)).transpose()?;
                Ok((Some((dw, db)), dx))
            }
            (Kind::Dropout { .. }, Cache::Dropout { mask }) => {
                let dx = match mask {
                    Some(mask) => grad.hadamard(&mask)?,
                    None => grad,
                };
                Ok((None, want_input.then_some(dx)))
            }
            _ => Err(Error::State("cache does not match layer kind".into())),
        }
    }
}

fn check_grad_shape(grad: &Matrix, pre: &Matrix) -> Result<()> {
    if grad.shape() != pre.shape() {
        return Err(Error::Dimension {
            op: "backward",
            lhs: grad.shape(),
            rhs: pre.shape(),
        });
    }
    Ok(())
}

/// Softmax Jacobian-vector product, per column: `s ⊙ (g - <s, g>)`.
fn softmax_vjp(s: &Matrix, g: &Matrix) -> Matrix {
    let (rows, cols) = s.shape();
    let mut dots = vec![0.0; cols];
    for r in 0..rows {
        for ((d, &sv), &gv) in dots.iter_mut().zip(s.row(r)).zip(g.row(r)) {
            *d += sv * gv;
        }
    }
    let mut out = Matrix::zeros(rows, cols);
    for r in 0..rows {
        let (sr, gr) = (s.row(r), g.row(r));
        for (c, o) in out.row_mut(r).iter_mut().enumerate() {
            *o = sr[c] * (gr[c] - dots[c]);
        }
    }
    out
}

fn init_weight(init: Init, rng: &mut Rng, rows: usize, cols: usize) -> Result<Matrix> {
    match init {
        Init::StandardNormal => gaussian_matrix(rng, rows, cols),
        Init::GlorotUniform => {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            let data = (0..rows * cols)
                .map(|_| rng.uniform_range(-limit, limit))
                .collect();
            Matrix::from_vec(rows, cols, data)
        }
    }
}

impl Model {
    /// Builds a model with weights drawn from `rng` according to
    /// `config.init`, layer by layer in order, and zero biases.
    pub fn build(config: ModelConfig, rng: &mut Rng) -> Result<Self> {
        let init = config.init;
        Self::assemble(config, |rows, cols| init_weight(init, rng, rows, cols))
    }

    /// All-zero parameters.
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        Self::assemble(config, |rows, cols| Ok(Matrix::zeros(rows, cols)))
    }

    /// Builds a model from explicit parameters, ordered as [`Model::parameters`].
    pub fn from_parameters(config: ModelConfig, params: Vec<Matrix>) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        let expected: Vec<_> = model.parameters().iter().map(|m| m.shape()).collect();
        let got: Vec<_> = params.iter().map(Matrix::shape).collect();
        if expected != got {
            return Err(Error::config(format!(
                "parameter shapes {got:?} do not match config {expected:?}"
            )));
        }
        for (dst, src) in model.parameters_mut().into_iter().zip(params) {
            src.ensure_finite(|| "loaded parameters".into())?;
            *dst = src;
        }
        Ok(model)
    }

    fn assemble(
        config: ModelConfig,
        mut weight: impl FnMut(usize, usize) -> Result<Matrix>,
    ) -> Result<Self> {
        let widths = config.widths()?;
        let mut layers = Vec::with_capacity(config.layers.len());
        let mut input = config.input_dim;
        for (spec, &out) in config.layers.iter().zip(&widths) {
            let kind = match *spec {
                LayerSpec::MonomialBlock { degree, width } => Kind::Block {
                    degree,
                    width,
                    basis: config.basis,
                    weight: stacked_sub_layers(&mut weight, degree, width, input)?,
                    bias: Matrix::zeros(out, 1),
                },
                LayerSpec::Affine { out, activation } => Kind::Dense {
                    activation,
                    basis: config.basis,
                    weight: weight(out, input)?,
                    bias: Matrix::zeros(out, 1),
                },
                LayerSpec::Dropout { rate } => Kind::Dropout { rate },
            };
            layers.push(Layer { kind, cache: None });
            input = out;
        }
        let output_layer = layers
            .iter()
            .rposition(|l| !matches!(l.kind, Kind::Dropout { .. }))
            .expect("validated config has an affine layer");
        let model = Self {
            config,
            layers,
            output_layer,
        };
        let expected = model.config.param_count()?;
        assert_eq!(
            model.param_count(),
            expected,
            "parameter count disagrees with the closed form"
        );
        Ok(model)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn input_dim(&self) -> usize {
        self.config.input_dim
    }

    pub fn output_dim(&self) -> usize {
        match &self.layers[self.output_layer].kind {
            Kind::Dense { weight, .. } => weight.rows(),
            _ => unreachable!("output layer is affine"),
        }
    }

    pub fn param_count(&self) -> usize {
        self.parameters().iter().map(|m| m.len()).sum()
    }

    /// Weight then bias of each parameterised layer, in layer order.
    pub fn parameters(&self) -> Vec<&Matrix> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match &layer.kind {
                Kind::Block { weight, bias, .. } | Kind::Dense { weight, bias, .. } => {
                    out.push(weight);
                    out.push(bias);
                }
                Kind::Dropout { .. } => {}
            }
        }
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match &mut layer.kind {
                Kind::Block { weight, bias, .. } | Kind::Dense { weight, bias, .. } => {
                    out.push(weight);
                    out.push(bias);
                }
                Kind::Dropout { .. } => {}
            }
        }
        out
    }

    /// `(W_p, b_p)` of sub-layer `p` (1-based) of the monomial block at
    /// `layer`.
    pub fn sub_layer(&self, layer: usize, p: u32) -> Option<(Matrix, Matrix)> {
        match &self.layers.get(layer)?.kind {
            Kind::Block {
                degree,
                width,
                weight,
                bias,
                ..
            } if (1..=*degree).contains(&p) => {
                let rows = (p as usize - 1) * width..p as usize * width;
                Some((weight.slice_rows(rows.clone()), bias.slice_rows(rows)))
            }
            _ => None,
        }
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.rows() != self.config.input_dim {
            return Err(Error::Dimension {
                op: "model input",
                lhs: x.shape(),
                rhs: (self.config.input_dim, x.cols()),
            });
        }
        Ok(())
    }

    /// Inference-mode forward pass that keeps caches for [`Model::backward`].
    pub fn forward(&mut self, x: &Matrix) -> Result<Matrix> {
        self.forward_with(x, Forward::default())
    }

    pub fn forward_with(&mut self, x: &Matrix, mut opts: Forward<'_>) -> Result<Matrix> {
        self.check_input(x)?;
        self.clear_caches();
        let mut h = x.clone();
        for i in 0..self.layers.len() {
            let skip_softmax = opts.logits && i == self.output_layer;
            let (out, cache) = self.layers[i]
                .kind
                .apply(h, skip_softmax, opts.dropout.as_deref_mut())
                .map_err(|e| tag_layer(i, e))?;
            self.layers[i].cache = Some(cache);
            h = out;
        }
        Ok(h)
    }

    /// Inference without caches or dropout.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        self.run_uncached(x, false)
    }

    /// Like [`Model::predict`] but stops before an output softmax.
    pub fn predict_logits(&self, x: &Matrix) -> Result<Matrix> {
        self.run_uncached(x, true)
    }

    fn run_uncached(&self, x: &Matrix, logits: bool) -> Result<Matrix> {
        self.check_input(x)?;
        let mut h = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let skip_softmax = logits && i == self.output_layer;
            h = layer
                .kind
                .apply(h, skip_softmax, None)
                .map_err(|e| tag_layer(i, e))?
                .0;
        }
        Ok(h)
    }

    /// Backpropagates `output_grad` through the most recent forward pass.
    /// The caches are consumed, so a second call fails.
    pub fn backward(&mut self, output_grad: &Matrix) -> Result<ParamGrads> {
        self.backward_impl(output_grad, false)
    }

    /// As [`Model::backward`], also returning the gradient with respect to
    /// the input batch.
    pub fn backward_with_input(&mut self, output_grad: &Matrix) -> Result<ParamGrads> {
        self.backward_impl(output_grad, true)
    }

    fn backward_impl(&mut self, output_grad: &Matrix, want_input: bool) -> Result<ParamGrads> {
        let mut per_layer = Vec::with_capacity(self.layers.len());
        let mut grad = output_grad.clone();
        for i in (0..self.layers.len()).rev() {
            let layer = &mut self.layers[i];
            let cache = layer.cache.take().ok_or_else(|| {
                Error::State(format!("backward at layer {i} without a preceding forward"))
            })?;
            let (params, input_grad) = layer.kind.backward(cache, grad, want_input || i > 0)?;
            per_layer.push(params);
            grad = input_grad.unwrap_or_else(|| Matrix::zeros(0, 0));
        }
        let params = per_layer
            .into_iter()
            .rev()
            .flatten()
            .flat_map(|(w, b)| [w, b])
            .collect();
        Ok(ParamGrads {
            params,
            input: want_input.then_some(grad),
        })
    }

    pub fn clear_caches(&mut self) {
        for l in &mut self.layers {
            l.cache = None;
        }
    }
}

/// Draws `W_1..W_degree` in order and stacks them vertically.
fn stacked_sub_layers(
    weight: &mut impl FnMut(usize, usize) -> Result<Matrix>,
    degree: u32,
    width: usize,
    input: usize,
) -> Result<Matrix> {
    let mut data = Vec::with_capacity(degree as usize * width * input);
    for _ in 0..degree {
        data.extend_from_slice(weight(width, input)?.data());
    }
    Matrix::from_vec(degree as usize * width, input, data)
}
