use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::activation::softmax_columns;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    Mse,
    /// Applied to the output layer's logits; the softmax is fused in.
    SoftmaxCrossEntropy,
}

impl Loss {
    /// Whether the loss consumes pre-softmax outputs.
    pub fn wants_logits(self) -> bool {
        matches!(self, Loss::SoftmaxCrossEntropy)
    }

    pub fn evaluate(self, output: &Matrix, target: &Matrix) -> Result<(f64, Matrix)> {
        match self {
            Loss::Mse => mse_loss(output, target),
            Loss::SoftmaxCrossEntropy => softmax_cross_entropy(output, target),
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Loss::Mse => "mse",
            Loss::SoftmaxCrossEntropy => "cross-entropy",
        })
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mse" => Ok(Loss::Mse),
            "cross-entropy" | "ce" => Ok(Loss::SoftmaxCrossEntropy),
            other => Err(Error::config(format!("unknown loss {other:?}"))),
        }
    }
}

fn check_same_shape(op: &'static str, a: &Matrix, b: &Matrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension {
            op,
            lhs: a.shape(),
            rhs: b.shape(),
        });
    }
    Ok(())
}

/// Mean squared error over all `o * n` entries and its gradient
/// `2 (pred - target) / (o n)`.
pub fn mse_loss(pred: &Matrix, target: &Matrix) -> Result<(f64, Matrix)> {
    check_same_shape("mse_loss", pred, target)?;
    let count = pred.len().max(1) as f64;
    let residual = pred.sub(target)?;
    let loss = residual.data().iter().map(|r| r * r).sum::<f64>() / count;
    Ok((loss, residual.scale(2.0 / count)))
}

/// Mean cross-entropy of softmax(`logits`) against one-hot columns, with the
/// fused gradient `(softmax(logits) - onehot) / n`.
pub fn softmax_cross_entropy(logits: &Matrix, onehot: &Matrix) -> Result<(f64, Matrix)> {
    check_same_shape("softmax_cross_entropy", logits, onehot)?;
    let (rows, cols) = logits.shape();
    let mut label = vec![usize::MAX; cols];
    for r in 0..rows {
        for (c, &t) in onehot.row(r).iter().enumerate() {
            if t == 1.0 && label[c] == usize::MAX {
                label[c] = r;
            } else if t != 0.0 {
                return Err(Error::config(format!("target column {c} is not one-hot")));
            }
        }
    }
    if let Some(c) = label.iter().position(|&l| l == usize::MAX) {
        return Err(Error::config(format!("target column {c} is not one-hot")));
    }

    let probs = softmax_columns(logits);
    let n = cols.max(1) as f64;
    let mut loss = 0.0;
    for (c, &y) in label.iter().enumerate() {
        // log p_y = z_y - logsumexp(z), computed with the max shift.
        let column = logits.col(c);
        let max = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + column.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
        loss += lse - column[y];
    }
    let grad = probs.sub(onehot)?.scale(1.0 / n);
    Ok((loss / n, grad))
}
