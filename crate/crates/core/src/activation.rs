//! Activation functions and their derivatives.
//!
//! The polynomial family is the scaled monomial `σ_p(x) = x^p / p!`. Its
//! derivative is the next rung down the ladder, `σ_p' = σ_{p-1}`, and the
//! implementation computes it through exactly that code path. A `plain` basis
//! (`x^p` with derivative `p x^(p-1)`) is kept for comparison runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Highest monomial degree a layer may use. `20!` is the largest factorial
/// exactly representable as an `f64`.
pub const MAX_DEGREE: u32 = 20;

const FACTORIALS: [f64; MAX_DEGREE as usize + 1] = {
    let mut table = [1.0; MAX_DEGREE as usize + 1];
    let mut acc: u64 = 1;
    let mut p = 1;
    while p <= MAX_DEGREE as usize {
        acc *= p as u64;
        table[p] = acc as f64;
        p += 1;
    }
    table
};

/// `p!` for `p <= 20`.
pub fn factorial(p: u32) -> f64 {
    FACTORIALS[p as usize]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// `x^p / p!`
    #[default]
    Factorial,
    /// `x^p`
    Plain,
}

impl std::str::FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "factorial" => Ok(Basis::Factorial),
            "plain" => Ok(Basis::Plain),
            other => Err(Error::config(format!("unknown basis {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Monomial(u32),
    Sigmoid,
    Tanh,
    Relu,
    Linear,
    Softmax,
    /// `ln(1 + e^x)`
    Softplus,
}

impl Activation {
    pub fn validate(self) -> Result<()> {
        match self {
            Activation::Monomial(p) => check_degree(p),
            _ => Ok(()),
        }
    }
}

pub(crate) fn check_degree(p: u32) -> Result<()> {
    if (1..=MAX_DEGREE).contains(&p) {
        Ok(())
    } else {
        Err(Error::config(format!(
            "monomial degree {p} outside 1..={MAX_DEGREE}"
        )))
    }
}

#[inline]
fn sigma(x: f64, p: u32, basis: Basis) -> f64 {
    match basis {
        Basis::Factorial => x.powi(p as i32) / FACTORIALS[p as usize],
        Basis::Plain => x.powi(p as i32),
    }
}

#[inline]
fn sigma_prime(x: f64, p: u32, basis: Basis) -> f64 {
    match basis {
        Basis::Factorial => sigma(x, p - 1, Basis::Factorial),
        Basis::Plain => f64::from(p) * x.powi(p as i32 - 1),
    }
}

/// Writes `σ_p(z)` elementwise into `out`.
pub(crate) fn monomial_forward_slice(z: &[f64], p: u32, basis: Basis, out: &mut [f64]) {
    for (o, &x) in out.iter_mut().zip(z) {
        *o = sigma(x, p, basis);
    }
}

/// Multiplies `grad` in place by `σ_p'(z)`.
pub(crate) fn monomial_backward_slice(z: &[f64], p: u32, basis: Basis, grad: &mut [f64]) {
    let sign = if crate::fault::sign_flip_active() {
        -1.0
    } else {
        1.0
    };
    for (g, &x) in grad.iter_mut().zip(z) {
        *g *= sign * sigma_prime(x, p, basis);
    }
}

pub fn monomial_forward(z: &Matrix, p: u32, basis: Basis) -> Result<Matrix> {
    check_degree(p)?;
    let mut out = Matrix::zeros(z.rows(), z.cols());
    monomial_forward_slice(z.data(), p, basis, out.data_mut());
    out.ensure_finite(|| format!("monomial activation (p = {p})"))?;
    Ok(out)
}

/// `dσ_p/dz` evaluated elementwise.
pub fn monomial_backward(z: &Matrix, p: u32, basis: Basis) -> Result<Matrix> {
    check_degree(p)?;
    let mut out = Matrix::filled(z.rows(), z.cols(), 1.0);
    monomial_backward_slice(z.data(), p, basis, out.data_mut());
    out.ensure_finite(|| format!("monomial derivative (p = {p})"))?;
    Ok(out)
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Column-wise softmax, shifted by the column max.
pub fn softmax_columns(z: &Matrix) -> Matrix {
    let mut out = z.clone();
    softmax_columns_inplace(&mut out);
    out
}

pub(crate) fn softmax_columns_inplace(z: &mut Matrix) {
    let (rows, cols) = z.shape();
    if rows == 0 {
        return;
    }
    let mut max = z.row(0).to_vec();
    for r in 1..rows {
        for (m, &x) in max.iter_mut().zip(z.row(r)) {
            *m = m.max(x);
        }
    }
    let mut sum = vec![0.0; cols];
    for r in 0..rows {
        for ((x, m), s) in z.row_mut(r).iter_mut().zip(&max).zip(sum.iter_mut()) {
            *x = (*x - m).exp();
            *s += *x;
        }
    }
    for r in 0..rows {
        for (x, s) in z.row_mut(r).iter_mut().zip(&sum) {
            *x /= s;
        }
    }
}

/// Applies a non-polynomial activation. Softmax normalises each column.
pub fn classic_forward(z: &Matrix, tag: Activation) -> Result<Matrix> {
    z.ensure_finite(|| format!("{tag:?} input"))?;
    let out = match tag {
        Activation::Sigmoid => z.map(sigmoid),
        Activation::Tanh => z.map(f64::tanh),
        Activation::Relu => z.map(|x| x.max(0.0)),
        Activation::Linear => z.clone(),
        Activation::Softplus => z.map(softplus),
        Activation::Softmax => softmax_columns(z),
        Activation::Monomial(p) => {
            return Err(Error::config(format!(
                "monomial σ_{p} is not a classic activation"
            )))
        }
    };
    Ok(out)
}

/// Elementwise derivative at the pre-activation `z`. `relu'(0)` is 0.
///
/// Softmax has no elementwise derivative; its Jacobian is applied by the
/// network layer, or fused into the cross-entropy gradient.
pub fn classic_backward(z: &Matrix, tag: Activation) -> Result<Matrix> {
    let out = match tag {
        Activation::Sigmoid => z.map(|x| {
            let s = sigmoid(x);
            s * (1.0 - s)
        }),
        Activation::Tanh => z.map(|x| {
            let t = x.tanh();
            1.0 - t * t
        }),
        Activation::Relu => z.map(|x| if x > 0.0 { 1.0 } else { 0.0 }),
        Activation::Linear => Matrix::filled(z.rows(), z.cols(), 1.0),
        Activation::Softplus => z.map(sigmoid),
        Activation::Softmax | Activation::Monomial(_) => {
            return Err(Error::config(format!(
                "{tag:?} has no elementwise derivative here"
            )))
        }
    };
    Ok(out)
}
