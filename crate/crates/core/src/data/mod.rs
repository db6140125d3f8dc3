//! Datasets: the synthetic targets F1–F3 and their two sampling protocols,
//! unit-interval normalisation, one-hot labels and MNIST in IDX form.
//!
//! Samples are columns: `inputs` is `d x n` and `targets` is `o x n`.

mod idx;
mod targets;

pub use idx::{
    decode_idx, encode_idx, load_mnist, read_idx, write_idx, IdxFile, IMAGES_MAGIC, LABELS_MAGIC,
};
pub use targets::{eval_target, TargetFn};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Rng;
use crate::training::argmax_columns;

/// Inputs are drawn from `(EDGE, 1 - EDGE)` so `log10` stays finite.
pub const EDGE: f64 = 1e-6;
pub const EXPERIMENT1_TRAIN: usize = 1000;
pub const EXPERIMENT1_TEST: usize = 200;
pub const CLASSES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    F1,
    F2,
    F3,
    MnistTrain,
    MnistTest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Experiment 1: uniform random inputs.
    Random,
    /// Experiment 2: interleaved fixed grids.
    Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub source: Source,
    pub seed: Option<u64>,
    pub protocol: Option<Protocol>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub inputs: Matrix,
    pub targets: Matrix,
    pub meta: Meta,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Class index of each target column (argmax, lowest index on ties).
    pub fn labels(&self) -> Vec<usize> {
        argmax_columns(&self.targets)
    }

    fn function(
        which: TargetFn,
        xs: Vec<f64>,
        seed: Option<u64>,
        protocol: Protocol,
    ) -> Result<Self> {
        let ys = xs
            .iter()
            .map(|&x| eval_target(which, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            inputs: Matrix::row_vector(&xs),
            targets: Matrix::row_vector(&ys),
            meta: Meta {
                source: which.source(),
                seed,
                protocol: Some(protocol),
            },
        })
    }
}

/// Random protocol: 1000 training and 200 test inputs, uniform on
/// `(1e-6, 1 - 1e-6)`, drawn from stream 3 of `seed` (training first).
pub fn make_experiment1(which: TargetFn, seed: u64) -> Result<(Dataset, Dataset)> {
    let mut rng = Rng::stream(seed, 3);
    let mut draw = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|_| loop {
                let x = rng.uniform_range(EDGE, 1.0 - EDGE);
                if x > EDGE {
                    break x;
                }
            })
            .collect()
    };
    let train = draw(EXPERIMENT1_TRAIN);
    let test = draw(EXPERIMENT1_TEST);
    Ok((
        Dataset::function(which, train, Some(seed), Protocol::Random)?,
        Dataset::function(which, test, Some(seed), Protocol::Random)?,
    ))
}

/// Grid protocol: training inputs `i / 100` for `i = 1..=100`, test inputs
/// `(2i + 3) / 200` for `i = 0..98`, i.e. 0.015 to 0.985 in steps of 0.01.
pub fn make_experiment2(which: TargetFn) -> Result<(Dataset, Dataset)> {
    let train = (1..=100).map(|i| f64::from(i) / 100.0).collect();
    let test = (0..98).map(|i| f64::from(2 * i + 3) / 200.0).collect();
    Ok((
        Dataset::function(which, train, None, Protocol::Grid)?,
        Dataset::function(which, test, None, Protocol::Grid)?,
    ))
}

/// Per-row min-max scaling to `[0, 1]`. Constant rows become 0.
pub fn normalize_unit(x: &Matrix) -> Matrix {
    let mut out = x.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let (lo, hi) = row
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let span = hi - lo;
        for v in row.iter_mut() {
            *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
        }
    }
    out
}

pub fn one_hot(label: usize) -> Result<[f64; CLASSES]> {
    if label >= CLASSES {
        return Err(Error::Domain {
            what: "class label",
            value: label as f64,
        });
    }
    let mut v = [0.0; CLASSES];
    v[label] = 1.0;
    Ok(v)
}

/// `10 x n` one-hot target matrix.
pub fn one_hot_matrix(labels: &[usize]) -> Result<Matrix> {
    let mut m = Matrix::zeros(CLASSES, labels.len());
    for (c, &label) in labels.iter().enumerate() {
        one_hot(label)?;
        m.set(label, c, 1.0);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn experiment1_sizes_and_range() {
        let (train, test) = make_experiment1(TargetFn::F2, 7).unwrap();
        assert_eq!((train.len(), test.len()), (1000, 200));
        for d in [&train, &test] {
            assert!(d
                .inputs
                .data()
                .iter()
                .all(|&x| x > 0.0 && x < 1.0 && x > EDGE && x < 1.0 - EDGE));
            assert_eq!(d.meta.protocol, Some(Protocol::Random));
            assert_eq!(d.meta.source, Source::F2);
        }
        for (x, y) in train.inputs.data().iter().zip(train.targets.data()) {
            assert_eq!(*y, eval_target(TargetFn::F2, *x).unwrap());
        }
    }

    #[test]
    fn experiment1_is_deterministic() {
        assert_eq!(
            make_experiment1(TargetFn::F1, 3).unwrap(),
            make_experiment1(TargetFn::F1, 3).unwrap()
        );
        assert_ne!(
            make_experiment1(TargetFn::F1, 3).unwrap().0,
            make_experiment1(TargetFn::F1, 4).unwrap().0
        );
    }

    #[test]
    fn experiment2_grids() {
        let (train, test) = make_experiment2(TargetFn::F3).unwrap();
        assert_eq!((train.len(), test.len()), (100, 98));
        assert_eq!(train.inputs.get(0, 49), 0.5);
        assert_eq!(train.inputs.get(0, 0), 0.01);
        assert_eq!(train.inputs.get(0, 99), 1.0);
        assert_eq!(test.inputs.get(0, 0), 0.015);
        assert_eq!(test.inputs.get(0, 97), 0.985);
        for d in [&train, &test] {
            assert!(d.inputs.data().windows(2).all(|w| w[0] < w[1]));
        }
        // Train and test grids interleave without touching.
        let all: std::collections::HashSet<u64> = train
            .inputs
            .data()
            .iter()
            .chain(test.inputs.data())
            .map(|x| x.to_bits())
            .collect();
        assert_eq!(all.len(), 198);
    }

    #[test]
    fn normalize_examples() {
        let m = Matrix::from_rows(&[[2.0, 4.0, 6.0], [5.0, 5.0, 5.0], [0.0, 0.3, 1.0]]).unwrap();
        let n = normalize_unit(&m);
        assert_eq!(n.row(0), &[0.0, 0.5, 1.0]);
        assert_eq!(n.row(1), &[0.0, 0.0, 0.0]);
        assert_eq!(n.row(2), &[0.0, 0.3, 1.0]);
    }

    #[test]
    fn one_hot_examples() {
        assert_eq!(one_hot(0).unwrap()[0], 1.0);
        assert_eq!(one_hot(9).unwrap()[9], 1.0);
        for l in 0..10 {
            assert_eq!(one_hot(l).unwrap().iter().sum::<f64>(), 1.0);
        }
        assert!(matches!(one_hot(10), Err(Error::Domain { .. })));
        let m = one_hot_matrix(&[3, 0, 9]).unwrap();
        assert_eq!(m.shape(), (10, 3));
        assert_eq!(argmax_columns(&m), vec![3, 0, 9]);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(values in prop::collection::vec(-100.0f64..100.0, 12)) {
            let m = Matrix::from_vec(3, 4, values).unwrap();
            let once = normalize_unit(&m);
            prop_assert_eq!(normalize_unit(&once), once.clone());
            prop_assert!(once.data().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
