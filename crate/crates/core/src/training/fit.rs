//! The mini-batch training loop.
//!
//! Randomness comes from two streams of the run seed: stream 1 shuffles the
//! training indices each epoch and stream 2 draws dropout masks. Stream 0 is
//! left for weight initialisation.

use std::time::Instant;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::{Forward, Model};
use crate::rng::Rng;
use crate::training::adam::{AdamConfig, AdamState};
use crate::training::loss::Loss;
use crate::training::metrics::accuracy;
use crate::training::report::{EpochRecord, TrainReport};

/// Columns per forward pass when scoring a whole dataset.
const EVAL_CHUNK: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub loss: Loss,
    pub seed: u64,
    pub adam: AdamConfig,
}

impl FitOptions {
    pub fn new(epochs: usize, batch_size: usize, loss: Loss, seed: u64) -> Self {
        Self {
            epochs,
            batch_size,
            loss,
            seed,
            adam: AdamConfig::default(),
        }
    }
}

/// A fresh permutation of `0..n` cut into consecutive batches; the last one
/// holds the remainder.
pub fn shuffled_batches(n: usize, batch_size: usize, rng: &mut Rng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    order
        .chunks(batch_size.max(1))
        .map(<[usize]>::to_vec)
        .collect()
}

fn check_shapes(model: &Model, data: &Dataset, which: &str) -> Result<()> {
    let want = (model.input_dim(), model.output_dim());
    let got = (data.inputs.rows(), data.targets.rows());
    if want != got || data.inputs.cols() != data.targets.cols() {
        return Err(Error::config(format!(
            "{which} set has input/target widths {got:?} but the model needs {want:?}"
        )));
    }
    Ok(())
}

fn model_output(model: &Model, loss: Loss, x: &Matrix) -> Result<Matrix> {
    if loss.wants_logits() {
        model.predict_logits(x)
    } else {
        model.predict(x)
    }
}

/// Mean loss over a whole dataset (no dropout), evaluated in chunks. Also
/// returns the accuracy when `with_accuracy` is set.
pub fn evaluate_loss(
    model: &Model,
    loss: Loss,
    data: &Dataset,
    with_accuracy: bool,
) -> Result<(f64, Option<f64>)> {
    let n = data.len();
    if n == 0 {
        return Ok((0.0, with_accuracy.then_some(0.0)));
    }
    let labels = with_accuracy.then(|| data.labels());
    let mut total = 0.0;
    let mut hits = 0.0;
    let mut start = 0;
    while start < n {
        let end = (start + EVAL_CHUNK).min(n);
        let x = data.inputs.column_range(start..end);
        let y = data.targets.column_range(start..end);
        let out = model_output(model, loss, &x)?;
        let (l, _) = loss.evaluate(&out, &y)?;
        total += l * (end - start) as f64;
        if let Some(labels) = &labels {
            hits += accuracy(&out, &labels[start..end]) * (end - start) as f64;
        }
        start = end;
    }
    let mean = total / n as f64;
    if !mean.is_finite() {
        return Err(Error::numeric("evaluation loss"));
    }
    Ok((mean, labels.map(|_| hits / n as f64)))
}

pub fn fit(
    model: &mut Model,
    train: &Dataset,
    test: &Dataset,
    opts: &FitOptions,
) -> Result<TrainReport> {
    fit_with(model, train, test, opts, |_| {})
}

/// [`fit`] with a callback after every epoch.
pub fn fit_with(
    model: &mut Model,
    train: &Dataset,
    test: &Dataset,
    opts: &FitOptions,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainReport> {
    if opts.batch_size == 0 {
        return Err(Error::config("batch size must be at least 1"));
    }
    check_shapes(model, train, "training")?;
    check_shapes(model, test, "test")?;
    if opts.loss.wants_logits() && !model.config().has_softmax_output() {
        return Err(Error::config("cross-entropy needs a softmax output layer"));
    }
    let classification = model.config().has_softmax_output();
    let shapes: Vec<_> = model.parameters().iter().map(|m| m.shape()).collect();
    let mut adam = AdamState::new(opts.adam, &shapes)?;
    let mut shuffle_rng = Rng::stream(opts.seed, 1);
    let mut dropout_rng = Rng::stream(opts.seed, 2);

    let started = Instant::now();
    let mut records = Vec::with_capacity(opts.epochs);
    for epoch in 1..=opts.epochs {
        let batches = shuffled_batches(train.len(), opts.batch_size, &mut shuffle_rng);
        for (b, idx) in batches.iter().enumerate() {
            let wrap = |e: Error| Error::Training {
                epoch,
                batch: b,
                source: Box::new(e),
            };
            let x = train.inputs.select_columns(idx);
            let y = train.targets.select_columns(idx);
            let out = model
                .forward_with(
                    &x,
                    Forward {
                        dropout: Some(&mut dropout_rng),
                        logits: opts.loss.wants_logits(),
                    },
                )
                .map_err(wrap)?;
            let (loss, grad) = opts.loss.evaluate(&out, &y).map_err(wrap)?;
            if !loss.is_finite() {
                return Err(wrap(Error::numeric("batch loss")));
            }
            let grads = model.backward(&grad).map_err(wrap)?;
            adam.step(model.parameters_mut(), &grads.params)
                .map_err(wrap)?;
        }

        let eval_wrap = |e: Error| Error::Training {
            epoch,
            batch: batches.len(),
            source: Box::new(e),
        };
        let (train_loss, _) = evaluate_loss(model, opts.loss, train, false).map_err(eval_wrap)?;
        let (test_loss, test_accuracy) =
            evaluate_loss(model, opts.loss, test, classification).map_err(eval_wrap)?;
        let record = EpochRecord {
            epoch,
            train_loss,
            test_loss,
            test_accuracy,
        };
        on_epoch(&record);
        records.push(record);
    }
    Ok(TrainReport {
        config_name: model.config().name.clone(),
        seed: opts.seed,
        wall_seconds: started.elapsed().as_secs_f64(),
        records,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::{Activation, Basis};
    use crate::data::{Dataset, Meta, Source};
    use crate::network::{
        build_swag, exact_polynomial_weights, Baseline, Init, ModelConfig, SwagShape,
    };
    use crate::rng::Rng;
    use proptest::prelude::*;

    fn dataset(inputs: Matrix, targets: Matrix) -> Dataset {
        Dataset {
            inputs,
            targets,
            meta: Meta {
                source: Source::F1,
                seed: None,
                protocol: None,
            },
        }
    }

    fn cubic_data(n: usize, seed: u64) -> Dataset {
        let oracle = exact_polynomial_weights(&[0.2, -1.0, 0.5, 1.5], Basis::Factorial).unwrap();
        let mut rng = Rng::new(seed);
        let xs: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let x = Matrix::row_vector(&xs);
        let y = oracle.predict(&x).unwrap();
        dataset(x, y)
    }

    fn small_swag(seed: u64) -> Model {
        let shape = SwagShape {
            degree: 8,
            width: 4,
            blocks: 1,
            hidden: 0,
            output_dim: 1,
            output_activation: Activation::Linear,
        };
        let cfg = ModelConfig::swag("cubic", 1, shape).with_init(Init::StandardNormal);
        build_swag(cfg, &mut Rng::new(seed)).unwrap()
    }

    fn bits(model: &Model) -> Vec<u64> {
        model
            .parameters()
            .iter()
            .flat_map(|m| m.data().iter().map(|x| x.to_bits()))
            .collect()
    }

    #[test]
    fn zero_epochs_is_a_no_op() {
        let data = cubic_data(20, 0);
        let mut model = small_swag(1);
        let before = bits(&model);
        let report = fit(
            &mut model,
            &data,
            &data,
            &FitOptions::new(0, 10, Loss::Mse, 3),
        )
        .unwrap();
        assert!(report.records.is_empty());
        assert_eq!(bits(&model), before);
        assert_eq!(report.to_csv(), "epoch,train_loss,test_loss\n");
    }

    #[test]
    fn fits_a_representable_cubic() {
        let train = cubic_data(200, 4);
        let test = cubic_data(50, 5);
        let mut model = small_swag(2);
        let opts = FitOptions::new(200, 10, Loss::Mse, 6);
        let report = fit(&mut model, &train, &test, &opts).unwrap();
        assert_eq!(report.records.len(), 200);
        let last = report.final_record().unwrap();
        assert!(
            last.train_loss < 1e-4,
            "final train MSE {}",
            last.train_loss
        );
    }

    #[test]
    fn deterministic_for_a_seed() {
        let data = cubic_data(37, 8);
        let run = || {
            let mut m = Model::build(Baseline::C.config(), &mut Rng::new(1)).unwrap();
            let r = fit(&mut m, &data, &data, &FitOptions::new(3, 10, Loss::Mse, 11)).unwrap();
            (r.to_csv(), bits(&m))
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rejects_mismatched_data() {
        let data = cubic_data(10, 0);
        let mut model = Model::build(Baseline::Mnist.config(), &mut Rng::new(0)).unwrap();
        let err = fit(
            &mut model,
            &data,
            &data,
            &FitOptions::new(1, 10, Loss::Mse, 0),
        );
        assert!(matches!(err, Err(Error::Config(_))));
        let mut model = small_swag(0);
        let err = fit(
            &mut model,
            &data,
            &data,
            &FitOptions::new(1, 0, Loss::Mse, 0),
        );
        assert!(matches!(err, Err(Error::Config(_))));
        let err = fit(
            &mut model,
            &data,
            &data,
            &FitOptions::new(1, 5, Loss::SoftmaxCrossEntropy, 0),
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn numeric_failure_reports_coordinates() {
        let data = dataset(
            Matrix::row_vector(&[1.0, 1.0]),
            Matrix::row_vector(&[0.0, 0.0]),
        );
        let mut model = small_swag(0);
        model.parameters_mut()[0].data_mut().fill(1e50);
        let err = fit(
            &mut model,
            &data,
            &data,
            &FitOptions::new(2, 1, Loss::Mse, 0),
        )
        .unwrap_err();
        match err {
            Error::Training {
                epoch,
                batch,
                source,
            } => {
                assert_eq!((epoch, batch), (1, 0));
                assert!(matches!(*source, Error::Numeric(_)));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn classifier_reports_accuracy() {
        let cfg = ModelConfig::swag(
            "cls",
            2,
            SwagShape {
                degree: 2,
                width: 3,
                blocks: 1,
                hidden: 0,
                output_dim: 2,
                output_activation: Activation::Softmax,
            },
        );
        let mut model = build_swag(cfg, &mut Rng::new(0)).unwrap();
        let mut rng = Rng::new(1);
        let n = 64;
        let xs: Vec<f64> = (0..2 * n).map(|_| rng.uniform()).collect();
        let x = Matrix::from_vec(2, n, xs).unwrap();
        let mut y = Matrix::zeros(2, n);
        for c in 0..n {
            let label = usize::from(x.get(0, c) > x.get(1, c));
            y.set(label, c, 1.0);
        }
        let data = dataset(x, y);
        let opts = FitOptions::new(40, 8, Loss::SoftmaxCrossEntropy, 2);
        let report = fit(&mut model, &data, &data, &opts).unwrap();
        let first = &report.records[0];
        let last = report.final_record().unwrap();
        assert!(last.train_loss < first.train_loss);
        assert!(last.test_accuracy.unwrap() > 0.8);
        assert!(report
            .to_csv()
            .starts_with("epoch,train_loss,test_loss,test_accuracy\n"));
    }

    #[test]
    fn chunked_evaluation_matches_one_pass() {
        let data = cubic_data(2500, 3);
        let model = small_swag(9);
        let (chunked, _) = evaluate_loss(&model, Loss::Mse, &data, false).unwrap();
        let (whole, _) = Loss::Mse
            .evaluate(&model.predict(&data.inputs).unwrap(), &data.targets)
            .unwrap();
        assert!((chunked - whole).abs() <= 1e-12 * whole.abs());
    }

    proptest! {
        #[test]
        fn every_index_once_per_epoch(n in 0usize..300, batch in 1usize..40, seed in any::<u64>()) {
            let batches = shuffled_batches(n, batch, &mut Rng::new(seed));
            let mut seen: Vec<usize> = batches.iter().flatten().copied().collect();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
            prop_assert!(batches.iter().all(|b| !b.is_empty() && b.len() <= batch));
            prop_assert_eq!(batches.len(), n.div_ceil(batch));
        }
    }
}
