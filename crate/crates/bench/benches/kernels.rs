use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use swag_core::{matmul, AdamConfig, AdamState, Loss, Matrix, Model, ModelConfig, Rng, SwagShape};

fn uniform(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    Matrix::from_vec(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.uniform()).collect(),
    )
    .unwrap()
}

fn bench_matmul(c: &mut Criterion) {
    let mut rng = Rng::new(0);
    for n in [64, 256] {
        let a = uniform(n, n, &mut rng);
        let b = uniform(n, n, &mut rng);
        c.bench_function(&format!("matmul {n}x{n}"), |bench| {
            bench.iter(|| matmul(black_box(&a), black_box(&b)).unwrap())
        });
    }
}

fn function_model() -> Model {
    Model::build(
        ModelConfig::swag("bench", 1, SwagShape::FUNCTION),
        &mut Rng::new(1),
    )
    .unwrap()
}

fn bench_function_network(c: &mut Criterion) {
    let mut rng = Rng::new(2);
    let x = uniform(1, 10, &mut rng);
    let y = uniform(1, 10, &mut rng);
    let mut model = function_model();

    c.bench_function("swag k=8 l=50 forward, batch 10", |bench| {
        bench.iter(|| model.forward(black_box(&x)).unwrap())
    });

    c.bench_function("swag k=8 l=50 forward+backward, batch 10", |bench| {
        bench.iter(|| {
            let out = model.forward(&x).unwrap();
            let (_, grad) = Loss::Mse.evaluate(&out, &y).unwrap();
            model.backward(&grad).unwrap()
        })
    });

    let shapes: Vec<_> = model.parameters().iter().map(|m| m.shape()).collect();
    let mut adam = AdamState::new(AdamConfig::default(), &shapes).unwrap();
    c.bench_function("swag k=8 l=50 train step, batch 10", |bench| {
        bench.iter(|| {
            let out = model.forward(&x).unwrap();
            let (_, grad) = Loss::Mse.evaluate(&out, &y).unwrap();
            let grads = model.backward(&grad).unwrap().params;
            adam.step(model.parameters_mut(), &grads).unwrap();
        })
    });
}

fn bench_mnist_block(c: &mut Criterion) {
    let mut rng = Rng::new(3);
    let x = uniform(784, 100, &mut rng);
    let mut model = Model::build(
        ModelConfig::swag("bench", 784, SwagShape::MNIST),
        &mut Rng::new(4),
    )
    .unwrap();
    let mut group = c.benchmark_group("mnist swag k=7 l=500");
    group.sample_size(10);
    group.bench_function("forward, batch 100", |bench| {
        bench.iter(|| model.forward(black_box(&x)).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_matmul,
    bench_function_network,
    bench_mnist_block
);
criterion_main!(benches);
