//! Subcommand bodies.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::Serialize;
use swag_core::data::{load_mnist, make_experiment1, make_experiment2};
use swag_core::network::Baseline;
use swag_core::training::{fit_with, format_sig, EpochRecord, GradCase};
use swag_core::{
    AdamConfig, Basis, Checkpoint, Dataset, FitOptions, Init, Loss, Model, ModelConfig, Rng,
    Source, SwagShape, TrainReport,
};

use crate::args::{
    AdamArgs, BasisArg, Command, CompareArgs, FuncArch, FunctionArg, GradcheckArgs, InitArg,
    MnistArch, ReplayArgs, TrainFuncArgs, TrainMnistArgs,
};
use crate::error::{CliError, CliResult};
use crate::manifest::{git_blob_sha256, timestamp, CheckpointHash, RunManifest, Training};
use crate::output::{compare_csv, create_dir, predictions_csv, write_file};

pub const LOSS_FILE: &str = "loss.csv";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const COMPARE_FILE: &str = "compare.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Failure threshold of `gradcheck`.
pub const GRAD_TOLERANCE: f64 = 1e-5;

pub fn run(command: Command) -> CliResult<ExitCode> {
    match command {
        Command::TrainFunc(args) => train_func(args).map(|_| ExitCode::SUCCESS),
        Command::TrainMnist(args) => train_mnist(args).map(|_| ExitCode::SUCCESS),
        Command::Gradcheck(args) => gradcheck(&args),
        Command::Compare(args) => compare(args).map(|_| ExitCode::SUCCESS),
        Command::Replay(args) => replay(args),
    }
}

/// Settings shared by every function-approximation run.
struct FuncSettings {
    epochs: usize,
    batch_size: usize,
    seed: u64,
    basis: Basis,
    init: Init,
    adam: AdamConfig,
}

impl FuncSettings {
    fn options(&self) -> FitOptions {
        FitOptions {
            adam: self.adam,
            ..FitOptions::new(self.epochs, self.batch_size, Loss::Mse, self.seed)
        }
    }

    fn training(&self) -> Training {
        let opts = self.options();
        Training {
            epochs: opts.epochs,
            batch_size: opts.batch_size,
            loss: opts.loss,
            adam: opts.adam,
        }
    }
}

struct FuncRun {
    model: Model,
    report: TrainReport,
    predictions: String,
}

fn function_data(
    function: FunctionArg,
    experiment: u8,
    seed: u64,
) -> CliResult<(Dataset, Dataset)> {
    Ok(match experiment {
        1 => make_experiment1(function.into(), seed)?,
        2 => make_experiment2(function.into())?,
        other => return Err(CliError::Input(format!("unknown experiment {other}"))),
    })
}

fn function_config(arch: FuncArch, s: &FuncSettings) -> ModelConfig {
    let mut cfg = match arch.baseline() {
        Some(b) => b.config(),
        None => ModelConfig::swag("swag", 1, SwagShape::FUNCTION).with_basis(s.basis),
    };
    cfg.init = s.init;
    cfg
}

fn progress(label: &str) -> impl FnMut(&EpochRecord) + '_ {
    move |r| {
        let acc = r
            .test_accuracy
            .map(|a| format!(" test_accuracy={}", format_sig(a, 5)))
            .unwrap_or_default();
        eprintln!(
            "{label} epoch {}: train_loss={} test_loss={}{acc}",
            r.epoch,
            format_sig(r.train_loss, 6),
            format_sig(r.test_loss, 6)
        );
    }
}

fn run_function(
    arch: FuncArch,
    s: &FuncSettings,
    train: &Dataset,
    test: &Dataset,
) -> CliResult<FuncRun> {
    let mut model = Model::build(function_config(arch, s), &mut Rng::stream(s.seed, 0))?;
    let report = fit_with(&mut model, train, test, &s.options(), progress(arch.name()))?;
    let pred = model.predict(&test.inputs)?;
    let predictions = predictions_csv(&test.inputs, &test.targets, &pred);
    Ok(FuncRun {
        model,
        report,
        predictions,
    })
}

/// Writes `loss.csv`, optional `predictions.csv` and `checkpoint.json` into
/// `dir`; returns the file paths relative to `root`.
fn write_run(
    root: &Path,
    dir: &Path,
    model: &Model,
    report: &TrainReport,
    predictions: Option<&str>,
    outputs: &mut Vec<PathBuf>,
    checkpoints: &mut Vec<CheckpointHash>,
) -> CliResult<()> {
    let rel = |name: &str| {
        dir.join(name)
            .strip_prefix(root)
            .map(Path::to_path_buf)
            .unwrap_or_else(|_| dir.join(name))
    };
    write_file(&dir.join(LOSS_FILE), report.to_csv().as_bytes())?;
    outputs.push(rel(LOSS_FILE));
    if let Some(p) = predictions {
        write_file(&dir.join(PREDICTIONS_FILE), p.as_bytes())?;
        outputs.push(rel(PREDICTIONS_FILE));
    }
    let ck = Checkpoint::from_model(model).to_json();
    write_file(&dir.join(CHECKPOINT_FILE), ck.as_bytes())?;
    outputs.push(rel(CHECKPOINT_FILE));
    checkpoints.push(CheckpointHash {
        path: rel(CHECKPOINT_FILE),
        blob_sha256: git_blob_sha256(ck.as_bytes()),
    });
    Ok(())
}

fn resolve_init(init: &mut Option<InitArg>) -> Init {
    (*init.get_or_insert(InitArg::Glorot)).into()
}

fn settings(
    epochs: usize,
    batch_size: usize,
    seed: u64,
    basis: BasisArg,
    init: Init,
    adam: AdamArgs,
) -> CliResult<FuncSettings> {
    let adam: AdamConfig = adam.into();
    adam.validate()?;
    Ok(FuncSettings {
        epochs,
        batch_size,
        seed,
        basis: basis.into(),
        init,
        adam,
    })
}

fn train_func(mut args: TrainFuncArgs) -> CliResult<()> {
    let started_at = timestamp();
    let init = resolve_init(&mut args.init);
    let s = settings(
        args.epochs,
        args.batch_size,
        args.seed,
        args.basis,
        init,
        args.adam,
    )?;
    let (train, test) = function_data(args.function, args.experiment, args.seed)?;
    create_dir(&args.out)?;

    let run = run_function(args.arch, &s, &train, &test)?;
    let (mut outputs, mut checkpoints) = (Vec::new(), Vec::new());
    write_run(
        &args.out,
        &args.out,
        &run.model,
        &run.report,
        Some(&run.predictions),
        &mut outputs,
        &mut checkpoints,
    )?;

    RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: args.seed,
        configs: vec![run.model.config().clone()],
        training: s.training(),
        started_at,
        finished_at: timestamp(),
        outputs,
        checkpoints,
        command: Command::TrainFunc(args.clone()),
    }
    .save(&args.out)
}

fn absolute(path: &Path) -> CliResult<PathBuf> {
    std::fs::canonicalize(path).map_err(|source| {
        swag_core::Error::Io {
            path: path.to_owned(),
            source,
        }
        .into()
    })
}

fn train_mnist(mut args: TrainMnistArgs) -> CliResult<()> {
    let started_at = timestamp();
    // Absolute paths keep the manifest replayable from any directory.
    for p in [
        &mut args.images,
        &mut args.labels,
        &mut args.test_images,
        &mut args.test_labels,
    ] {
        *p = absolute(p)?;
    }
    let init = resolve_init(&mut args.init);
    let adam: AdamConfig = args.adam.into();
    adam.validate()?;
    let opts = FitOptions {
        adam,
        ..FitOptions::new(args.epochs, args.batch_size, args.loss.into(), args.seed)
    };

    let train = load_mnist(&args.images, &args.labels, Source::MnistTrain)?;
    let test = load_mnist(&args.test_images, &args.test_labels, Source::MnistTest)?;
    let mut cfg = match args.arch {
        MnistArch::Swag => {
            ModelConfig::swag("mnist-swag", 784, SwagShape::MNIST).with_basis(args.basis.into())
        }
        MnistArch::Baseline => Baseline::Mnist.config(),
    };
    cfg.init = init;
    create_dir(&args.out)?;

    let mut model = Model::build(cfg, &mut Rng::stream(args.seed, 0))?;
    let label = model.config().name.clone();
    let report = fit_with(&mut model, &train, &test, &opts, progress(&label))?;
    let (mut outputs, mut checkpoints) = (Vec::new(), Vec::new());
    write_run(
        &args.out,
        &args.out,
        &model,
        &report,
        None,
        &mut outputs,
        &mut checkpoints,
    )?;

    RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: args.seed,
        configs: vec![model.config().clone()],
        training: Training {
            epochs: opts.epochs,
            batch_size: opts.batch_size,
            loss: opts.loss,
            adam: opts.adam,
        },
        started_at,
        finished_at: timestamp(),
        outputs,
        checkpoints,
        command: Command::TrainMnist(args.clone()),
    }
    .save(&args.out)
}

fn gradcheck(args: &GradcheckArgs) -> CliResult<ExitCode> {
    if args.inject_fault.is_some() {
        swag_core::fault::enable_sign_flip()?;
    }
    let cases = if args.configs.is_empty() {
        GradCase::matrix()
    } else {
        args.configs.clone()
    };
    let mut all_ok = true;
    for case in cases {
        let err = case.check(args.seed)?;
        let ok = err < GRAD_TOLERANCE;
        all_ok &= ok;
        println!(
            "{case} max_rel_error={} {}",
            format_sig(err, 3),
            if ok { "ok" } else { "FAIL" }
        );
    }
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

#[derive(Serialize)]
struct Ranked {
    rank: usize,
    arch: &'static str,
    final_train_loss: Option<f64>,
    final_test_loss: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    function: FunctionArg,
    experiment: u8,
    seed: u64,
    epochs: usize,
    /// Ascending final training loss; runs without epochs come last.
    ranking: Vec<Ranked>,
}

fn compare(mut args: CompareArgs) -> CliResult<()> {
    let started_at = timestamp();
    let init = resolve_init(&mut args.init);
    let s = settings(
        args.epochs,
        args.batch_size,
        args.seed,
        args.basis,
        init,
        args.adam,
    )?;
    let (train, test) = function_data(args.function, args.experiment, args.seed)?;
    create_dir(&args.out)?;

    let (mut outputs, mut checkpoints) = (Vec::new(), Vec::new());
    let mut configs = Vec::new();
    let mut reports = Vec::new();
    for arch in FuncArch::ALL {
        let run = run_function(arch, &s, &train, &test)?;
        let dir = args.out.join(arch.name());
        create_dir(&dir)?;
        write_run(
            &args.out,
            &dir,
            &run.model,
            &run.report,
            Some(&run.predictions),
            &mut outputs,
            &mut checkpoints,
        )?;
        configs.push(run.model.config().clone());
        reports.push(run.report);
    }

    let names: Vec<&str> = FuncArch::ALL.iter().map(|a| a.name()).collect();
    write_file(
        &args.out.join(COMPARE_FILE),
        compare_csv(&names, &reports).as_bytes(),
    )?;
    outputs.push(COMPARE_FILE.into());

    let mut ranking: Vec<Ranked> = FuncArch::ALL
        .iter()
        .zip(&reports)
        .map(|(arch, r)| Ranked {
            rank: 0,
            arch: arch.name(),
            final_train_loss: r.final_record().map(|f| f.train_loss),
            final_test_loss: r.final_record().map(|f| f.test_loss),
        })
        .collect();
    ranking.sort_by(|a, b| {
        let key = |r: &Ranked| {
            r.final_train_loss
                .filter(|l| !l.is_nan())
                .unwrap_or(f64::INFINITY)
        };
        key(a).total_cmp(&key(b))
    });
    for (i, r) in ranking.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    let summary = Summary {
        function: args.function,
        experiment: args.experiment,
        seed: args.seed,
        epochs: args.epochs,
        ranking,
    };
    let text = serde_json::to_string_pretty(&summary).expect("summary serialises");
    write_file(&args.out.join(SUMMARY_FILE), text.as_bytes())?;
    outputs.push(SUMMARY_FILE.into());
    for r in &summary.ranking {
        println!(
            "{}. {} final_train_loss={}",
            r.rank,
            r.arch,
            r.final_train_loss.map_or("-".into(), |l| format_sig(l, 6))
        );
    }

    RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: args.seed,
        configs,
        training: s.training(),
        started_at,
        finished_at: timestamp(),
        outputs,
        checkpoints,
        command: Command::Compare(args.clone()),
    }
    .save(&args.out)
}

fn replay(args: ReplayArgs) -> CliResult<ExitCode> {
    let mut command = RunManifest::load(&args.manifest)?.command;
    if let Some(out) = args.out {
        match &mut command {
            Command::TrainFunc(a) => a.out = out,
            Command::TrainMnist(a) => a.out = out,
            Command::Compare(a) => a.out = out,
            Command::Gradcheck(_) | Command::Replay(_) => {}
        }
    }
    if matches!(command, Command::Replay(_)) {
        return Err(CliError::Input("a manifest cannot record a replay".into()));
    }
    run(command)
}
