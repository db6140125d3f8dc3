//! Flag definitions. Every argument struct is also serialisable so a run's
//! fully resolved flags can be stored in its manifest and replayed.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use swag_core::network::Baseline;
use swag_core::training::GradCase;
use swag_core::{AdamConfig, Basis, Init, Loss, TargetFn};

#[derive(Debug, Parser)]
#[command(
    name = "swag",
    version,
    about = "Train and compare polynomial-basis networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Fit one architecture to F1, F2 or F3.
    TrainFunc(TrainFuncArgs),
    /// Train a classifier on MNIST IDX files.
    TrainMnist(TrainMnistArgs),
    /// Compare backprop with finite differences over the SWAG config matrix.
    Gradcheck(GradcheckArgs),
    /// Run SWAG and baselines A-E on the same data and rank their losses.
    Compare(CompareArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionArg {
    F1,
    F2,
    F3,
}

impl From<FunctionArg> for TargetFn {
    fn from(f: FunctionArg) -> Self {
        match f {
            FunctionArg::F1 => TargetFn::F1,
            FunctionArg::F2 => TargetFn::F2,
            FunctionArg::F3 => TargetFn::F3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FuncArch {
    Swag,
    BaselineA,
    BaselineB,
    BaselineC,
    BaselineD,
    BaselineE,
}

impl FuncArch {
    pub const ALL: [FuncArch; 6] = [
        FuncArch::Swag,
        FuncArch::BaselineA,
        FuncArch::BaselineB,
        FuncArch::BaselineC,
        FuncArch::BaselineD,
        FuncArch::BaselineE,
    ];

    pub fn name(self) -> &'static str {
        match self.baseline() {
            Some(b) => b.name(),
            None => "swag",
        }
    }

    pub fn baseline(self) -> Option<Baseline> {
        match self {
            FuncArch::Swag => None,
            FuncArch::BaselineA => Some(Baseline::A),
            FuncArch::BaselineB => Some(Baseline::B),
            FuncArch::BaselineC => Some(Baseline::C),
            FuncArch::BaselineD => Some(Baseline::D),
            FuncArch::BaselineE => Some(Baseline::E),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MnistArch {
    Swag,
    Baseline,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisArg {
    Factorial,
    Plain,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Factorial => Basis::Factorial,
            BasisArg::Plain => Basis::Plain,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitArg {
    /// N(0, 1) weights.
    Normal,
    /// Glorot uniform weights.
    Glorot,
}

impl From<InitArg> for Init {
    fn from(i: InitArg) -> Self {
        match i {
            InitArg::Normal => Init::StandardNormal,
            InitArg::Glorot => Init::GlorotUniform,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossArg {
    CrossEntropy,
    Mse,
}

impl From<LossArg> for Loss {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::CrossEntropy => Loss::SoftmaxCrossEntropy,
            LossArg::Mse => Loss::Mse,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    SignFlip,
}

#[derive(Clone, Copy, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct AdamArgs {
    /// Adam step size.
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.9)]
    pub beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    pub beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
}

impl From<AdamArgs> for AdamConfig {
    fn from(a: AdamArgs) -> Self {
        AdamConfig {
            alpha: a.lr,
            beta1: a.beta1,
            beta2: a.beta2,
            eps: a.epsilon,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct TrainFuncArgs {
    #[arg(long, value_enum)]
    pub function: FunctionArg,
    /// 1: random inputs, 2: interleaved grids.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub experiment: u8,
    #[arg(long, value_enum)]
    pub arch: FuncArch,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Monomial basis for SWAG blocks.
    #[arg(long, value_enum, default_value_t = BasisArg::Factorial)]
    pub basis: BasisArg,
    /// Weight initialisation; Glorot when omitted.
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    #[arg(long, default_value_t = 10)]
    pub batch_size: usize,
    #[command(flatten)]
    pub adam: AdamArgs,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct TrainMnistArgs {
    /// Training images (IDX, magic 0x803).
    #[arg(long)]
    pub images: PathBuf,
    /// Training labels (IDX, magic 0x801).
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub test_images: PathBuf,
    #[arg(long)]
    pub test_labels: PathBuf,
    #[arg(long, value_enum)]
    pub arch: MnistArch,
    #[arg(long, default_value_t = 4)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub batch_size: usize,
    #[arg(long, value_enum, default_value_t = LossArg::CrossEntropy)]
    pub loss: LossArg,
    #[arg(long, value_enum, default_value_t = BasisArg::Factorial)]
    pub basis: BasisArg,
    /// Weight initialisation; Glorot when omitted.
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    #[command(flatten)]
    pub adam: AdamArgs,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Check only these shapes, given as K,L,LAYERS (repeatable).
    #[arg(long = "config", value_parser = parse_case)]
    #[serde(with = "case_strings")]
    pub configs: Vec<GradCase>,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    #[arg(long, value_enum)]
    pub function: FunctionArg,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub experiment: u8,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 10)]
    pub batch_size: usize,
    #[arg(long, value_enum, default_value_t = BasisArg::Factorial)]
    pub basis: BasisArg,
    /// Weight initialisation for SWAG; Glorot when omitted.
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    #[command(flatten)]
    pub adam: AdamArgs,
}

#[derive(Clone, Debug, PartialEq, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write to this directory instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_case(s: &str) -> Result<GradCase, String> {
    s.parse().map_err(|e: swag_core::Error| e.to_string())
}

mod case_strings {
    use serde::{Deserialize, Deserializer, Serializer};
    use swag_core::training::GradCase;

    pub fn serialize<S: Serializer>(cases: &[GradCase], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(
            cases
                .iter()
                .map(|c| format!("{},{},{}", c.degree, c.width, c.layers)),
        )
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<GradCase>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}
