//! Losses, Adam, the mini-batch loop, metrics and the gradient checker.

mod adam;
mod dd;
mod fit;
mod gradcheck;
mod loss;
mod metrics;
mod report;

pub use adam::{AdamConfig, AdamState};
pub use fit::{evaluate_loss, fit, fit_with, shuffled_batches, FitOptions};
pub use gradcheck::{grad_check, GradCase, DEFAULT_STEP};
pub use loss::{mse_loss, softmax_cross_entropy, Loss};
pub use metrics::{accuracy, argmax_columns};
pub use report::{format_sig, EpochRecord, TrainReport};
