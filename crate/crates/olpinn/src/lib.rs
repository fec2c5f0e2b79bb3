//! Operator-learning enhanced physics-informed neural networks.
//!
//! Solves PDE benchmarks with sharp solutions by coupling a PINN to a frozen
//! DeepONet pretrained on a related family of smooth problems: a second
//! (correction) network takes the pretrained operator's prediction as input,
//! and a mean-square mismatch between the two trainable networks joins the
//! usual residual and data losses as a regularizer.
//!
//! Modules:
//! - [`autodiff`]: scalar reverse-mode tape with dual-number second derivatives
//! - [`nn`]: dense networks, initialization, batched evaluation
//! - [`optim`]: Adam / SGD
//! - [`deeponet`]: bias-augmented operator network and its pretraining
//! - [`pinn`]: residual and data losses, vanilla PINN training
//! - [`olpinn`]: the coupled two-network training loop
//! - [`problems`]: benchmark PDEs, oracles, point sampling
//! - [`harness`]: configs, experiment orchestration, checkpoints, reports

pub mod autodiff;
pub mod deeponet;
pub mod error;
pub mod harness;
pub mod nn;
pub mod olpinn;
pub mod optim;
pub mod pinn;
pub mod problems;

pub use error::{Error, Result};
