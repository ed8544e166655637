//! One-class graph autoencoder (OLGA).
//!
//! A GCN encoder maps every node of a k-NN graph to a low-dimensional,
//! tanh-bounded embedding. Training combines an inner-product reconstruction
//! loss with a hypersphere loss that pulls the labeled interest nodes toward
//! a fixed center; nodes that end inside the sphere are classified as
//! interest. The crate also carries the OCGNN baseline, the one-class
//! cross-validation protocol and the Friedman/Nemenyi rank analysis used to
//! compare methods.
//!
//! Modules, bottom-up:
//! - [`numcore`]: dense matrices and a reverse-mode gradient tape.
//! - [`graphbuild`]: datasets, k-NN graphs, fold splits.
//! - [`model`]: encoder, decoder, loss functions, checkpoints.
//! - [`train`]: Adam, the two-phase loss schedule, early stopping.
//! - [`evaluate`]: f1-macro, cross-validation, rank statistics, volumes.
//! - [`cli`]: the `olga` command-line tool.

pub mod cli;
pub mod error;
pub mod evaluate;
pub mod graphbuild;
pub mod model;
pub mod numcore;
pub mod train;

pub use error::{Error, Result};
