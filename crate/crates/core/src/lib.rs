//! Binary graph convolutional networks.
//!
//! Node features and layer weights are binarized into sign bits with one
//! real scale per row or column, so the dense feature transform of a graph
//! convolution runs as XNOR and popcount over packed 64-bit words. Training
//! keeps latent real-valued weights and passes gradients through the sign
//! function with a clipped straight-through estimator.
//!
//! * [`bitlinalg`]: bit packing, scaled-sign binarization and the binary GEMM.
//! * [`graph`]: attributed graphs, normalized adjacency and sparse aggregation.
//! * [`nn`]: Bi-GCN, GCN and Bi-GraphSAGE layers with their backward passes,
//!   batch norm, Adam and the training loop.
//! * [`efficiency`]: analytical memory and cycle counts.
//! * [`capacity`]: binned entropy of activations and the binary width bound.
//! * [`data`]: dataset files, activation dumps and a synthetic graph generator.
//! * [`cli`]: the `bigcn` command-line tool.

pub mod bitlinalg;
pub mod capacity;
pub mod cli;
pub mod data;
pub mod efficiency;
pub mod error;
pub mod graph;
pub mod nn;

pub use error::{DataError, Error, Result};
