//! Sparse similarity graphs built from ridge self-representation coefficients
//! (the L2-graph), with the learning pipelines that consume them:
//!
//! - [`graph`]: L2-graph construction plus the heat-kernel and LLE baselines
//! - [`spectral`]: normalized-Laplacian spectral clustering
//! - [`embedding`]: graph-embedded linear subspace learning and 1-NN evaluation
//! - [`metrics`]: clustering accuracy, NMI and the assignment solver behind them
//! - [`synth`]: union-of-subspaces and trajectory generators, corruption models
//! - [`theory`]: principal angles, minimum-norm representations and the
//!   nuclear-norm closed forms
//! - [`matrix_io`]: CSV matrices, graphs, labels and PCA preprocessing
//!
//! Data matrices always hold samples as columns.

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod embedding;
pub mod error;
pub mod graph;
pub(crate) mod linalg;
pub mod matrix_io;
pub mod metrics;
pub mod spectral;
pub mod synth;
pub mod theory;
pub mod verify;

pub use error::{Error, Result};
pub use matrix_io::{DataMatrix, Orientation, PcaModel};
