//! Score-informed neural operator toolkit for causal ordering.
//!
//! The crate trains a functional diffusion score model over tabular data,
//! estimates the Hessian diagonal of the log-density with either the model's
//! own derivatives or a kernel Stein estimator, recovers a causal order by
//! iterative leaf removal, prunes the order into a DAG, and can fuse the
//! data-side evidence with autoregressive priors for probabilistic control.
//!
//! The numeric substrate in [`diffcore`] is generic over the scalar type;
//! the pipeline itself is pinned to `f64` (second derivatives amplify
//! rounding; 32-bit is not enough for the derivative gates) through the
//! aliases below.

pub mod datagen;
pub mod dataset;
pub mod diffcore;
pub mod ensemble;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod net;
pub mod ordering;
pub mod prune;
pub mod rng;
pub mod stein;
pub mod train;

/// Scalar type used by the pipeline.
pub type Real = f64;

/// Hyper-dual number over the pipeline scalar.
pub type HyperDual = diffcore::HyperDual<Real>;

/// Complex spectrum over the pipeline scalar.
pub type ComplexSignal = diffcore::ComplexSignal<Real>;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use graph::Dag;
pub use ordering::CausalOrder;
