//! Minimal numerical substrate: hyper-dual forward-mode derivatives,
//! discrete Fourier transforms over generic scalars, and a symmetric
//! positive-definite solver.
//!
//! Everything here is scalar-type-agnostic (`num_traits::Float`); the rest
//! of the crate instantiates it at `f64` via the crate-root aliases.

mod fft;
mod hyperdual;
mod linalg;

pub use fft::{fft_forward, fft_inverse, ComplexSignal, LinearElem};
pub use hyperdual::HyperDual;
pub use linalg::{cholesky_solve, CholeskyError};
