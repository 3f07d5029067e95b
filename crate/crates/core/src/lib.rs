//! Spectral calculus for the Grushin operator G = −Δ − |x|²∂_t² on R^{n+1}.

pub mod bochner;
pub mod calculus;
pub mod cli;
pub mod config;
pub mod error;
pub mod gfunc;
pub mod grid;
pub mod hermite;
pub mod io;
pub mod lab;
pub mod multi_index;
pub mod quadrature;
pub mod riesz;
mod tensor;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
