//! Asymptotic lifts of unital completely positive maps on finite-dimensional
//! matrix algebras and of stochastic matrices.
//!
//! The pipeline runs validate → spectral analysis → lift `(N, α, E)` →
//! classification, with the combinatorial Markov analysis alongside for
//! stochastic inputs. See [`pipeline::run_pipeline`].

pub mod catalog;
pub mod channel;
pub mod config;
pub mod decay;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod lift;
pub mod linalg;
pub mod markov;
pub mod operator;
pub mod pipeline;
pub mod sampling;
pub mod spectral;
pub mod stochastic;

pub use config::Config;
pub use error::{Error, Result};
