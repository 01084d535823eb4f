//! Sparse recovery with coherent tight frames.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod frames;
pub mod linalg;
pub mod noise;
pub mod rng;
pub mod sensing;
pub mod solvers;

pub use error::{Error, Result};
