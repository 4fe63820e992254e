//! Discrete energy models, sampling primitives and reference MCMC chains.
//!
//! This crate is the algorithm side of the toolchain: everything here is
//! plain software with no hardware model. The `machine` module inside
//! [`mcmc`] additionally exposes the quantized evaluation path that the
//! pipeline simulator reproduces instruction by instruction.

pub mod anneal;
pub mod enumerate;
pub mod mcmc;
pub mod model;
pub mod quant;
pub mod rng;
pub mod samplers;

pub use anneal::AnnealSchedule;
pub use model::{GraphModel, RandomVariable, StateVector};
pub use rng::UniformRng;
