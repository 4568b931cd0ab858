//! Floquet Lindbladians of periodically driven open quantum systems.
//!
//! Given a time-periodic Lindblad master equation, this crate integrates the
//! one-cycle map `P(T)`, decides whether some branch of `(1/T) log P(T)` is a
//! valid time-independent Lindbladian, measures the distance from that
//! situation when it is not, and builds an effective time-homogeneous master
//! equation with an exponential memory kernel that reproduces `P(T)`.

pub mod error;
pub mod kernel;
pub mod linalg;
pub mod markovianity;
pub mod model;
pub mod poly;
pub mod propagator;
pub mod spectral;
pub mod superop;

pub use error::{Error, Result};
