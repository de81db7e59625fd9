//! Multidimensional continued fraction algorithms, their cocycles, Lyapunov
//! exponent estimation and exact upper-bound certificates.

pub mod algorithms;
pub mod certifier;
pub mod cocycle;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod numeric;
pub mod pisot;

pub use error::{Error, Result};
