//! Exact evaluation, moment oracles and large-N asymptotics of the Gaussian expected random
//! polynomials E_N(z;σ) = E[Π_k (X_k² + z²)], with (X_k) centered normal and covariance
//! I + ((σ²−1)/N)·11ᵀ.

pub mod asymptotics;
pub mod cli;
pub mod convergence_lab;
pub mod error;
pub mod exact_core;
pub mod moments_oracle;
pub mod rational;

pub use error::{Error, Result};
pub use rational::{ComplexRational, Rational};
