//! Spectral numerics and Monte Carlo simulation for branching α-stable
//! motions with a spatially localized catalyst.

pub mod config;
pub mod error;
pub mod quad;
pub mod sim;
pub mod spectral;
pub mod stable;
pub mod verify;

pub use error::{Error, Result};
pub use stable::{RadialProfile, StableParams};
