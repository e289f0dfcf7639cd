//! Dynamical critical percolation at desk scale.
//!
//! Static and dynamical percolation on the hexagonal lattice (and Z² bonds),
//! local-time measures on exceptional connection times, IIC and FETIC
//! samplers, the thinning map, and exact Fourier–Walsh tools.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod measures;
pub mod oracle;
pub mod rng;
pub mod spectrum;
pub mod static_perc;
pub mod stats;
pub mod union_find;

pub use error::{Error, Result};
