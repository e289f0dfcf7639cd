//! Static percolation: configurations, crossing events, pivotals, arm
//! estimates, innermost circuits and the thinning map.

mod arms;
mod circuit;
mod config;
mod crossing;
mod thinning;

pub use arms::{arm_probability, four_arm_by_flip, ArmEstimate, ArmKind, Explorer};
pub use circuit::innermost_circuit;
pub use config::{Coin, Configuration, FairBits};
pub use crossing::{connected, pivotals, zero_to_r, Crossing};
pub use thinning::{fine_witness, is_fine, slim_config, thin, FineCriterion, HEX_ETA};
