//! Dynamical percolation: every cell carries a rate-one Poisson clock and
//! resamples its state at each ring.

mod clocks;
mod cluster;
mod reconnection;
mod timeline;
mod trajectory;

pub use clocks::Clocks;
pub use cluster::OriginCluster;
pub use reconnection::{
    arrival_sample, coupled_from, coupled_norm_thin, first_exceptional_time, reconnection_time, CoupledSample, FetSample,
    DEFAULT_CAP,
};
pub use timeline::{connection_timeline, event_timeline, ConnectionTimeline, Interval};
pub use trajectory::{simulate, Convention, Ring, Trajectory};
