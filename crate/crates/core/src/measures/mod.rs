//! Local-time measures on connection times, the finite-radius IIC samplers
//! and exact enumeration tables for tiny radii.

pub mod exact;
mod extra_head;
mod local_time;
mod samplers;
mod theta;

pub use extra_head::{liggett_extra_head, poisson_points, LiggettSample};
pub use local_time::{estimate_m, mu, mu_bar, sample_chi, LocalTimeKind, LocalTimeSeries, MEstimator};
pub use samplers::{annealed_sample, fetic_sample, iic_prime_sample, iic_r_sample, AnnealedSample, IicPrimeSampler, IicSampler};
pub use theta::{estimate_theta, ThetaEntry, ThetaTable};
