use std::sync::Arc;

use rand::Rng as _;

use crate::dynamics::{first_exceptional_time, simulate, Trajectory};
use crate::error::Result;
use crate::lattice::{Ball, LatticeKind};
use crate::measures::{mu_bar, sample_chi, ThetaTable};
use crate::rng::Rng;
use crate::static_perc::{Configuration, Crossing, Explorer};

/// IIC_r = P(· | 0 ↔ r) on B_r by rejection. Each attempt explores the
/// origin's cluster lazily and only accepted attempts are completed, which
/// leaves the law of the accepted configuration unchanged.
pub struct IicSampler {
    r: u32,
    explorer: Explorer,
    pub attempts: u64,
    pub accepted: u64,
}

impl IicSampler {
    pub fn new(r: u32) -> IicSampler {
        let ball = Ball::new(LatticeKind::Hex, r);
        IicSampler { r, explorer: Explorer::new(&ball, 0.5), attempts: 0, accepted: 0 }
    }

    pub fn ball(&self) -> &Arc<Ball> {
        self.explorer.ball()
    }

    pub fn sample(&mut self, rng: &mut Rng) -> Configuration {
        loop {
            self.attempts += 1;
            self.explorer.reset();
            if self.explorer.zero_to(self.r, rng) {
                self.accepted += 1;
                return self.explorer.materialize(rng);
            }
        }
    }
}

pub fn iic_r_sample(r: u32, rng: &mut Rng) -> Configuration {
    IicSampler::new(r).sample(rng)
}

/// IIC′_R: IIC_R reweighted by |Piv_{0↔R}|, by accepting an IIC_R draw with
/// probability |Piv|/|B_R|. The shortest open path length bounds |Piv| from
/// above and screens out most rejections before pivotals are computed.
pub struct IicPrimeSampler {
    iic: IicSampler,
    crossing: Crossing,
    last: Vec<u32>,
    pub proposals: u64,
    pub accepted: u64,
}

impl IicPrimeSampler {
    pub fn new(big_r: u32) -> IicPrimeSampler {
        let iic = IicSampler::new(big_r);
        let crossing = Crossing::zero_to(iic.ball(), big_r);
        IicPrimeSampler { iic, crossing, last: Vec::new(), proposals: 0, accepted: 0 }
    }

    pub fn radius(&self) -> u32 {
        self.iic.r
    }

    pub fn ball(&self) -> &Arc<Ball> {
        self.iic.ball()
    }

    /// Returns the configuration and its pivotal cells.
    pub fn sample(&mut self, rng: &mut Rng) -> (Configuration, Vec<u32>) {
        let n = self.ball().len() as f64;
        loop {
            let cfg = self.iic.sample(rng);
            self.proposals += 1;
            let u = rng.random::<f64>() * n;
            let bound = self.crossing.shortest_path_len(&cfg).expect("IIC sample is connected") as f64;
            if u >= bound {
                continue;
            }
            let piv = self.crossing.pivotals(&cfg);
            if u < piv.len() as f64 {
                self.accepted += 1;
                self.last = piv.clone();
                return (cfg, piv);
            }
        }
    }

    /// |Piv| of the last accepted sample.
    pub fn last_pivotals(&self) -> usize {
        self.last.len()
    }
}

pub fn iic_prime_sample(big_r: u32, rng: &mut Rng) -> Configuration {
    IicPrimeSampler::new(big_r).sample(rng).0
}

/// FETIC_R: the configuration at the first exceptional time.
pub fn fetic_sample(big_r: u32, rng: &mut Rng) -> Result<Configuration> {
    let ball = Ball::new(LatticeKind::Hex, big_r);
    Ok(first_exceptional_time(&ball, big_r, rng)?.config)
}

#[derive(Clone, Debug)]
pub struct AnnealedSample {
    pub trajectory: Trajectory,
    pub chi: f64,
    pub attempts: u64,
}

impl AnnealedSample {
    /// ω(χ).
    pub fn at_chi(&self) -> Configuration {
        self.trajectory.state_at(self.chi)
    }
}

/// Dynamics on B_r over [0, T] size-biased by μ̄_r[0, T] (rejection with
/// acceptance μ̄_r[0, T] θ(r)/T ≤ 1), then χ drawn from μ̄_r/μ̄_r[0, T].
pub fn annealed_sample(r: u32, horizon: f64, theta: &ThetaTable, rng: &mut Rng) -> Result<AnnealedSample> {
    let th = theta.get(r)?;
    let ball = Ball::new(LatticeKind::Hex, r);
    let mut attempts = 0;
    loop {
        attempts += 1;
        let initial = Configuration::sample(&ball, 0.5, rng);
        let traj = simulate(initial, horizon, rng)?;
        let series = mu_bar(&traj, r, theta)?;
        let u: f64 = rng.random();
        if u < series.mass * th / horizon {
            let chi = sample_chi(&series, rng)?;
            return Ok(AnnealedSample { trajectory: traj, chi, attempts });
        }
    }
}
