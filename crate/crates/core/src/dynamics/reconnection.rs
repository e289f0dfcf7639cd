use std::sync::Arc;

use rand::{Rng as _, RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::dynamics::{Clocks, OriginCluster};
use crate::error::{Error, Result};
use crate::lattice::Ball;
use crate::measures::IicPrimeSampler;
use crate::rng::Rng;
use crate::static_perc::{fine_witness, thin, Configuration, Crossing, FineCriterion};

/// Horizon cap for reconnection times.
pub const DEFAULT_CAP: f64 = 64.0;

/// The first time 0 ↔ R from a stationary start conditioned on ¬(0 ↔ R).
#[derive(Clone, Debug)]
pub struct FetSample {
    pub time: f64,
    /// ω at FET_R: a FETIC_R sample.
    pub config: Configuration,
    /// The cell whose opening created the connection.
    pub cell: u32,
    pub rings: u64,
}

pub fn first_exceptional_time(ball: &Arc<Ball>, big_r: u32, rng: &mut Rng) -> Result<FetSample> {
    if big_r == 0 || big_r > ball.radius() {
        return Err(Error::InvalidParameter(format!("R = {big_r} must be in 1..={}", ball.radius())));
    }
    let x = Crossing::zero_to(ball, big_r);
    let mut cfg = loop {
        let c = Configuration::sample(ball, 0.5, rng);
        if !x.occurs(&c) {
            break c;
        }
    };
    let mut cluster = OriginCluster::new(&cfg, big_r);
    let mut clocks = Clocks::new(ball.sub_ball(big_r), 0.0, 0.5, rng);
    let mut rings = 0u64;
    loop {
        let ring = clocks.next_ring(rng).expect("nonempty ball");
        rings += 1;
        if cfg.get(ring.cell) == ring.state {
            continue;
        }
        cfg.set(ring.cell, ring.state);
        cluster.update(&cfg, ring.cell);
        if ring.state && cluster.reaches(big_r) {
            return Ok(FetSample { time: ring.time, config: cfg, cell: ring.cell, rings });
        }
    }
}

/// ω_0 ~ IIC′_R together with S uniform in Piv_{0↔R}(ω_0).
pub fn arrival_sample(sampler: &mut IicPrimeSampler, rng: &mut Rng) -> (Configuration, u32) {
    let (cfg, piv) = sampler.sample(rng);
    let s = piv[rng.random_range(0..piv.len())];
    (cfg, s)
}

/// Runs the dynamics from `start` (disconnected) until 0 ↔ R; returns the
/// reconnection time and whether the cap was hit first.
pub fn reconnection_time(start: &Configuration, big_r: u32, cap: f64, rng: &mut Rng) -> (f64, bool) {
    let ball = start.ball();
    let mut cfg = start.clone();
    let mut cluster = OriginCluster::new(&cfg, big_r);
    let mut clocks = Clocks::new(ball.sub_ball(big_r), 0.0, 0.5, rng);
    loop {
        let ring = clocks.next_ring(rng).expect("nonempty ball");
        if ring.time > cap {
            return (cap, true);
        }
        if cfg.get(ring.cell) == ring.state {
            continue;
        }
        cfg.set(ring.cell, ring.state);
        cluster.update(&cfg, ring.cell);
        if ring.state && cluster.reaches(big_r) {
            return (ring.time, false);
        }
    }
}

/// One draw of the coupled normal and thinned reversed processes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledSample {
    /// Reconnection time of ω′ (the cap when `n_capped`).
    pub n: f64,
    /// Reconnection time of ω″ (the cap when `t_capped`).
    pub t: f64,
    pub n_capped: bool,
    pub t_capped: bool,
    pub fine: bool,
    /// Good ∩ {N > 1/r} held for ω′.
    pub good_slow: bool,
    pub pivotals: usize,
    pub s: u32,
    pub s_thin: u32,
}

/// Tracks one process until it reconnects to distance R.
struct Process {
    cfg: Configuration,
    cluster: OriginCluster,
    done: Option<f64>,
}

impl Process {
    fn new(cfg: Configuration, big_r: u32) -> Process {
        let cluster = OriginCluster::new(&cfg, big_r);
        Process { cfg, cluster, done: None }
    }

    /// Applies a ring; returns whether the state changed.
    fn apply(&mut self, time: f64, cell: u32, state: bool, big_r: u32) -> bool {
        if self.done.is_some() || self.cfg.get(cell) == state {
            return false;
        }
        self.cfg.set(cell, state);
        self.cluster.update(&self.cfg, cell);
        if state && self.cluster.reaches(big_r) {
            self.done = Some(time);
        }
        true
    }
}

/// The normal/thinned coupling. ω′_0 ~ IIC′_R with S uniform in its
/// pivotals closed at 0+; ω″_0 = Thinning(ω′_0) with S″ = S when S lies
/// outside Int(Γ_r), otherwise uniform among the interior pivotals of ω″_0,
/// drawn from a dedicated substream so that ω′ does not depend on the
/// choice. Both processes then use the same rings and the same draws.
pub fn coupled_norm_thin(
    crit: &FineCriterion,
    cap: f64,
    sampler: &mut IicPrimeSampler,
    rng: &mut Rng,
) -> Result<CoupledSample> {
    if sampler.radius() != crit.big_r {
        return Err(Error::InvalidParameter(format!("sampler radius {} differs from R = {}", sampler.radius(), crit.big_r)));
    }
    let mut s_rng = Rng::seed_from_u64(rng.next_u64());
    let (omega0, s) = arrival_sample(sampler, rng);
    coupled_from(&omega0, s, crit, cap, rng, &mut s_rng)
}

/// The coupling started from a given arrival configuration ω′_0 (with
/// 0 ↔ R) and pivotal cell S.
pub fn coupled_from(
    omega0: &Configuration,
    s: u32,
    crit: &FineCriterion,
    cap: f64,
    rng: &mut Rng,
    s_rng: &mut Rng,
) -> Result<CoupledSample> {
    let big_r = crit.big_r;
    if omega0.ball().radius() != big_r {
        return Err(Error::InvalidParameter(format!("configuration radius differs from R = {big_r}")));
    }
    let piv = Crossing::zero_to(omega0.ball(), big_r).pivotals(omega0);
    if !piv.contains(&s) {
        return Err(Error::InvalidParameter(format!("cell {s} is not pivotal")));
    }
    let pivotals = piv.len();
    let ball = omega0.ball().clone();
    let witness = fine_witness(omega0, crit);
    let fine = witness.is_some();

    let mut opened = omega0.clone();
    opened.set(s, false);
    let mut norm = Process::new(opened, big_r);
    let (mut thinned, s_thin) = match &witness {
        None => (None, s),
        Some((gamma, _)) => {
            let mut t = thin(omega0, crit)?;
            let s2 = if gamma.interior().contains(&ball.cell(s)) {
                let inside: Vec<u32> = Crossing::zero_to(&ball, big_r)
                    .pivotals(&t)
                    .into_iter()
                    .filter(|&i| gamma.interior().contains(&ball.cell(i)))
                    .collect();
                inside[s_rng.random_range(0..inside.len())]
            } else {
                s
            };
            t.set(s2, false);
            (Some(Process::new(t, big_r)), s2)
        }
    };

    // Good: an open circuit in A(r^{1+ε}, r^{1+2ε}) and 0 ↔ r^{1+2ε}
    // throughout [0, 1/r] in ω′.
    let a1 = crit.circuit_radius;
    let a2 = ((crit.r as f64).powf(1.0 + 2.0 * crit.epsilon).floor() as u32).min(big_r);
    let window = 1.0 / crit.r as f64;
    let closed_crossing = (a1 < a2).then(|| Crossing::annulus(&ball, a1, a2));
    let inner_arm = Crossing::zero_to(&ball, a2);
    let good_now = |cfg: &Configuration| {
        inner_arm.occurs(cfg) && closed_crossing.as_ref().is_none_or(|x| !x.occurs(&cfg.complement()))
    };
    let mut good = fine && good_now(omega0) && good_now(&norm.cfg);

    let mut clocks = Clocks::new(0..ball.len() as u32, 0.0, 0.5, rng);
    loop {
        let both_done = norm.done.is_some() && thinned.as_ref().is_none_or(|p| p.done.is_some());
        if both_done {
            break;
        }
        let ring = clocks.next_ring(rng).expect("nonempty ball");
        if ring.time > cap {
            break;
        }
        let changed = norm.apply(ring.time, ring.cell, ring.state, big_r);
        if let Some(p) = thinned.as_mut() {
            p.apply(ring.time, ring.cell, ring.state, big_r);
        }
        if good && changed && ring.time <= window && ball.dist(ring.cell) <= a2 {
            good = good_now(&norm.cfg);
        }
    }
    let (n, n_capped) = norm.done.map_or((cap, true), |t| (t, false));
    let (t, t_capped) = match &thinned {
        None => (n, n_capped),
        Some(p) => p.done.map_or((cap, true), |t| (t, false)),
    };
    Ok(CoupledSample { n, t, n_capped, t_capped, fine, good_slow: good && n > window, pivotals, s, s_thin })
}
