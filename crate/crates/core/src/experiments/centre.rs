use serde::{Deserialize, Serialize};

use crate::dynamics::{Clocks, OriginCluster};
use crate::error::{Error, Result};
use crate::experiments::chunked;
use crate::lattice::{Ball, Cell, LatticeKind};
use crate::rng::{Rng, Seeder};
use crate::static_perc::Configuration;
use crate::stats::Estimate;

/// g(m) = log₂(m)/4.
pub fn g_schedule(m: f64) -> f64 {
    m.log2() / 4.0
}

/// P(∃ t ∈ [1/(2n), g(2n)] : 0 ↔ n) for one n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentreRow {
    pub n: u32,
    pub start: f64,
    pub end: f64,
    pub estimate: f64,
    pub se: f64,
    pub trials: u64,
}

/// B_n with only the cells on the axis r = 0 open.
fn axis_start(ball: &std::sync::Arc<Ball>) -> Configuration {
    Configuration::from_fn(ball, |i| matches!(ball.cell(i), Cell::Hex { r: 0, .. }))
}

fn reconnects(ball: &std::sync::Arc<Ball>, start: f64, end: f64, rng: &mut Rng) -> bool {
    let n = ball.radius();
    let mut cfg = axis_start(ball);
    let mut cluster = OriginCluster::new(&cfg, n);
    let mut clocks = Clocks::new(0..ball.len() as u32, 0.0, 0.5, rng);
    let mut checked = false;
    loop {
        let t = clocks.peek().expect("clocks are running");
        if !checked && t >= start {
            if cluster.reaches(n) {
                return true;
            }
            checked = true;
        }
        if t > end {
            return false;
        }
        let ring = clocks.next_ring(rng).expect("clocks are running");
        if cfg.get(ring.cell) == ring.state {
            continue;
        }
        cfg.set(ring.cell, ring.state);
        cluster.update(&cfg, ring.cell);
        if checked && ring.state && cluster.reaches(n) {
            return true;
        }
    }
}

/// P(∃ t ∈ [start, end] : 0 ↔ n) from the axis configuration of B_n; an
/// empty interval gives 0.
pub fn reconnection_probability(n: u32, start: f64, end: f64, trials: u64, seed: u64) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::InsufficientTrials);
    }
    if n == 0 || !(start >= 0.0) || !end.is_finite() {
        return Err(Error::InvalidParameter(format!("n = {n}, interval [{start}, {end}]")));
    }
    if start > end {
        return Ok(Estimate::binomial(0, trials));
    }
    let ball = Ball::new(LatticeKind::Hex, n);
    let seeder = Seeder::new(seed, "centre");
    let hits: u64 = chunked(&seeder, n as u64, trials, |rng, k| (0..k).filter(|_| reconnects(&ball, start, end, rng)).count() as u64)
        .iter()
        .sum();
    Ok(Estimate::binomial(hits, trials))
}

/// One row per n of `ns` over [1/(2n), g(2n)].
pub fn exp_centre_cannot_hold(ns: &[u32], trials: u64, seed: u64) -> Result<Vec<CentreRow>> {
    ns.iter()
        .map(|&n| {
            let (start, end) = (1.0 / (2.0 * n as f64), g_schedule(2.0 * n as f64));
            let e = reconnection_probability(n, start, end, trials, seed)?;
            Ok(CentreRow { n, start, end, estimate: e.value, se: e.se, trials })
        })
        .collect()
}
