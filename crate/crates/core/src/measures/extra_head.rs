use rand::Rng as _;
use rand_distr::Exp1;

use crate::dynamics::{Clocks, Convention, Ring, Trajectory};
use crate::error::{Error, Result};
use crate::lattice::{Ball, LatticeKind};
use crate::measures::{LocalTimeSeries, ThetaTable};
use crate::rng::Rng;
use crate::static_perc::{Configuration, Crossing};

/// Π_μ on [0, horizon]: a unit-rate Poisson process Θ pushed through the
/// inverse of t ↦ μ[0, t].
pub fn poisson_points(series: &LocalTimeSeries, rng: &mut Rng) -> Vec<f64> {
    let mut out = Vec::new();
    let mut p: f64 = rng.sample(Exp1);
    while let Some(q) = series.inverse(p) {
        out.push(q);
        p += rng.sample::<f64, _>(Exp1);
    }
    out
}

/// The result of Liggett's extra head shift.
#[derive(Clone, Debug)]
pub struct LiggettSample {
    /// The dynamics seen from q_{r,J}: its initial state is ω(q_{r,J}),
    /// and it runs until the integer time J.
    pub trajectory: Trajectory,
    pub j: u64,
    /// q_{r,J}.
    pub shift: f64,
}

/// Liggett's extra head construction for Π_{μ̄_r} with m_r = 1: run the
/// stationary dynamics on B_r, place Π at the μ̄_r-quantiles of a unit
/// Poisson process, find the first integer J with |Π ∩ [0, J]| > J and
/// shift time by the J-th point.
pub fn liggett_extra_head(r: u32, theta: &ThetaTable, run_length: u64, rng: &mut Rng) -> Result<LiggettSample> {
    let th = theta.get(r)?;
    if run_length == 0 {
        return Err(Error::RunLengthExceeded(0));
    }
    let ball = Ball::new(LatticeKind::Hex, r);
    let x = Crossing::zero_to(&ball, r);
    let initial = Configuration::sample(&ball, 0.5, rng);
    let mut cfg = initial.clone();
    let mut on = x.occurs(&cfg);
    let mut clocks = Clocks::new(0..ball.len() as u32, 0.0, 0.5, rng);
    let mut theta_next: f64 = rng.sample(Exp1);
    let mut rings: Vec<Ring> = Vec::new();
    // (q_i, number of rings applied by then)
    let mut points: Vec<(f64, usize)> = Vec::new();
    let (mut t, mut mass) = (0.0f64, 0.0f64);
    let mut k = 1u64;
    loop {
        let t_next = clocks.peek().expect("nonempty ball");
        // Points of Π and integer checkpoints inside [t, t_next).
        loop {
            let q = if on { Some(t + (theta_next - mass) * th) } else { None };
            let q = q.filter(|&q| q < t_next);
            let kf = k as f64;
            match q {
                Some(q) if q <= kf => {
                    points.push((q, rings.len()));
                    mass = theta_next;
                    t = q;
                    theta_next += rng.sample::<f64, _>(Exp1);
                }
                _ if kf < t_next => {
                    if on {
                        mass += (kf - t) / th;
                    }
                    t = kf;
                    if points.len() as u64 > k {
                        return finish(initial, rings, points, k);
                    }
                    k += 1;
                    if k > run_length {
                        return Err(Error::RunLengthExceeded(run_length));
                    }
                }
                _ => break,
            }
        }
        if on {
            mass += (t_next - t) / th;
        }
        t = t_next;
        let ring = clocks.next_ring(rng).expect("nonempty ball");
        rings.push(ring);
        if cfg.get(ring.cell) != ring.state {
            cfg.set(ring.cell, ring.state);
            // Opening keeps an occurring connection, closing cannot create one.
            if on != ring.state {
                on = x.occurs(&cfg);
            }
        }
    }
}

fn finish(initial: Configuration, rings: Vec<Ring>, points: Vec<(f64, usize)>, j: u64) -> Result<LiggettSample> {
    let (shift, applied) = points[j as usize - 1];
    let mut start = initial;
    rings[..applied].iter().for_each(|r| start.set(r.cell, r.state));
    let later: Vec<Ring> = rings[applied..]
        .iter()
        .filter(|r| r.time <= j as f64)
        .map(|r| Ring { time: r.time - shift, ..*r })
        .filter(|r| r.time > 0.0)
        .collect();
    let trajectory = Trajectory::new(start, later, j as f64 - shift, Convention::Cadlag)?;
    Ok(LiggettSample { trajectory, j, shift })
}
