use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Clocks, OriginCluster};
use crate::error::{Error, Result};
use crate::experiments::{chunked, ExponentFit, PointEstimate};
use crate::lattice::{Ball, Cell, LatticeKind};
use crate::measures::IicSampler;
use crate::rng::Seeder;
use crate::static_perc::{ArmKind, Configuration, Crossing, Explorer};
use crate::stats::Estimate;

/// Fits of α_1(1, R) and α_4(1, R) against R.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmExponents {
    pub one_arm: ExponentFit,
    pub four_arm: ExponentFit,
}

fn arm_point(kind: ArmKind, big_r: u32, trials: u64, seeder: &Seeder) -> Result<PointEstimate> {
    if trials == 0 {
        return Err(Error::InsufficientTrials);
    }
    let ball = Ball::new(LatticeKind::Hex, big_r);
    let hits: u64 = chunked(seeder, big_r as u64, trials, |rng, n| {
        let mut ex = Explorer::new(&ball, 0.5);
        (0..n)
            .filter(|_| {
                ex.reset();
                match kind {
                    ArmKind::One => ex.one_arm(1, big_r, rng),
                    ArmKind::Four => ex.four_arm(1, big_r, rng),
                }
            })
            .count() as u64
    })
    .iter()
    .sum();
    let e = Estimate::binomial(hits, trials);
    Ok(PointEstimate { x: big_r as f64, value: e.value, se: e.se, trials })
}

/// α_1(1, R) for R in `one_radii` and α_4(1, R) for R in `four_radii`, each
/// with `trials` samples, fitted on log-log axes.
pub fn exp_arm_exponents(one_radii: &[u32], four_radii: &[u32], trials: u64, seed: u64) -> Result<ArmExponents> {
    for &r in one_radii.iter().chain(four_radii) {
        if r < 2 {
            return Err(Error::InvalidParameter(format!("arm radius {r} must be at least 2")));
        }
    }
    let seeder = Seeder::new(seed, "arm");
    let one = one_radii.iter().map(|&r| arm_point(ArmKind::One, r, trials, &seeder.child("one"))).collect::<Result<Vec<_>>>();
    let four = four_radii.iter().map(|&r| arm_point(ArmKind::Four, r, trials, &seeder.child("four"))).collect::<Result<Vec<_>>>();
    Ok(ArmExponents { one_arm: ExponentFit::fit("alpha1", one?)?, four_arm: ExponentFit::fit("alpha4", four?)? })
}

/// Mean pivotal counts of the rhombus crossings A(R) and the inverse map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PivotalScale {
    pub fit: ExponentFit,
}

impl PivotalScale {
    pub fn points(&self) -> &[PointEstimate] {
        &self.fit.points
    }

    fn log_points(&self) -> Vec<(f64, f64)> {
        self.fit.points.iter().map(|p| (p.x.ln(), p.value.ln())).collect()
    }

    /// Whether the estimates increase strictly with R, so that the
    /// interpolation is invertible.
    fn increasing(&self) -> bool {
        self.fit.points.windows(2).all(|w| w[1].value > w[0].value)
    }

    /// Ê|Piv_{A(R)}| at any R: log-log interpolation between measured
    /// radii, the fitted power law outside them.
    pub fn piv_at(&self, big_r: f64) -> f64 {
        let pts = self.log_points();
        let x = big_r.ln();
        if self.increasing() && x >= pts[0].0 && x <= pts[pts.len() - 1].0 {
            for w in pts.windows(2) {
                if x <= w[1].0 {
                    let f = (x - w[0].0) / (w[1].0 - w[0].0);
                    return (w[0].1 + f * (w[1].1 - w[0].1)).exp();
                }
            }
        }
        self.fit.predict(big_r)
    }

    /// ρ̂(y): the R at which Ê|Piv_{A(R)}| equals y.
    pub fn rho(&self, y: f64) -> f64 {
        let pts = self.log_points();
        let v = y.ln();
        if self.increasing() && v >= pts[0].1 && v <= pts[pts.len() - 1].1 {
            for w in pts.windows(2) {
                if v <= w[1].1 {
                    let f = (v - w[0].1) / (w[1].1 - w[0].1);
                    return (w[0].0 + f * (w[1].0 - w[0].0)).exp();
                }
            }
        }
        ((v - self.fit.intercept) / self.fit.slope).exp()
    }

    /// Monotone nondecreasing in R up to `k` standard errors.
    pub fn monotone_within(&self, k: f64) -> bool {
        self.fit.points.windows(2).all(|w| w[1].value + k * (w[0].se + w[1].se) >= w[0].value)
    }
}

/// The left-right crossing A(L) of the L×L rhombus {(q, r): o ≤ q, r < o + L}
/// with o = −⌊L/2⌋, on the smallest ball that holds it. Returns the ball, the
/// crossing and the rhombus cells with cell (o + q, o + r) at position r·L + q.
pub fn rhombus_crossing(side: u32) -> Result<(Arc<Ball>, Crossing, Vec<u32>)> {
    if side == 0 {
        return Err(Error::InvalidParameter("rhombus side must be positive".into()));
    }
    let l = side as i32;
    let o = -(l / 2);
    let ball = Ball::new(LatticeKind::Hex, side);
    let idx = |q: i32, r: i32| ball.index(Cell::hex(o + q, o + r)).expect("rhombus lies in the ball");
    let cells: Vec<u32> = (0..l).flat_map(|r| (0..l).map(move |q| (q, r))).map(|(q, r)| idx(q, r)).collect();
    let left: Vec<u32> = (0..l).map(|r| idx(0, r)).collect();
    let right: Vec<u32> = (0..l).map(|r| idx(l - 1, r)).collect();
    let x = Crossing::new(&ball, &cells, &left, &right);
    Ok((ball, x, cells))
}

/// E|Piv_{A(R)}| for each side R, `trials` full configurations per side.
pub fn exp_pivotal_scale(radii: &[u32], trials: u64, seed: u64) -> Result<PivotalScale> {
    if trials < 2 {
        return Err(Error::InsufficientTrials);
    }
    let seeder = Seeder::new(seed, "pivotal-scale");
    let mut points = Vec::with_capacity(radii.len());
    for &r in radii {
        let (ball, x, _) = rhombus_crossing(r)?;
        let counts: Vec<f64> = chunked(&seeder, r as u64, trials, |rng, n| {
            (0..n).map(|_| x.pivotals(&Configuration::sample(&ball, 0.5, rng)).len() as f64).collect::<Vec<_>>()
        })
        .concat();
        let e = Estimate::mean(&counts);
        points.push(PointEstimate { x: r as f64, value: e.value, se: e.se, trials });
    }
    Ok(PivotalScale { fit: ExponentFit::fit("pivotals", points)? })
}

/// Exact E|Piv_{A(L)}| at p = 1/2 for side ≤ 4, enumerating every
/// configuration of the rhombus.
pub fn rhombus_pivotal_mean(side: u32) -> Result<f64> {
    if side == 0 || side > 4 {
        return Err(Error::InvalidParameter(format!("rhombus side {side} must be in 1..=4")));
    }
    let (ball, x, cells) = rhombus_crossing(side)?;
    let n = cells.len();
    let mut total = 0u64;
    for w in 0u64..1 << n {
        let mut cfg = Configuration::closed(&ball);
        for (b, &c) in cells.iter().enumerate() {
            cfg.set(c, w >> b & 1 == 1);
        }
        total += x.pivotals(&cfg).len() as u64;
    }
    Ok(total as f64 / (1u64 << n) as f64)
}

/// |C_0 ∩ B_n| for each n in `ns`, where C_0 is the open cluster of the
/// origin in `cfg` (empty when the origin is closed).
pub fn iic_volume(cfg: &Configuration, ns: &[u32]) -> Vec<u64> {
    let ball = cfg.ball();
    let cluster = OriginCluster::new(cfg, ball.radius());
    ns.iter().map(|&n| cluster.members().iter().filter(|&&i| ball.dist(i) <= n).count() as u64).collect()
}

/// E_{IIC_r}|C_0 ∩ B_n| for n in `ns` (each n ≤ r/2), fitted against n.
pub fn exp_volume_exponent(r: u32, ns: &[u32], trials: u64, seed: u64) -> Result<ExponentFit> {
    if trials < 2 {
        return Err(Error::InsufficientTrials);
    }
    if let Some(&n) = ns.iter().find(|&&n| n == 0 || 2 * n > r) {
        return Err(Error::InvalidParameter(format!("volume radius {n} must lie in 1..=r/2 = {}", r / 2)));
    }
    let seeder = Seeder::new(seed, "volume");
    let rows: Vec<Vec<u64>> = chunked(&seeder, r as u64, trials, |rng, n| {
        let mut sampler = IicSampler::new(r);
        (0..n).map(|_| iic_volume(&sampler.sample(rng), ns)).collect::<Vec<_>>()
    })
    .concat();
    let points = ns
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let xs: Vec<f64> = rows.iter().map(|row| row[k] as f64).collect();
            let e = Estimate::mean(&xs);
            PointEstimate { x: n as f64, value: e.value, se: e.se, trials }
        })
        .collect();
    ExponentFit::fit("volume", points)
}

/// Collapse of the origin's cluster under dynamics started from IIC_R.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub big_r: u32,
    /// Fit of mean χ_t against 1/t.
    pub fit: ExponentFit,
    /// χ_t nonincreasing in t on every trial.
    pub monotone: bool,
    /// χ_0 = R on every trial.
    pub starts_at_r: bool,
    /// Fraction of trials with χ_t = 0 (origin closed by time t), per t.
    pub zero_fraction: Vec<f64>,
}

/// χ_t = min over s ≤ t of the radius of the origin's cluster at time s
/// (0 once the origin closes), for ω_0 ~ IIC_R, at each t of `times`
/// (ascending). Returns χ_0 followed by χ at each time.
fn collapse_path(sampler: &mut IicSampler, big_r: u32, times: &[f64], rng: &mut crate::rng::Rng) -> Vec<u32> {
    let mut cfg = sampler.sample(rng);
    let ball = cfg.ball().clone();
    let mut cluster = OriginCluster::new(&cfg, big_r);
    let mut chi = cluster.radius();
    let mut out = vec![chi];
    let mut clocks = Clocks::new(0..ball.len() as u32, 0.0, 0.5, rng);
    let mut next = 0;
    loop {
        let t = clocks.peek().expect("clocks are running");
        while next < times.len() && times[next] < t {
            out.push(chi);
            next += 1;
        }
        if next == times.len() || chi == 0 {
            break;
        }
        let ring = clocks.next_ring(rng).expect("clocks are running");
        if ball.dist(ring.cell) > chi || cfg.get(ring.cell) == ring.state {
            continue;
        }
        cfg.set(ring.cell, ring.state);
        cluster.update(&cfg, ring.cell);
        if cluster.radius() < chi {
            chi = cluster.radius();
            // Cells beyond the running minimum can no longer lower it.
            cluster.shrink_limit(chi);
        }
    }
    out.resize(times.len() + 1, chi);
    out
}

/// Mean χ_t over `trials` IIC_R starts at each t of `times`, fitted against
/// 1/t.
pub fn exp_collapse(big_r: u32, times: &[f64], trials: u64, seed: u64) -> Result<CollapseReport> {
    if trials < 2 {
        return Err(Error::InsufficientTrials);
    }
    if big_r == 0 || times.iter().any(|&t| !(t > 0.0 && t.is_finite())) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("collapse needs R ≥ 1 and increasing positive times".into()));
    }
    let seeder = Seeder::new(seed, "collapse");
    let paths: Vec<Vec<u32>> = chunked(&seeder, big_r as u64, trials, |rng, n| {
        let mut sampler = IicSampler::new(big_r);
        (0..n).map(|_| collapse_path(&mut sampler, big_r, times, rng)).collect::<Vec<_>>()
    })
    .concat();
    let monotone = paths.iter().all(|p| p.windows(2).all(|w| w[1] <= w[0]));
    let starts_at_r = paths.iter().all(|p| p[0] == big_r);
    let mut points = Vec::with_capacity(times.len());
    let mut zero_fraction = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let xs: Vec<f64> = paths.iter().map(|p| p[k + 1] as f64).collect();
        let e = Estimate::mean(&xs);
        points.push(PointEstimate { x: 1.0 / t, value: e.value, se: e.se, trials });
        zero_fraction.push(xs.iter().filter(|&&x| x == 0.0).count() as f64 / xs.len() as f64);
    }
    points.reverse();
    zero_fraction.reverse();
    Ok(CollapseReport { big_r, fit: ExponentFit::fit("collapse", points)?, monotone, starts_at_r, zero_fraction })
}
