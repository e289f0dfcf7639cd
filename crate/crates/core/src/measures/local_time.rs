use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dynamics::{connection_timeline, Trajectory};
use crate::error::{Error, Result};
use crate::lattice::{Ball, LatticeKind};
use crate::measures::ThetaTable;
use crate::rng::Rng;
use crate::static_perc::{Configuration, Crossing, Explorer};
use crate::stats::Estimate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalTimeKind {
    /// Density 1{0 ↔ r}/θ(r).
    MuBar,
    /// Density M_r, the conditional connection ratio.
    Mu,
}

/// A piecewise-constant density on [0, horizon].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalTimeSeries {
    pub r: u32,
    pub kind: LocalTimeKind,
    /// Piece boundaries, starting at 0 and ending at the horizon.
    pub breakpoints: Vec<f64>,
    pub densities: Vec<f64>,
    pub mass: f64,
}

impl LocalTimeSeries {
    /// Builds a series from piece boundaries and densities, merging
    /// neighbouring pieces with equal density.
    pub fn from_pieces(r: u32, kind: LocalTimeKind, breakpoints: Vec<f64>, densities: Vec<f64>) -> Self {
        assert_eq!(breakpoints.len(), densities.len() + 1);
        let mut bp = vec![breakpoints[0]];
        let mut ds: Vec<f64> = Vec::new();
        for (k, &d) in densities.iter().enumerate() {
            let end = breakpoints[k + 1];
            if end <= *bp.last().unwrap() {
                continue;
            }
            if ds.last() == Some(&d) {
                *bp.last_mut().unwrap() = end;
            } else {
                ds.push(d);
                bp.push(end);
            }
        }
        let mass = ds.iter().enumerate().map(|(k, d)| d * (bp[k + 1] - bp[k])).sum();
        LocalTimeSeries { r, kind, breakpoints: bp, densities: ds, mass }
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.densities.iter().enumerate().map(|(k, &d)| (self.breakpoints[k], self.breakpoints[k + 1], d))
    }

    pub fn density_at(&self, t: f64) -> f64 {
        self.pieces().find(|&(a, b, _)| t >= a && t < b).map_or(0.0, |p| p.2)
    }

    /// μ[0, t].
    pub fn cumulative(&self, t: f64) -> f64 {
        self.pieces().map(|(a, b, d)| d * (b.min(t) - a).max(0.0)).sum()
    }

    /// inf{t : μ[0, t] > m}, or None when the total mass does not exceed m.
    pub fn inverse(&self, m: f64) -> Option<f64> {
        let mut acc = 0.0;
        for (a, b, d) in self.pieces() {
            let piece = d * (b - a);
            if d > 0.0 && acc + piece > m {
                return Some(a + ((m - acc) / d).max(0.0));
            }
            acc += piece;
        }
        None
    }

    /// CSV with columns t_start, t_end, density.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t_start,t_end,density\n");
        for (a, b, d) in self.pieces() {
            s.push_str(&format!("{a:?},{b:?},{d:?}\n"));
        }
        s
    }
}

/// μ̄_r along a trajectory: density 1{0 ↔ r}/θ(r).
pub fn mu_bar(traj: &Trajectory, r: u32, theta: &ThetaTable) -> Result<LocalTimeSeries> {
    let th = theta.get(r)?;
    let tl = connection_timeline(traj, r)?;
    let mut bp = vec![0.0];
    let mut ds = Vec::new();
    for iv in &tl.intervals {
        if iv.start > *bp.last().unwrap() {
            ds.push(0.0);
            bp.push(iv.start);
        }
        ds.push(1.0 / th);
        bp.push(iv.end);
    }
    if traj.horizon() > *bp.last().unwrap() {
        ds.push(0.0);
        bp.push(traj.horizon());
    }
    if ds.is_empty() {
        ds.push(0.0);
        bp.push(traj.horizon());
    }
    Ok(LocalTimeSeries::from_pieces(r, LocalTimeKind::MuBar, bp, ds))
}

/// Nested Monte Carlo for M̂_r(ζ) = P̂(0 ↔ R | ω^{B_r} = ζ)/θ(R), resampling
/// B_R \ B_r lazily with B_r frozen. Estimates are cached per B_r pattern.
pub struct MEstimator {
    r: u32,
    big_r: u32,
    trials: u64,
    theta_big: f64,
    explorer: Explorer,
    inner: Crossing,
    inner_cells: Vec<u32>,
    cache: HashMap<Vec<bool>, Estimate>,
}

impl MEstimator {
    pub fn new(r: u32, big_r: u32, theta: &ThetaTable, trials: u64) -> Result<Self> {
        if big_r < 2 * r || big_r == 0 {
            return Err(Error::InvalidParameter(format!("M estimation needs R ≥ 2r, got r={r}, R={big_r}")));
        }
        if trials == 0 {
            return Err(Error::InsufficientTrials);
        }
        let ball = Ball::new(LatticeKind::Hex, big_r);
        let small = Ball::new(LatticeKind::Hex, r);
        let inner_cells: Vec<u32> = small.cells().iter().map(|&c| ball.index(c).unwrap()).collect();
        Ok(MEstimator {
            r,
            big_r,
            trials,
            theta_big: theta.get(big_r)?,
            explorer: Explorer::new(&ball, 0.5),
            inner: Crossing::zero_to(&small, r),
            inner_cells,
            cache: HashMap::new(),
        })
    }

    pub fn ball(&self) -> &Arc<Ball> {
        self.explorer.ball()
    }

    /// M̂_r for the B_r contents of `cfg` (a configuration on a ball ⊇ B_r).
    pub fn estimate(&mut self, cfg: &Configuration, rng: &mut Rng) -> Estimate {
        let small = self.inner.ball().clone();
        let local = Configuration::from_fn(&small, |i| cfg.is_open(small.cell(i)));
        if !self.inner.occurs(&local) {
            return Estimate { value: 0.0, se: 0.0, n: 0 };
        }
        let key: Vec<bool> = (0..small.len() as u32).map(|i| local.get(i)).collect();
        if let Some(e) = self.cache.get(&key) {
            return *e;
        }
        let mut hits = 0u64;
        for _ in 0..self.trials {
            self.explorer.reset();
            for (k, &i) in self.inner_cells.iter().enumerate() {
                self.explorer.force(i, key[k]);
            }
            hits += self.explorer.zero_to(self.big_r, rng) as u64;
        }
        let p = Estimate::binomial(hits, self.trials);
        let e = Estimate { value: p.value / self.theta_big, se: p.se / self.theta_big, n: p.n };
        self.cache.insert(key, e);
        e
    }

    pub fn radius(&self) -> u32 {
        self.r
    }
}

/// One-off M̂_r estimate; see [`MEstimator`].
pub fn estimate_m(cfg: &Configuration, r: u32, big_r: u32, theta: &ThetaTable, trials: u64, rng: &mut Rng) -> Result<Estimate> {
    Ok(MEstimator::new(r, big_r, theta, trials)?.estimate(cfg, rng))
}

/// μ_r along a trajectory, with the density re-estimated at every
/// state-changing ring inside B_r.
pub fn mu(traj: &Trajectory, est: &mut MEstimator, rng: &mut Rng) -> Result<LocalTimeSeries> {
    let r = est.radius();
    let ball = traj.initial().ball().clone();
    if r > ball.radius() {
        return Err(Error::InvalidRegion(format!("B_{r} is not inside B_{}", ball.radius())));
    }
    let mut cfg = traj.initial().clone();
    let mut bp = vec![0.0];
    let mut ds = vec![est.estimate(&cfg, rng).value];
    for ring in traj.rings() {
        if cfg.get(ring.cell) == ring.state {
            continue;
        }
        cfg.set(ring.cell, ring.state);
        if ball.dist(ring.cell) > r {
            continue;
        }
        bp.push(ring.time);
        ds.push(est.estimate(&cfg, rng).value);
    }
    bp.push(traj.horizon());
    Ok(LocalTimeSeries::from_pieces(r, LocalTimeKind::Mu, bp, ds))
}

/// A time drawn from μ/μ[0, horizon].
pub fn sample_chi(series: &LocalTimeSeries, rng: &mut Rng) -> Result<f64> {
    if series.mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let u: f64 = rng.random();
    Ok(series.inverse(u * series.mass).unwrap_or_else(|| series.horizon()))
}
