use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{arc_of, Arc4, Ball, LatticeKind, NONE};
use crate::rng::Rng;
use crate::static_perc::{Coin, Configuration, Crossing};
use crate::stats::Estimate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArmKind {
    One,
    /// Alternating open/closed/open/closed arms, i.e. pivotality of B_r.
    Four,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmEstimate {
    pub kind: ArmKind,
    pub r: u32,
    pub big_r: u32,
    pub p: f64,
    pub trials: u64,
    pub estimate: f64,
    pub se: f64,
}

/// Lazily sampled percolation on a ball: a cell's state is drawn the first
/// time a search looks at it, so a trial costs only the explored region.
pub struct Explorer {
    ball: Arc<Ball>,
    coin: Coin,
    sampled: Vec<u32>,
    open: Vec<bool>,
    epoch: u32,
    visited: Vec<u32>,
    visit: u32,
    arcs: Vec<u8>,
    stack: Vec<u32>,
    touched: Vec<u32>,
}

impl Explorer {
    pub fn new(ball: &Arc<Ball>, p: f64) -> Explorer {
        let n = ball.len();
        let arcs = (0..n as u32).map(|i| arc_of(ball.cell(i)) as u8).collect();
        Explorer {
            ball: ball.clone(),
            coin: Coin::new(p),
            sampled: vec![0; n],
            open: vec![false; n],
            epoch: 1,
            visited: vec![0; n],
            visit: 0,
            arcs,
            stack: Vec::new(),
            touched: Vec::new(),
        }
    }

    pub fn ball(&self) -> &Arc<Ball> {
        &self.ball
    }

    /// Starts a fresh configuration.
    pub fn reset(&mut self) {
        self.epoch += 1;
        self.touched.clear();
    }

    fn new_visit(&mut self) {
        self.visit += 1;
    }

    /// Forces a cell state in the current configuration.
    pub fn force(&mut self, i: u32, open: bool) {
        if self.sampled[i as usize] != self.epoch {
            self.touched.push(i);
        }
        self.sampled[i as usize] = self.epoch;
        self.open[i as usize] = open;
    }

    #[inline]
    pub fn state(&mut self, i: u32, rng: &mut Rng) -> bool {
        let k = i as usize;
        if self.sampled[k] != self.epoch {
            self.sampled[k] = self.epoch;
            self.open[k] = self.coin.flip(rng);
            self.touched.push(i);
        }
        self.open[k]
    }

    /// Cells whose state has been drawn or forced in the current configuration.
    pub fn touched(&self) -> &[u32] {
        &self.touched
    }

    /// Searches from `starts` through cells with the given state inside
    /// r_lo < d ≤ r_hi, stopping as soon as `goal` accepts a visited cell.
    fn search(
        &mut self,
        starts: &[u32],
        want_open: bool,
        r_lo: Option<u32>,
        r_hi: u32,
        rng: &mut Rng,
        goal: &mut dyn FnMut(u32, u32, u8) -> bool,
    ) -> bool {
        self.new_visit();
        let inside = |d: u32| d <= r_hi && r_lo.is_none_or(|lo| d > lo);
        let mut stack = std::mem::take(&mut self.stack);
        stack.clear();
        let mut found = false;
        'outer: for &s in starts {
            if self.visited[s as usize] == self.visit || self.state(s, rng) != want_open {
                continue;
            }
            self.visited[s as usize] = self.visit;
            if goal(s, self.ball.dist(s), self.arcs[s as usize]) {
                found = true;
                break;
            }
            stack.push(s);
            while let Some(v) = stack.pop() {
                for k in 0..6 {
                    let w = self.ball.nbrs(v)[k];
                    if w == NONE || self.visited[w as usize] == self.visit || !inside(self.ball.dist(w)) {
                        continue;
                    }
                    if self.state(w, rng) != want_open {
                        continue;
                    }
                    self.visited[w as usize] = self.visit;
                    if goal(w, self.ball.dist(w), self.arcs[w as usize]) {
                        found = true;
                        break 'outer;
                    }
                    stack.push(w);
                }
            }
        }
        self.stack = stack;
        found
    }

    /// {r ↔ R} in the annulus r < d ≤ R; r = 0 gives {0 ↔ R}.
    pub fn one_arm(&mut self, r: u32, big_r: u32, rng: &mut Rng) -> bool {
        if r == 0 {
            return self.zero_to(big_r, rng);
        }
        let starts: Vec<u32> = self.ball.sphere(r + 1).to_vec();
        self.search(&starts, true, Some(r), big_r, rng, &mut |_, d, _| d == big_r)
    }

    /// {0 ↔ R} inside B_R.
    pub fn zero_to(&mut self, big_r: u32, rng: &mut Rng) -> bool {
        let o = self.ball.origin();
        self.search(&[o], true, None, big_r, rng, &mut |_, d, _| d == big_r)
    }

    /// The open cluster of the origin inside B_R (empty when the origin is
    /// closed), exploring it completely.
    pub fn origin_cluster(&mut self, big_r: u32, rng: &mut Rng) -> Vec<u32> {
        let o = self.ball.origin();
        let mut out = Vec::new();
        self.search(&[o], true, None, big_r, rng, &mut |v, _, _| {
            out.push(v);
            false
        });
        out
    }

    /// B_r pivotal for the left-right crossing of B_R (four alternating arms
    /// around B_r). With B_r open the crossing needs open arms from the
    /// sphere r+1 to both side arcs; with B_r closed it must fail, i.e. no
    /// open left-right path avoids B_r.
    pub fn four_arm(&mut self, r: u32, big_r: u32, rng: &mut Rng) -> bool {
        let starts: Vec<u32> = self.ball.sphere(r + 1).to_vec();
        let (left, right) = (Arc4::Left as u8, Arc4::Right as u8);
        let mut seen = [false; 2];
        let mut arms = |_: u32, d: u32, arc: u8| {
            if d == big_r {
                seen[0] |= arc == left;
                seen[1] |= arc == right;
            }
            seen[0] && seen[1]
        };
        if !self.search(&starts, true, Some(r), big_r, rng, &mut arms) {
            return false;
        }
        let left_arc: Vec<u32> = self
            .ball
            .sphere(big_r)
            .iter()
            .copied()
            .filter(|&i| self.arcs[i as usize] == left)
            .collect();
        let mut bypass = |_: u32, d: u32, arc: u8| d == big_r && arc == right;
        !self.search(&left_arc, true, Some(r), big_r, rng, &mut bypass)
    }

    /// Completes the current configuration with fresh draws for every cell
    /// not yet looked at.
    pub fn materialize(&mut self, rng: &mut Rng) -> Configuration {
        let mut cfg = Configuration::closed(&self.ball);
        for i in 0..self.ball.len() as u32 {
            if self.state(i, rng) {
                cfg.set(i, true);
            }
        }
        cfg
    }

    /// The drawn/forced states as a configuration, unseen cells closed.
    pub fn observed(&self) -> Configuration {
        let mut cfg = Configuration::closed(&self.ball);
        for &i in &self.touched {
            if self.open[i as usize] {
                cfg.set(i, true);
            }
        }
        cfg
    }
}

/// B_r pivotal for the left-right crossing of B_R, by flipping B_r as one
/// supercell on a full configuration.
pub fn four_arm_by_flip(cfg: &Configuration, r: u32, big_r: u32) -> bool {
    let ball = cfg.ball();
    let sphere = ball.sphere(big_r);
    let left: Vec<u32> = sphere.iter().copied().filter(|&i| arc_of(ball.cell(i)) == Arc4::Left).collect();
    let right: Vec<u32> = sphere.iter().copied().filter(|&i| arc_of(ball.cell(i)) == Arc4::Right).collect();
    let x = Crossing::new(ball, &ball.sub_ball(big_r), &left, &right);
    let mut work = cfg.clone();
    let inner = ball.sub_ball(r);
    inner.iter().for_each(|&i| work.set(i, true));
    let with_open = x.occurs(&work);
    inner.iter().for_each(|&i| work.set(i, false));
    with_open != x.occurs(&work)
}

/// Monte Carlo estimate of α_1(r,R) or α_4(r,R) at density p.
pub fn arm_probability(kind: ArmKind, r: u32, big_r: u32, p: f64, trials: u64, rng: &mut Rng) -> Result<ArmEstimate> {
    if trials == 0 {
        return Err(Error::InsufficientTrials);
    }
    if r < 1 || r > big_r {
        return Err(Error::InvalidParameter(format!("arm radii need 1 ≤ r ≤ R, got r={r}, R={big_r}")));
    }
    let done = |estimate: f64, se: f64| ArmEstimate { kind, r, big_r, p, trials, estimate, se };
    if r == big_r {
        return Ok(done(1.0, 0.0));
    }
    let ball = Ball::new(LatticeKind::Hex, big_r);
    let mut ex = Explorer::new(&ball, p);
    let mut hits = 0u64;
    for _ in 0..trials {
        ex.reset();
        let hit = match kind {
            ArmKind::One => ex.one_arm(r, big_r, rng),
            ArmKind::Four => ex.four_arm(r, big_r, rng),
        };
        hits += hit as u64;
    }
    let e = Estimate::binomial(hits, trials);
    Ok(done(e.value, e.se))
}
