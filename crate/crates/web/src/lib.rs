//! Browser front end. A [`Demo`] holds one configuration on the hexagonal
//! ball B_R and exposes three operations to the page: sample a fresh
//! configuration at density p, mark the pivotal cells of 0 ↔ R, and run
//! the dynamics for a while.

use std::sync::Arc;

use perclab::dynamics::{simulate, OriginCluster};
use perclab::lattice::{Ball, LatticeKind};
use perclab::rng::{stream, Rng};
use perclab::static_perc::{Configuration, Crossing};
use wasm_bindgen::prelude::*;

/// Largest radius the page offers; B_40 has 4921 cells.
pub const MAX_RADIUS: u32 = 40;

#[wasm_bindgen]
pub struct Demo {
    ball: Arc<Ball>,
    cfg: Configuration,
    rng: Rng,
    time: f64,
}

#[wasm_bindgen]
impl Demo {
    /// A closed B_radius with its own random stream.
    #[wasm_bindgen(constructor)]
    pub fn new(radius: u32, seed: u64) -> Result<Demo, JsValue> {
        if radius == 0 || radius > MAX_RADIUS {
            return Err(JsValue::from_str(&format!("radius must lie in 1..={MAX_RADIUS}")));
        }
        let ball = Ball::new(LatticeKind::Hex, radius);
        let cfg = Configuration::closed(&ball);
        Ok(Demo { ball, cfg, rng: stream(seed, "web-demo", 0), time: 0.0 })
    }

    pub fn radius(&self) -> u32 {
        self.ball.radius()
    }

    /// Index of the origin cell in ball order.
    pub fn origin(&self) -> u32 {
        self.ball.origin()
    }

    pub fn cells(&self) -> usize {
        self.ball.len()
    }

    /// Cell centres as x0, y0, x1, y1, ...
    pub fn centers(&self) -> Vec<f64> {
        self.ball.cells().iter().flat_map(|c| {
            let (x, y) = c.center();
            [x, y]
        }).collect()
    }

    /// Fresh configuration with each cell open with probability p.
    pub fn sample(&mut self, p: f64) -> Result<(), JsValue> {
        if !(0.0..=1.0).contains(&p) {
            return Err(JsValue::from_str("p must lie in [0, 1]"));
        }
        self.cfg = Configuration::sample(&self.ball, p, &mut self.rng);
        self.time = 0.0;
        Ok(())
    }

    /// Runs the rate-one dynamics at p = 1/2 for `dt` time units.
    pub fn evolve(&mut self, dt: f64) -> Result<(), JsValue> {
        let traj = simulate(self.cfg.clone(), dt, &mut self.rng).map_err(|e| JsValue::from_str(&e.to_string()))?;
        self.cfg = traj.final_state();
        self.time += dt;
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// 1 for open cells, 0 for closed, in ball order.
    pub fn states(&self) -> Vec<u8> {
        (0..self.ball.len() as u32).map(|i| self.cfg.get(i) as u8).collect()
    }

    /// Indices of the origin's open cluster.
    pub fn cluster(&self) -> Vec<u32> {
        OriginCluster::new(&self.cfg, self.ball.radius()).members().to_vec()
    }

    /// Whether 0 ↔ R.
    pub fn connected(&self) -> bool {
        Crossing::zero_to(&self.ball, self.ball.radius()).occurs(&self.cfg)
    }

    /// Indices of the cells pivotal for 0 ↔ R. These are open cells of the
    /// origin's cluster when 0 ↔ R holds and closed cells otherwise.
    pub fn pivotals(&self) -> Vec<u32> {
        Crossing::zero_to(&self.ball, self.ball.radius()).pivotals(&self.cfg)
    }
}
