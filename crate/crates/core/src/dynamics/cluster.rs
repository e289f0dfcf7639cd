use std::sync::Arc;

use crate::lattice::{Ball, NONE};
use crate::static_perc::Configuration;

/// The open cluster of the origin inside B_limit, maintained under single
/// cell flips: an opening next to the cluster grows it in place, a closing
/// inside it triggers a rebuild from the origin.
#[derive(Clone, Debug)]
pub struct OriginCluster {
    ball: Arc<Ball>,
    limit: u32,
    mark: Vec<u32>,
    stamp: u32,
    members: Vec<u32>,
    radius: u32,
    stack: Vec<u32>,
}

impl OriginCluster {
    pub fn new(cfg: &Configuration, limit: u32) -> OriginCluster {
        let ball = cfg.ball().clone();
        assert!(limit <= ball.radius());
        let mut c = OriginCluster {
            mark: vec![0; ball.len()],
            ball,
            limit,
            stamp: 0,
            members: Vec::new(),
            radius: 0,
            stack: Vec::new(),
        };
        c.rebuild(cfg);
        c
    }

    pub fn rebuild(&mut self, cfg: &Configuration) {
        self.stamp += 1;
        self.members.clear();
        self.radius = 0;
        let o = self.ball.origin();
        if cfg.get(o) {
            self.grow(cfg, o);
        }
    }

    fn grow(&mut self, cfg: &Configuration, from: u32) {
        let mut stack = std::mem::take(&mut self.stack);
        self.mark[from as usize] = self.stamp;
        self.members.push(from);
        self.radius = self.radius.max(self.ball.dist(from));
        stack.push(from);
        while let Some(v) = stack.pop() {
            for &w in self.ball.nbrs(v) {
                if w == NONE || self.mark[w as usize] == self.stamp || !cfg.get(w) || self.ball.dist(w) > self.limit {
                    continue;
                }
                self.mark[w as usize] = self.stamp;
                self.members.push(w);
                self.radius = self.radius.max(self.ball.dist(w));
                stack.push(w);
            }
        }
        self.stack = stack;
    }

    /// Lowers the exploration limit to `limit`, which must not be below the
    /// current radius, so the cluster stays valid without a rebuild.
    pub fn shrink_limit(&mut self, limit: u32) {
        assert!(limit >= self.radius && limit <= self.limit);
        self.limit = limit;
    }

    pub fn limit(&self) -> u32 {
        self.limit
    }

    pub fn contains(&self, i: u32) -> bool {
        self.mark[i as usize] == self.stamp
    }

    /// Updates after `cell` has been set to its new state in `cfg`.
    pub fn update(&mut self, cfg: &Configuration, cell: u32) {
        if self.ball.dist(cell) > self.limit {
            return;
        }
        if cfg.get(cell) {
            if self.contains(cell) {
                return;
            }
            let o = self.ball.origin();
            let touches = cell == o || self.ball.nbrs(cell).iter().any(|&w| w != NONE && self.contains(w));
            if touches && cfg.get(o) {
                self.grow(cfg, cell);
            }
        } else if self.contains(cell) {
            self.rebuild(cfg);
        }
    }

    /// Number of cells in the cluster (0 when the origin is closed).
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    /// Largest distance from the origin reached by the cluster; 0 when empty.
    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Whether 0 ↔ r inside B_limit, for r ≤ limit.
    pub fn reaches(&self, r: u32) -> bool {
        !self.members.is_empty() && self.radius >= r
    }
}
