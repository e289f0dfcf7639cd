use std::collections::BTreeSet;
use std::sync::Arc;

use crate::lattice::{Ball, Cell, NONE};
use crate::static_perc::Configuration;
use crate::union_find::UnionFind;

/// An open-path event inside a ball: some open path through `allowed` cells
/// meets both a source cell and a target cell.
#[derive(Clone, Debug)]
pub struct Crossing {
    ball: Arc<Ball>,
    allowed: Vec<bool>,
    is_source: Vec<bool>,
    is_target: Vec<bool>,
    sources: Vec<u32>,
    targets: Vec<u32>,
    cells: Vec<u32>,
}

impl Crossing {
    pub fn new(ball: &Arc<Ball>, allowed: &[u32], sources: &[u32], targets: &[u32]) -> Crossing {
        let n = ball.len();
        let mut mask = vec![false; n];
        for &i in allowed {
            mask[i as usize] = true;
        }
        let mut cells: Vec<u32> = allowed.to_vec();
        cells.sort_unstable();
        cells.dedup();
        let pick = |list: &[u32]| {
            let mut v: Vec<u32> = list.iter().copied().filter(|&i| mask[i as usize]).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let sources = pick(sources);
        let targets = pick(targets);
        let mut is_source = vec![false; n];
        let mut is_target = vec![false; n];
        sources.iter().for_each(|&i| is_source[i as usize] = true);
        targets.iter().for_each(|&i| is_target[i as usize] = true);
        Crossing { ball: ball.clone(), allowed: mask, is_source, is_target, sources, targets, cells }
    }

    /// {0 ↔ R}: open path inside B_R from the origin to the sphere {d = R}.
    pub fn zero_to(ball: &Arc<Ball>, r: u32) -> Crossing {
        assert!(r <= ball.radius(), "B_{r} exceeds the configuration ball");
        Crossing::new(ball, &ball.sub_ball(r), &[ball.origin()], ball.sphere(r))
    }

    /// {r ↔ R}: open path within r < d ≤ R from the sphere r+1 to the sphere R.
    pub fn annulus(ball: &Arc<Ball>, r: u32, big_r: u32) -> Crossing {
        assert!(r < big_r && big_r <= ball.radius());
        let allowed: Vec<u32> = (0..ball.len() as u32).filter(|&i| ball.dist(i) > r && ball.dist(i) <= big_r).collect();
        Crossing::new(ball, &allowed, ball.sphere(r + 1), ball.sphere(big_r))
    }

    pub fn ball(&self) -> &Arc<Ball> {
        &self.ball
    }

    /// Allowed cells, ascending.
    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn is_allowed(&self, i: u32) -> bool {
        self.allowed[i as usize]
    }

    #[inline]
    fn passable(&self, cfg: &Configuration, w: u32) -> bool {
        w != NONE && self.allowed[w as usize] && cfg.get(w)
    }

    /// Cells reached from the open sources (or targets when `from_targets`).
    fn reach(&self, cfg: &Configuration, from_targets: bool) -> Vec<bool> {
        let mut seen = vec![false; self.ball.len()];
        let start = if from_targets { &self.targets } else { &self.sources };
        let mut stack: Vec<u32> = Vec::new();
        for &s in start {
            if cfg.get(s) && !seen[s as usize] {
                seen[s as usize] = true;
                stack.push(s);
            }
        }
        while let Some(v) = stack.pop() {
            for &w in self.ball.nbrs(v) {
                if self.passable(cfg, w) && !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Event indicator by depth-first search from the sources.
    pub fn occurs(&self, cfg: &Configuration) -> bool {
        let mut seen = vec![false; self.ball.len()];
        let mut stack: Vec<u32> = Vec::new();
        for &s in &self.sources {
            if cfg.get(s) {
                if self.is_target[s as usize] {
                    return true;
                }
                seen[s as usize] = true;
                stack.push(s);
            }
        }
        while let Some(v) = stack.pop() {
            for &w in self.ball.nbrs(v) {
                if self.passable(cfg, w) && !seen[w as usize] {
                    if self.is_target[w as usize] {
                        return true;
                    }
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        false
    }

    /// Cells on a shortest open source-target path, or None when the event fails.
    /// Every pivotal of an occurring event lies on every such path, so this
    /// bounds the pivotal count from above.
    pub fn shortest_path_len(&self, cfg: &Configuration) -> Option<u32> {
        let mut depth = vec![0u32; self.ball.len()];
        let mut queue = std::collections::VecDeque::new();
        for &s in &self.sources {
            if cfg.get(s) && depth[s as usize] == 0 {
                if self.is_target[s as usize] {
                    return Some(1);
                }
                depth[s as usize] = 1;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = depth[v as usize];
            for &w in self.ball.nbrs(v) {
                if self.passable(cfg, w) && depth[w as usize] == 0 {
                    if self.is_target[w as usize] {
                        return Some(d + 1);
                    }
                    depth[w as usize] = d + 1;
                    queue.push_back(w);
                }
            }
        }
        None
    }

    /// Event indicator by union-find over the open allowed cells.
    pub fn occurs_uf(&self, cfg: &Configuration) -> bool {
        let mut uf = UnionFind::new(self.ball.len());
        for &v in &self.cells {
            if !cfg.get(v) {
                continue;
            }
            for &w in self.ball.nbrs(v) {
                if w > v && self.passable(cfg, w) {
                    uf.union(v, w);
                }
            }
        }
        let roots: BTreeSet<u32> = self.sources.iter().filter(|&&s| cfg.get(s)).map(|&s| uf.find(s)).collect();
        self.targets.iter().any(|&t| cfg.get(t) && roots.contains(&uf.find(t)))
    }

    /// Pivotal cells, ascending: cells whose flip changes the event.
    pub fn pivotals(&self, cfg: &Configuration) -> Vec<u32> {
        match self.articulations(cfg) {
            Some(p) => p,
            None => self.closed_bridges(cfg),
        }
    }

    /// Flip-and-retest reference for [`Crossing::pivotals`].
    pub fn pivotals_naive(&self, cfg: &Configuration) -> Vec<u32> {
        let base = self.occurs(cfg);
        let mut work = cfg.clone();
        let mut out = Vec::new();
        for &v in &self.cells {
            work.flip(v);
            if self.occurs(&work) != base {
                out.push(v);
            }
            work.flip(v);
        }
        out
    }

    /// When the event holds: open cells separating a virtual source (joined to
    /// every open source) from a virtual sink (joined to every open target),
    /// found by a lowpoint depth-first search. None when the event fails.
    fn articulations(&self, cfg: &Configuration) -> Option<Vec<u32>> {
        let n = self.ball.len();
        let (s, t) = (n as u32, n as u32 + 1);
        let mut disc = vec![0u32; n + 2];
        let mut low = vec![0u32; n + 2];
        let mut parent = vec![NONE; n + 2];
        let mut pos = vec![0u32; n + 2];
        let mut stack = vec![s];
        let mut clock = 1;
        disc[s as usize] = 1;
        low[s as usize] = 1;
        while let Some(&u) = stack.last() {
            let ui = u as usize;
            let next = loop {
                let k = pos[ui] as usize;
                pos[ui] += 1;
                if u == s {
                    match self.sources.get(k) {
                        Some(&w) if cfg.get(w) => break Some(w),
                        Some(_) => continue,
                        None => break None,
                    }
                } else if u == t {
                    match self.targets.get(k) {
                        Some(&w) if cfg.get(w) => break Some(w),
                        Some(_) => continue,
                        None => break None,
                    }
                } else {
                    match k {
                        0..=5 => {
                            let w = self.ball.nbrs(u)[k];
                            if self.passable(cfg, w) {
                                break Some(w);
                            }
                        }
                        6 if self.is_source[ui] => break Some(s),
                        7 if self.is_target[ui] => break Some(t),
                        6 | 7 => {}
                        _ => break None,
                    }
                }
            };
            match next {
                Some(w) => {
                    let wi = w as usize;
                    if disc[wi] == 0 {
                        clock += 1;
                        disc[wi] = clock;
                        low[wi] = clock;
                        parent[wi] = u;
                        stack.push(w);
                    } else if w != parent[ui] {
                        low[ui] = low[ui].min(disc[wi]);
                    }
                }
                None => {
                    stack.pop();
                    if let Some(&p) = stack.last() {
                        low[p as usize] = low[p as usize].min(low[ui]);
                    }
                }
            }
        }
        if disc[t as usize] == 0 {
            return None;
        }
        let mut out = Vec::new();
        let mut child = t;
        let mut v = parent[t as usize];
        while v != s {
            if low[child as usize] >= disc[v as usize] {
                out.push(v);
            }
            child = v;
            v = parent[v as usize];
        }
        out.sort_unstable();
        Some(out)
    }

    /// When the event fails: closed cells touching both the source side and
    /// the target side.
    fn closed_bridges(&self, cfg: &Configuration) -> Vec<u32> {
        let a = self.reach(cfg, false);
        let b = self.reach(cfg, true);
        let mut out = Vec::new();
        for &v in &self.cells {
            if cfg.get(v) {
                continue;
            }
            let vi = v as usize;
            let mut near_a = self.is_source[vi];
            let mut near_b = self.is_target[vi];
            for &w in self.ball.nbrs(v) {
                if w != NONE && self.allowed[w as usize] {
                    near_a |= a[w as usize];
                    near_b |= b[w as usize];
                }
            }
            if near_a && near_b {
                out.push(v);
            }
        }
        out
    }
}

/// Whether an open path in the configuration meets both cell sets.
pub fn connected(cfg: &Configuration, a: &[Cell], b: &[Cell]) -> bool {
    let ball = cfg.ball();
    let all: Vec<u32> = (0..ball.len() as u32).collect();
    let idx = |s: &[Cell]| s.iter().filter_map(|&c| ball.index(c)).collect::<Vec<u32>>();
    Crossing::new(ball, &all, &idx(a), &idx(b)).occurs_uf(cfg)
}

/// {0 ↔ R} inside the configuration's ball.
pub fn zero_to_r(cfg: &Configuration, r: u32) -> bool {
    Crossing::zero_to(cfg.ball(), r).occurs(cfg)
}

/// Piv_{0↔R}(cfg) as cells.
pub fn pivotals(cfg: &Configuration, r: u32) -> BTreeSet<Cell> {
    let x = Crossing::zero_to(cfg.ball(), r);
    x.pivotals(cfg).into_iter().map(|i| cfg.ball().cell(i)).collect()
}
