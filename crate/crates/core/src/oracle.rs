//! Slow reference implementations used to certify the fast paths: hash-set
//! depth-first search on raw cell coordinates, flip-and-retest pivotals and
//! exhaustive circuit enumeration.

use std::collections::{BTreeSet, HashSet};
use std::sync::OnceLock;

use crate::lattice::{self, neighbors, norm, validate_circuit, Ball, Cell, Circuit, LatticeKind};
use crate::static_perc::Configuration;

/// Open cells of a configuration as a coordinate set.
pub fn open_cells(cfg: &Configuration) -> HashSet<Cell> {
    cfg.ball().cells().iter().enumerate().filter(|(i, _)| cfg.get(*i as u32)).map(|(_, &c)| c).collect()
}

/// Whether an open path inside `allowed` meets `a` and `b`, by recursive DFS.
pub fn dfs_connected(open: &HashSet<Cell>, allowed: &dyn Fn(Cell) -> bool, a: &[Cell], b: &[Cell]) -> bool {
    fn visit(c: Cell, open: &HashSet<Cell>, allowed: &dyn Fn(Cell) -> bool, seen: &mut HashSet<Cell>) {
        if !seen.insert(c) {
            return;
        }
        for n in neighbors(c) {
            if open.contains(&n) && allowed(n) {
                visit(n, open, allowed, seen);
            }
        }
    }
    let targets: HashSet<Cell> = b.iter().copied().collect();
    let mut seen = HashSet::new();
    for &s in a {
        if open.contains(&s) && allowed(s) {
            visit(s, open, allowed, &mut seen);
        }
    }
    seen.iter().any(|c| targets.contains(c))
}

/// Reference for {0 ↔ R}.
pub fn zero_to_r(cfg: &Configuration, r: u32) -> bool {
    let kind = cfg.kind();
    let open = open_cells(cfg);
    let sphere: Vec<Cell> = cfg.ball().cells().iter().copied().filter(|&c| norm(c) == r).collect();
    dfs_connected(&open, &|c| norm(c) <= r, &[Cell::origin(kind)], &sphere)
}

/// Flip-and-retest pivotals for a path event between `a` and `b` in `allowed`.
pub fn pivotals(cfg: &Configuration, allowed: &dyn Fn(Cell) -> bool, a: &[Cell], b: &[Cell]) -> BTreeSet<Cell> {
    let mut open = open_cells(cfg);
    let base = dfs_connected(&open, allowed, a, b);
    let mut out = BTreeSet::new();
    for &c in cfg.ball().cells() {
        if !allowed(c) {
            continue;
        }
        let was = open.contains(&c);
        if was {
            open.remove(&c);
        } else {
            open.insert(c);
        }
        if dfs_connected(&open, allowed, a, b) != base {
            out.insert(c);
        }
        if was {
            open.insert(c);
        } else {
            open.remove(&c);
        }
    }
    out
}

/// Reference Piv_{0↔R}.
pub fn pivotals_zero_to_r(cfg: &Configuration, r: u32) -> BTreeSet<Cell> {
    let sphere: Vec<Cell> = cfg.ball().cells().iter().copied().filter(|&c| norm(c) == r).collect();
    pivotals(cfg, &|c| norm(c) <= r, &[Cell::origin(cfg.kind())], &sphere)
}

/// Every induced cycle of length ≥ 4 among `cells`, each once, as ordered paths.
pub fn induced_cycles(cells: &BTreeSet<Cell>) -> Vec<Vec<Cell>> {
    let list: Vec<Cell> = cells.iter().copied().collect();
    let adj = |a: Cell, b: Cell| lattice::distance(a, b) == 1;
    let mut out = Vec::new();
    let mut seen: HashSet<Vec<Cell>> = HashSet::new();
    fn extend(
        path: &mut Vec<Cell>,
        list: &[Cell],
        start_idx: usize,
        adj: &dyn Fn(Cell, Cell) -> bool,
        out: &mut Vec<Vec<Cell>>,
        seen: &mut HashSet<Vec<Cell>>,
    ) {
        let last = *path.last().unwrap();
        let start = path[0];
        for &w in &list[start_idx + 1..] {
            if !adj(last, w) || path.contains(&w) {
                continue;
            }
            if path.len() > 2 && path[1..path.len() - 1].iter().any(|&p| adj(p, w)) {
                continue;
            }
            if path.len() > 1 && adj(start, w) {
                if path.len() >= 3 {
                    let mut cyc = path.clone();
                    cyc.push(w);
                    let mut key = cyc.clone();
                    key.sort();
                    if seen.insert(key) {
                        out.push(cyc);
                    }
                }
                continue;
            }
            path.push(w);
            extend(path, list, start_idx, adj, out, seen);
            path.pop();
        }
    }
    for (i, &s) in list.iter().enumerate() {
        let mut path = vec![s];
        extend(&mut path, &list, i, &adj, &mut out, &mut seen);
    }
    out
}

/// Γ_r by exhaustive search: among all open induced cycles outside B_r that
/// validate as circuits enclosing B_r, the one with the smallest interior.
pub fn innermost_circuit(cfg: &Configuration, r: u32) -> Option<Circuit> {
    let candidates: BTreeSet<Cell> = open_cells(cfg).into_iter().filter(|&c| norm(c) > r).collect();
    let mut best: Option<Circuit> = None;
    for cyc in induced_cycles(&candidates) {
        if let Ok(c) = validate_circuit(&cyc) {
            if c.encloses_ball(r) && best.as_ref().is_none_or(|b| c.interior().len() < b.interior().len()) {
                best = Some(c);
            }
        }
    }
    best
}

/// All circuits inside B_2 \\ {0} as (cell mask, interior mask) over the
/// cells of B_2, found by checking every subset.
pub fn b2_circuits() -> &'static [(u64, u64)] {
    static TABLE: OnceLock<Vec<(u64, u64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let ball = Ball::new(LatticeKind::Hex, 2);
        let n = ball.len();
        let origin = ball.origin() as usize;
        let others: Vec<usize> = (0..n).filter(|&i| i != origin).collect();
        let nb: Vec<u64> = (0..n as u32)
            .map(|i| ball.nbrs(i).iter().filter(|&&w| w != lattice::NONE).fold(0u64, |m, &w| m | 1 << w))
            .collect();
        let mut out = Vec::new();
        for sub in 0u64..1 << others.len() {
            if sub.count_ones() < 4 {
                continue;
            }
            let mut mask = 0u64;
            for (k, &i) in others.iter().enumerate() {
                if sub >> k & 1 == 1 {
                    mask |= 1 << i;
                }
            }
            let degree_two = (0..n).filter(|&i| mask >> i & 1 == 1).all(|i| (nb[i] & mask).count_ones() == 2);
            if !degree_two {
                continue;
            }
            let cells: BTreeSet<Cell> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ball.cell(i as u32)).collect();
            let Some(ordered) = lattice::order_cycle(&cells) else { continue };
            if let Ok(c) = validate_circuit(&ordered) {
                let interior = c.interior().iter().fold(0u64, |m, &x| m | 1 << ball.index(x).unwrap());
                out.push((mask, interior));
            }
        }
        out
    })
}

/// Γ_r of a B_2 configuration (bit mask over B_2) by table lookup, as a cell set.
pub fn b2_innermost_circuit(open: u64, r: u32) -> Option<BTreeSet<Cell>> {
    let ball = Ball::new(LatticeKind::Hex, 2);
    let inner = ball.sub_ball(r).iter().fold(0u64, |m, &i| m | 1 << i);
    let best = b2_circuits()
        .iter()
        .filter(|&&(m, int)| m & open == m && int & inner == inner)
        .min_by_key(|&&(_, int)| int.count_ones())?;
    Some((0..ball.len()).filter(|&i| best.0 >> i & 1 == 1).map(|i| ball.cell(i as u32)).collect())
}

/// Outcome of an oracle-equality sweep.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleReport {
    pub checked: u64,
    pub mismatches: u64,
    pub first: Option<String>,
}

impl OracleReport {
    fn merge(mut self, other: OracleReport) -> OracleReport {
        self.checked += other.checked;
        self.mismatches += other.mismatches;
        if self.first.is_none() {
            self.first = other.first;
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.checked > 0
    }
}

/// Compares every fast static operation with its reference on one
/// configuration; `circuit` says how Γ_r is certified.
fn check_one(cfg: &Configuration, circuit: &dyn Fn(&Configuration, u32) -> Option<BTreeSet<Cell>>) -> Option<String> {
    use crate::static_perc::{self as sp, Crossing};
    let ball = cfg.ball();
    let big_r = ball.radius();
    let open = open_cells(cfg);
    let sphere: Vec<Cell> = ball.sphere(big_r).iter().map(|&i| ball.cell(i)).collect();
    let origin = [Cell::origin(cfg.kind())];
    let mask = cfg.words()[0];
    let everywhere = |_: Cell| true;
    if sp::connected(cfg, &origin, &sphere) != dfs_connected(&open, &everywhere, &origin, &sphere) {
        return Some(format!("connected(0, sphere) differs on {mask:#x}"));
    }
    let (left, right): (Vec<Cell>, Vec<Cell>) = sphere.iter().partition(|&&c| lattice::arc_of(c) == lattice::Arc4::Left);
    if sp::connected(cfg, &left, &right) != dfs_connected(&open, &everywhere, &left, &right) {
        return Some(format!("connected(left, rest) differs on {mask:#x}"));
    }
    for r in 1..=big_r {
        if sp::zero_to_r(cfg, r) != zero_to_r(cfg, r) {
            return Some(format!("zero_to_r({r}) differs on {mask:#x}"));
        }
    }
    if sp::pivotals(cfg, big_r) != pivotals_zero_to_r(cfg, big_r) {
        return Some(format!("pivotals differ on {mask:#x}"));
    }
    let ann = Crossing::annulus(ball, 1, big_r);
    let fast: BTreeSet<Cell> = ann.pivotals(cfg).into_iter().map(|i| ball.cell(i)).collect();
    let inner: Vec<Cell> = ball.sphere(2).iter().map(|&i| ball.cell(i)).collect();
    let slow = pivotals(cfg, &|c| norm(c) > 1 && norm(c) <= big_r, &inner, &sphere);
    if fast != slow {
        return Some(format!("annulus pivotals differ on {mask:#x}"));
    }
    for r in 0..big_r {
        let fast = sp::innermost_circuit(cfg, r).map(|c| c.cells().iter().copied().collect::<BTreeSet<Cell>>());
        if fast != circuit(cfg, r) {
            return Some(format!("innermost_circuit({r}) differs on {mask:#x}"));
        }
    }
    None
}

fn report(checked: u64, failure: Option<String>) -> OracleReport {
    OracleReport { checked, mismatches: failure.is_some() as u64, first: failure }
}

/// Every configuration of the hexagonal B_2 against the references, with
/// Γ_r certified by the exhaustive circuit table.
pub fn check_b2_exhaustive() -> OracleReport {
    use rayon::prelude::*;
    let ball = Ball::new(LatticeKind::Hex, 2);
    b2_circuits();
    let table = |cfg: &Configuration, r: u32| b2_innermost_circuit(cfg.mask(), r);
    (0u64..1 << ball.len())
        .into_par_iter()
        .map(|mask| report(1, check_one(&Configuration::from_mask(&ball, mask), &table)))
        .reduce(OracleReport::default, OracleReport::merge)
}

/// `n` uniform configurations of B_radius (hex) against the references, with
/// Γ_r certified by induced-cycle enumeration.
pub fn check_random(radius: u32, n: u64, seed: u64) -> OracleReport {
    use rayon::prelude::*;
    let ball = Ball::new(LatticeKind::Hex, radius);
    let brute = |cfg: &Configuration, r: u32| innermost_circuit(cfg, r).map(|c| c.cells().iter().copied().collect());
    (0..n)
        .into_par_iter()
        .map(|t| {
            let mut rng = crate::rng::stream(seed, "oracle/random", t);
            let cfg = Configuration::sample(&ball, 0.5, &mut rng);
            report(1, check_one(&cfg, &brute))
        })
        .reduce(OracleReport::default, OracleReport::merge)
}
