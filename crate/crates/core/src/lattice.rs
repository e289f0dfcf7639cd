//! Lattice geometry: hexagon cells of the triangular site lattice (axial
//! coordinates) and bonds of Z², balls, annuli, boundaries and circuits.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Marker for a missing neighbour in a [`Ball`] adjacency table.
pub const NONE: u32 = u32::MAX;

/// Axial offsets of the six hexagon neighbours, in cyclic order: consecutive
/// entries are themselves adjacent.
pub const HEX_DIRS: [(i32, i32); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LatticeKind {
    Hex,
    Z2Bond,
}

impl LatticeKind {
    pub fn tag(self) -> u8 {
        match self {
            LatticeKind::Hex => 0,
            LatticeKind::Z2Bond => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(LatticeKind::Hex),
            1 => Some(LatticeKind::Z2Bond),
            _ => None,
        }
    }
}

/// A percolation cell. Bonds are stored by their lower-left endpoint and
/// orientation, which is the canonical form of the endpoint pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    Hex { q: i32, r: i32 },
    Bond { x: i32, y: i32, horizontal: bool },
}

impl Ord for Cell {
    /// Row-major order: by row, then column (then orientation for bonds).
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Cell {
    pub const fn hex(q: i32, r: i32) -> Cell {
        Cell::Hex { q, r }
    }

    /// The bond between two lattice vertices, if they are nearest neighbours.
    pub fn bond(a: (i32, i32), b: (i32, i32)) -> Option<Cell> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        match (hi.0 - lo.0, hi.1 - lo.1) {
            (1, 0) => Some(Cell::Bond { x: lo.0, y: lo.1, horizontal: true }),
            (0, 1) => Some(Cell::Bond { x: lo.0, y: lo.1, horizontal: false }),
            _ => None,
        }
    }

    /// The distinguished cell 0 of each lattice. For Z² it is the bond (0,0)-(1,0).
    pub fn origin(kind: LatticeKind) -> Cell {
        match kind {
            LatticeKind::Hex => Cell::Hex { q: 0, r: 0 },
            LatticeKind::Z2Bond => Cell::Bond { x: 0, y: 0, horizontal: true },
        }
    }

    pub fn kind(&self) -> LatticeKind {
        match self {
            Cell::Hex { .. } => LatticeKind::Hex,
            Cell::Bond { .. } => LatticeKind::Z2Bond,
        }
    }

    fn sort_key(&self) -> (u8, i32, i32, u8) {
        match *self {
            Cell::Hex { q, r } => (0, r, q, 0),
            Cell::Bond { x, y, horizontal } => (1, y, x, horizontal as u8),
        }
    }

    pub fn endpoints(&self) -> Option<((i32, i32), (i32, i32))> {
        match *self {
            Cell::Bond { x, y, horizontal: true } => Some(((x, y), (x + 1, y))),
            Cell::Bond { x, y, horizontal: false } => Some(((x, y), (x, y + 1))),
            Cell::Hex { .. } => None,
        }
    }

    /// Euclidean centre, used only for angular sectors and rendering.
    pub fn center(&self) -> (f64, f64) {
        match *self {
            Cell::Hex { q, r } => (q as f64 + r as f64 / 2.0, r as f64 * 3f64.sqrt() / 2.0),
            Cell::Bond { x, y, horizontal } => {
                if horizontal {
                    (x as f64 + 0.5, y as f64)
                } else {
                    (x as f64, y as f64 + 0.5)
                }
            }
        }
    }
}

fn bonds_at(v: (i32, i32)) -> [Cell; 4] {
    let (x, y) = v;
    [
        Cell::Bond { x, y, horizontal: true },
        Cell::Bond { x: x - 1, y, horizontal: true },
        Cell::Bond { x, y, horizontal: false },
        Cell::Bond { x, y: y - 1, horizontal: false },
    ]
}

/// The six neighbours of a cell in a fixed order.
pub fn neighbors(c: Cell) -> [Cell; 6] {
    match c {
        Cell::Hex { q, r } => HEX_DIRS.map(|(dq, dr)| Cell::Hex { q: q + dq, r: r + dr }),
        Cell::Bond { .. } => {
            let (a, b) = c.endpoints().expect("bond");
            let mut out = [c; 6];
            let mut k = 0;
            for v in [a, b] {
                for e in bonds_at(v) {
                    if e != c {
                        out[k] = e;
                        k += 1;
                    }
                }
            }
            debug_assert_eq!(k, 6);
            out
        }
    }
}

fn hex_norm(q: i32, r: i32) -> u32 {
    ((q.unsigned_abs() + r.unsigned_abs() + (q + r).unsigned_abs()) / 2) as u32
}

/// Graph distance between two cells of the same lattice.
pub fn distance(a: Cell, b: Cell) -> u32 {
    match (a, b) {
        (Cell::Hex { q: q1, r: r1 }, Cell::Hex { q: q2, r: r2 }) => hex_norm(q1 - q2, r1 - r2),
        (Cell::Bond { .. }, Cell::Bond { .. }) => {
            if a == b {
                return 0;
            }
            let (a0, a1) = a.endpoints().unwrap();
            let (b0, b1) = b.endpoints().unwrap();
            let mut best = u32::MAX;
            for u in [a0, a1] {
                for v in [b0, b1] {
                    best = best.min((u.0 - v.0).unsigned_abs() + (u.1 - v.1).unsigned_abs());
                }
            }
            best + 1
        }
        _ => panic!("distance between cells of different lattices"),
    }
}

pub fn norm(c: Cell) -> u32 {
    distance(c, Cell::origin(c.kind()))
}

/// A finite set of cells.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Ball { kind: LatticeKind, radius: u32 },
    /// A_{inner,outer} = B_outer \ B_inner.
    Annulus { kind: LatticeKind, inner: u32, outer: u32 },
    Cells { kind: LatticeKind, cells: BTreeSet<Cell> },
}

impl Region {
    pub fn ball(kind: LatticeKind, radius: u32) -> Region {
        Region::Ball { kind, radius }
    }

    pub fn annulus(kind: LatticeKind, inner: u32, outer: u32) -> Result<Region> {
        if inner >= outer {
            return Err(Error::InvalidRegion(format!("annulus needs {inner} < {outer}")));
        }
        Ok(Region::Annulus { kind, inner, outer })
    }

    pub fn kind(&self) -> LatticeKind {
        match self {
            Region::Ball { kind, .. } | Region::Annulus { kind, .. } | Region::Cells { kind, .. } => *kind,
        }
    }

    pub fn contains(&self, c: Cell) -> bool {
        match self {
            Region::Ball { kind, radius } => c.kind() == *kind && norm(c) <= *radius,
            Region::Annulus { kind, inner, outer } => {
                if c.kind() != *kind {
                    return false;
                }
                let d = norm(c);
                d > *inner && d <= *outer
            }
            Region::Cells { cells, .. } => cells.contains(&c),
        }
    }

    /// Outermost distance from 0 over the region, if any.
    fn extent(&self) -> Option<u32> {
        match self {
            Region::Ball { radius, .. } => Some(*radius),
            Region::Annulus { outer, .. } => Some(*outer),
            Region::Cells { cells, .. } => cells.iter().map(|&c| norm(c)).max(),
        }
    }

    /// Cells of the region in row-major order.
    pub fn cells(&self) -> Vec<Cell> {
        match self {
            Region::Cells { cells, .. } => cells.iter().copied().collect(),
            _ => {
                let ball = Ball::new(self.kind(), self.extent().unwrap_or(0));
                ball.cells().iter().copied().filter(|&c| self.contains(c)).collect()
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Region::Ball { kind: LatticeKind::Hex, radius } => hex_ball_size(*radius),
            Region::Annulus { kind: LatticeKind::Hex, inner, outer } => {
                hex_ball_size(*outer) - hex_ball_size(*inner)
            }
            Region::Cells { cells, .. } => cells.len(),
            _ => self.cells().len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// |B_R| on the hexagonal lattice.
pub fn hex_ball_size(radius: u32) -> usize {
    let r = radius as usize;
    1 + 3 * r * (r + 1)
}

/// ∂A: cells outside A at distance one from A.
pub fn outer_boundary(region: &Region) -> BTreeSet<Cell> {
    let cells = region.cells();
    let mut out = BTreeSet::new();
    for &c in &cells {
        for n in neighbors(c) {
            if !region.contains(n) {
                out.insert(n);
            }
        }
    }
    out
}

#[derive(Debug)]
enum Lookup {
    Hex { row_start: Vec<u32> },
    Map(HashMap<Cell, u32>),
}

/// A materialized ball B_R with a dense cell index, a six-slot neighbour
/// table and the spheres {d = k}. Cell indices follow row-major order.
#[derive(Debug)]
pub struct Ball {
    kind: LatticeKind,
    radius: u32,
    cells: Vec<Cell>,
    dist: Vec<u32>,
    nbrs: Vec<u32>,
    spheres: Vec<Vec<u32>>,
    origin: u32,
    lookup: Lookup,
}

impl Ball {
    pub fn new(kind: LatticeKind, radius: u32) -> Arc<Ball> {
        let (cells, lookup) = match kind {
            LatticeKind::Hex => {
                let rr = radius as i32;
                let mut cells = Vec::with_capacity(hex_ball_size(radius));
                let mut row_start = Vec::with_capacity(2 * radius as usize + 1);
                for r in -rr..=rr {
                    row_start.push(cells.len() as u32);
                    let qmin = (-rr).max(-rr - r);
                    let qmax = rr.min(rr - r);
                    for q in qmin..=qmax {
                        cells.push(Cell::Hex { q, r });
                    }
                }
                (cells, Lookup::Hex { row_start })
            }
            LatticeKind::Z2Bond => {
                let origin = Cell::origin(kind);
                let mut seen: HashMap<Cell, u32> = HashMap::new();
                seen.insert(origin, 0);
                let mut queue = VecDeque::from([origin]);
                while let Some(c) = queue.pop_front() {
                    let d = seen[&c];
                    if d == radius {
                        continue;
                    }
                    for n in neighbors(c) {
                        if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(n) {
                            e.insert(d + 1);
                            queue.push_back(n);
                        }
                    }
                }
                let mut cells: Vec<Cell> = seen.into_keys().collect();
                cells.sort();
                let map = cells.iter().enumerate().map(|(i, &c)| (c, i as u32)).collect();
                (cells, Lookup::Map(map))
            }
        };
        let mut ball = Ball {
            kind,
            radius,
            dist: cells.iter().map(|&c| norm(c)).collect(),
            nbrs: Vec::new(),
            spheres: vec![Vec::new(); radius as usize + 1],
            origin: 0,
            cells,
            lookup,
        };
        let mut nbrs = Vec::with_capacity(6 * ball.cells.len());
        for &c in &ball.cells {
            for n in neighbors(c) {
                nbrs.push(ball.index(n).unwrap_or(NONE));
            }
        }
        ball.nbrs = nbrs;
        for (i, &d) in ball.dist.iter().enumerate() {
            ball.spheres[d as usize].push(i as u32);
        }
        ball.origin = ball.index(Cell::origin(kind)).expect("origin in ball");
        Arc::new(ball)
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn origin(&self) -> u32 {
        self.origin
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, i: u32) -> Cell {
        self.cells[i as usize]
    }

    pub fn dist(&self, i: u32) -> u32 {
        self.dist[i as usize]
    }

    /// Neighbour indices of cell `i`; [`NONE`] marks cells outside the ball.
    #[inline]
    pub fn nbrs(&self, i: u32) -> &[u32] {
        let s = 6 * i as usize;
        &self.nbrs[s..s + 6]
    }

    /// Sphere {d = k} as cell indices.
    pub fn sphere(&self, k: u32) -> &[u32] {
        &self.spheres[k as usize]
    }

    /// Indices of B_k, k ≤ R.
    pub fn sub_ball(&self, k: u32) -> Vec<u32> {
        (0..self.len() as u32).filter(|&i| self.dist(i) <= k).collect()
    }

    pub fn index(&self, c: Cell) -> Option<u32> {
        if c.kind() != self.kind {
            return None;
        }
        match (&self.lookup, c) {
            (Lookup::Hex { row_start }, Cell::Hex { q, r }) => {
                if hex_norm(q, r) > self.radius {
                    return None;
                }
                let rr = self.radius as i32;
                let qmin = (-rr).max(-rr - r);
                Some(row_start[(r + rr) as usize] + (q - qmin) as u32)
            }
            (Lookup::Map(map), _) => map.get(&c).copied(),
            _ => None,
        }
    }
}

/// Angular quarter of the plane used to split a sphere into four arcs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arc4 {
    Right,
    Top,
    Left,
    Bottom,
}

pub fn arc_of(c: Cell) -> Arc4 {
    let (x, y) = c.center();
    let a = y.atan2(x);
    let q = std::f64::consts::FRAC_PI_4;
    if a > -q && a <= q {
        Arc4::Right
    } else if a > q && a <= 3.0 * q {
        Arc4::Top
    } else if a > -3.0 * q && a <= -q {
        Arc4::Bottom
    } else {
        Arc4::Left
    }
}

/// A circuit Γ with its interior.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    cells: Vec<Cell>,
    interior: BTreeSet<Cell>,
}

impl Circuit {
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn interior(&self) -> &BTreeSet<Cell> {
        &self.interior
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.cells.contains(&c)
    }

    /// Largest distance from 0 over the cells of Γ.
    pub fn max_norm(&self) -> u32 {
        self.cells.iter().map(|&c| norm(c)).max().unwrap_or(0)
    }

    /// Whether Int(Γ) contains all of B_r.
    pub fn encloses_ball(&self, r: u32) -> bool {
        let kind = LatticeKind::Hex;
        Region::ball(kind, r).cells().iter().all(|c| self.interior.contains(c))
    }
}

/// Checks that `path` is a hexagon circuit and computes its interior.
pub fn validate_circuit(path: &[Cell]) -> Result<Circuit> {
    let fail = |m: &str| Err(Error::NotACircuit(m.to_string()));
    if path.is_empty() {
        return fail("empty path");
    }
    if path.iter().any(|c| c.kind() != LatticeKind::Hex) {
        return fail("circuits are defined on the hexagonal lattice");
    }
    let set: BTreeSet<Cell> = path.iter().copied().collect();
    if set.len() != path.len() {
        return fail("path visits a cell twice");
    }
    if path.len() < 3 {
        return fail("path too short to close");
    }
    for k in 0..path.len() {
        let (a, b) = (path[k], path[(k + 1) % path.len()]);
        if distance(a, b) != 1 {
            return fail("consecutive cells are not adjacent");
        }
    }
    for &c in path {
        let ns = neighbors(c);
        for k in 0..6 {
            if set.contains(&ns[k]) && set.contains(&ns[(k + 1) % 6]) {
                return fail("three cells of the path meet at a vertex");
            }
        }
    }
    let m = path.iter().map(|&c| norm(c)).max().unwrap();
    let ball = Ball::new(LatticeKind::Hex, m + 1);
    let n = ball.len();
    let on_path: Vec<bool> = (0..n as u32).map(|i| set.contains(&ball.cell(i))).collect();
    // Exterior: everything reachable from the sphere m+1, which is connected
    // and disjoint from the path.
    let mut comp = vec![u32::MAX; n];
    let mut stack: Vec<u32> = ball.sphere(m + 1).to_vec();
    for &s in &stack {
        comp[s as usize] = 0;
    }
    let mut label = 0;
    loop {
        while let Some(v) = stack.pop() {
            for &w in ball.nbrs(v) {
                if w != NONE && !on_path[w as usize] && comp[w as usize] == u32::MAX {
                    comp[w as usize] = label;
                    stack.push(w);
                }
            }
        }
        match (0..n).find(|&i| !on_path[i] && comp[i] == u32::MAX) {
            Some(i) => {
                label += 1;
                comp[i] = label;
                stack.push(i as u32);
            }
            None => break,
        }
    }
    if label != 1 {
        return fail("complement does not have exactly two components");
    }
    let interior = (0..n).filter(|&i| comp[i] == 1).map(|i| ball.cell(i as u32)).collect();
    Ok(Circuit { cells: path.to_vec(), interior })
}

/// Orders a cell set that forms a simple cycle in the adjacency graph.
pub fn order_cycle(cells: &BTreeSet<Cell>) -> Option<Vec<Cell>> {
    let first = *cells.iter().next()?;
    let mut out = vec![first];
    let mut prev: Option<Cell> = None;
    let mut cur = first;
    loop {
        let next: Vec<Cell> = neighbors(cur)
            .into_iter()
            .filter(|n| cells.contains(n) && Some(*n) != prev)
            .collect();
        let inside: Vec<Cell> = neighbors(cur).into_iter().filter(|n| cells.contains(n)).collect();
        if inside.len() != 2 {
            return None;
        }
        let nxt = next[0];
        if nxt == first {
            break;
        }
        if out.len() > cells.len() {
            return None;
        }
        out.push(nxt);
        prev = Some(cur);
        cur = nxt;
    }
    (out.len() == cells.len()).then_some(out)
}

/// The hexagonal ring {d = k} in cyclic order.
pub fn hex_ring(k: u32) -> Vec<Cell> {
    if k == 0 {
        return vec![Cell::hex(0, 0)];
    }
    let k = k as i32;
    let mut out = Vec::with_capacity(6 * k as usize);
    // Start at the corner k·dir[4] and walk k steps along each direction.
    let (mut q, mut r) = (HEX_DIRS[4].0 * k, HEX_DIRS[4].1 * k);
    for side in 0..6 {
        let (dq, dr) = HEX_DIRS[side];
        for _ in 0..k {
            out.push(Cell::hex(q, r));
            q += dq;
            r += dr;
        }
    }
    out
}
