//! Exact laws on tiny balls by enumerating every configuration. Window
//! patterns list the cells of B_k in the ball's row-major order, bit j for
//! the j-th cell.

use std::sync::OnceLock;

use crate::lattice::{Ball, LatticeKind};
use crate::oracle;
use crate::static_perc::{Configuration, Crossing};

/// Largest radius handled by enumeration.
pub const MAX_RADIUS: u32 = 2;

/// Pattern of the B_k cells of `cfg`.
pub fn window(cfg: &Configuration, k: u32) -> usize {
    cfg.pattern(&cfg.ball().sub_ball(k)) as usize
}

struct Table {
    /// 0 ↔ R and |Piv_{0↔R}| for every configuration of B_R.
    connected: Vec<bool>,
    pivotals: Vec<u8>,
}

fn table(big_r: u32) -> &'static Table {
    static TABLES: [OnceLock<Table>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    assert!(big_r <= MAX_RADIUS, "enumeration only up to radius {MAX_RADIUS}");
    TABLES[big_r as usize].get_or_init(|| {
        let ball = Ball::new(LatticeKind::Hex, big_r);
        let x = Crossing::zero_to(&ball, big_r);
        let n = 1usize << ball.len();
        let mut connected = Vec::with_capacity(n);
        let mut pivotals = Vec::with_capacity(n);
        for m in 0..n as u64 {
            let cfg = Configuration::from_mask(&ball, m);
            let c = x.occurs(&cfg);
            connected.push(c);
            pivotals.push(if c { x.pivotals(&cfg).len() as u8 } else { 0 });
        }
        Table { connected, pivotals }
    })
}

/// Positions in B_R's index order of the B_k cells.
fn window_bits(big_r: u32, k: u32) -> Vec<u32> {
    Ball::new(LatticeKind::Hex, big_r).sub_ball(k)
}

fn pattern_of(mask: usize, bits: &[u32]) -> usize {
    bits.iter().enumerate().fold(0, |acc, (j, &b)| acc | ((mask >> b) & 1) << j)
}

/// θ(r) = P(0 ↔ r) exactly, r ≤ 2.
pub fn theta(r: u32) -> f64 {
    let t = table(r);
    t.connected.iter().filter(|&&c| c).count() as f64 / t.connected.len() as f64
}

/// Law of the B_k window under a weighting of the B_R configurations.
fn window_law(big_r: u32, k: u32, weight: impl Fn(usize) -> f64) -> Vec<f64> {
    let t = table(big_r);
    let bits = window_bits(big_r, k);
    let mut law = vec![0.0; 1 << bits.len()];
    for m in 0..t.connected.len() {
        law[pattern_of(m, &bits)] += weight(m);
    }
    let z: f64 = law.iter().sum();
    law.iter_mut().for_each(|p| *p /= z);
    law
}

/// Law of ω restricted to B_k under IIC_r = P(· | 0 ↔ r).
pub fn iic_marginal(r: u32, k: u32) -> Vec<f64> {
    let t = table(r);
    window_law(r, k, |m| t.connected[m] as u8 as f64)
}

/// Law of ω restricted to B_k under IIC′_R (IIC_R reweighted by |Piv|).
pub fn iic_prime_marginal(big_r: u32, k: u32) -> Vec<f64> {
    let t = table(big_r);
    window_law(big_r, k, |m| t.pivotals[m] as f64)
}

/// E_{IIC_R}|Piv_{0↔R}|.
pub fn iic_mean_pivotals(big_r: u32) -> f64 {
    let t = table(big_r);
    let (s, c) = t.connected.iter().zip(&t.pivotals).filter(|(c, _)| **c).fold((0.0, 0.0), |(s, c), (_, &p)| (s + p as f64, c + 1.0));
    s / c
}

/// M_k(ζ) = P(0 ↔ R | ω^{B_k} = ζ) / P(0 ↔ R) for every window pattern ζ.
pub fn m_table(k: u32, big_r: u32) -> Vec<f64> {
    let t = table(big_r);
    let bits = window_bits(big_r, k);
    let mut hits = vec![0u64; 1 << bits.len()];
    for m in 0..t.connected.len() {
        if t.connected[m] {
            hits[pattern_of(m, &bits)] += 1;
        }
    }
    let ext = (t.connected.len() >> bits.len()) as f64;
    let th = theta(big_r);
    hits.iter().map(|&h| h as f64 / ext / th).collect()
}

/// max over ζ of |E[M_R | ω^{B_1} = ζ] − M_1(ζ)| at R = 2, with M_1 from the
/// fast crossing table and E[M_2 | ·] averaged from the DFS reference.
pub fn martingale_residual() -> f64 {
    let m1 = m_table(1, 2);
    let ball = Ball::new(LatticeKind::Hex, 2);
    let bits = window_bits(2, 1);
    let n = 1usize << ball.len();
    let connected: Vec<bool> = (0..n as u64).map(|m| oracle::zero_to_r(&Configuration::from_mask(&ball, m), 2)).collect();
    let theta2 = connected.iter().filter(|&&c| c).count() as f64 / n as f64;
    let mut sum = vec![0.0; 1 << bits.len()];
    let mut count = vec![0u64; 1 << bits.len()];
    for (m, &c) in connected.iter().enumerate() {
        let z = pattern_of(m, &bits);
        sum[z] += if c { 1.0 / theta2 } else { 0.0 };
        count[z] += 1;
    }
    (0..m1.len()).map(|z| (sum[z] / count[z] as f64 - m1[z]).abs()).fold(0.0, f64::max)
}

/// C₁ in M_1 ≤ C₁ M̄_1 at (r, R) = (1, 2): max over ζ with 0 ↔ 1 of M_1(ζ) θ(1).
pub fn c1_constant() -> f64 {
    let m1 = m_table(1, 2);
    let ball = Ball::new(LatticeKind::Hex, 1);
    let x = Crossing::zero_to(&ball, 1);
    let th1 = theta(1);
    (0..m1.len())
        .filter(|&z| x.occurs(&Configuration::from_mask(&ball, z as u64)))
        .map(|z| m1[z] * th1)
        .fold(0.0, f64::max)
}
