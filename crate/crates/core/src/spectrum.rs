//! Fourier–Walsh analysis of Boolean events over at most 24 bits.
//!
//! An event is a predicate on n-bit words, bit i set meaning cell i open.
//! Its ±1 indicator f = 2·1_A − 1 expands as f = Σ_S f̂(S) χ_S with
//! χ_S(ω) = Π_{i∈S} (2ω_i − 1), and f̂(S)² is the law of the spectral sample.

use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dynamics::{simulate, Clocks};
use crate::error::{Error, Result};
use crate::lattice::{Ball, Cell, LatticeKind, HEX_DIRS};
use crate::rng::Rng;
use crate::static_perc::{Configuration, Crossing};
use crate::stats::Estimate;

/// Largest bit count handled exactly.
pub const MAX_BITS: usize = 24;

/// Walsh coefficients f̂(S), indexed by the bitmask of S.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDistribution {
    n: usize,
    coefficients: Vec<f64>,
}

impl SpectralDistribution {
    pub fn bits(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient(&self, s: u64) -> f64 {
        self.coefficients[s as usize]
    }

    /// P(Spec = S) = f̂(S)².
    pub fn weight(&self, s: u64) -> f64 {
        self.coefficients[s as usize].powi(2)
    }

    /// Σ_S f̂(S)².
    pub fn total_weight(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    /// Law of |Spec|: entry k is Σ_{|S|=k} f̂(S)².
    pub fn size_law(&self) -> Vec<f64> {
        let mut law = vec![0.0; self.n + 1];
        for (s, c) in self.coefficients.iter().enumerate() {
            law[s.count_ones() as usize] += c * c;
        }
        law
    }

    /// The ±1 values of the indicator recovered by transforming back.
    pub fn inverse(&self) -> Vec<f64> {
        let mut v: Vec<f64> =
            self.coefficients.iter().enumerate().map(|(s, &c)| if s.count_ones() % 2 == 1 { -c } else { c }).collect();
        fwht(&mut v);
        v
    }

    /// CSV with columns bitmask, coefficient.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitmask,coefficient\n");
        for (s, c) in self.coefficients.iter().enumerate() {
            out.push_str(&format!("{s},{c:?}\n"));
        }
        out
    }

    /// CSV with columns size, probability.
    pub fn size_law_csv(&self) -> String {
        let mut out = String::from("size,probability\n");
        for (k, p) in self.size_law().iter().enumerate() {
            out.push_str(&format!("{k},{p:?}\n"));
        }
        out
    }
}

/// In-place unnormalized Walsh–Hadamard transform.
fn fwht(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let (s, d) = (*x + *y, *x - *y);
                *x = s;
                *y = d;
            }
        }
        h *= 2;
    }
}

fn check_bits(n: usize) -> Result<()> {
    if n > MAX_BITS {
        return Err(Error::TooManyBits { n, max: MAX_BITS });
    }
    Ok(())
}

/// Exact coefficients of the ±1 indicator of `event` over n bits.
pub fn walsh_transform(n: usize, event: impl Fn(u64) -> bool) -> Result<SpectralDistribution> {
    check_bits(n)?;
    let size = 1usize << n;
    let mut v: Vec<f64> = (0..size as u64).map(|x| if event(x) { 1.0 } else { -1.0 }).collect();
    fwht(&mut v);
    // H v[S] = Σ_x f(x) (−1)^{|x∧S|} and χ_S(x) = (−1)^{|S|} (−1)^{|x∧S|}.
    let scale = 1.0 / size as f64;
    for (s, c) in v.iter_mut().enumerate() {
        *c *= if s.count_ones() % 2 == 1 { -scale } else { scale };
    }
    Ok(SpectralDistribution { n, coefficients: v })
}

/// (E|Spec|, E|Spec|²) under the squared-coefficient law.
pub fn spectral_size_moments(spec: &SpectralDistribution) -> (f64, f64) {
    spec.size_law().iter().enumerate().fold((0.0, 0.0), |(m1, m2), (k, p)| (m1 + k as f64 * p, m2 + (k * k) as f64 * p))
}

/// (E|Piv|, E|Piv|²) at p = 1/2 by flipping every bit of every input.
pub fn pivotal_moments(n: usize, event: impl Fn(u64) -> bool) -> Result<(f64, f64)> {
    check_bits(n)?;
    let size = 1u64 << n;
    let table: Vec<bool> = (0..size).map(&event).collect();
    let (mut m1, mut m2) = (0u64, 0u64);
    for x in 0..size {
        let f = table[x as usize];
        let k = (0..n).filter(|&i| table[(x ^ 1 << i) as usize] != f).count() as u64;
        m1 += k;
        m2 += k * k;
    }
    Ok((m1 as f64 / size as f64, m2 as f64 / size as f64))
}

/// Σ_S f̂_A(S) f̂_B(S) e^{−t|S|} = E[f_A(ω_0) f_B(ω_t)].
pub fn decorrelation_exact(a: &SpectralDistribution, b: &SpectralDistribution, t: f64) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::MismatchedBitSets(a.n, b.n));
    }
    let decay: Vec<f64> = (0..=a.n).map(|k| (-t * k as f64).exp()).collect();
    Ok(a.coefficients
        .iter()
        .zip(&b.coefficients)
        .enumerate()
        .map(|(s, (x, y))| x * y * decay[s.count_ones() as usize])
        .sum())
}

/// Monte Carlo E[f_A(ω_0) f_B(ω_t)] under stationary dynamics on n bits.
pub fn decorrelation_mc(
    n: usize,
    a: impl Fn(u64) -> bool,
    b: impl Fn(u64) -> bool,
    t: f64,
    trials: u64,
    rng: &mut Rng,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::InsufficientTrials);
    }
    if n > 64 {
        return Err(Error::TooManyBits { n, max: 64 });
    }
    let sign = |x: bool| if x { 1.0 } else { -1.0 };
    let mut values = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let mut w: u64 = if n == 64 { rng.random() } else { rng.random::<u64>() & ((1u64 << n) - 1) };
        let start = w;
        let mut clocks = Clocks::new(0..n as u32, 0.0, 0.5, rng);
        while clocks.peek().is_some_and(|s| s <= t) {
            let ring = clocks.next_ring(rng).expect("clocks are running");
            w = (w & !(1 << ring.cell)) | (ring.state as u64) << ring.cell;
        }
        values.push(sign(a(start)) * sign(b(w)));
    }
    Ok(Estimate::mean(&values))
}

/// Left-right crossing of the L×L hexagonal rhombus {(q, r): 0 ≤ q, r < L}
/// in axial coordinates. Cell (q, r) is bit r·L + q; the left side is
/// q = 0 and the right side q = L − 1.
#[derive(Clone, Debug)]
pub struct RhombusCrossing {
    side: usize,
    nbrs: Vec<u64>,
}

impl RhombusCrossing {
    pub fn new(side: usize) -> Result<RhombusCrossing> {
        if side == 0 || side * side > 64 {
            return Err(Error::InvalidParameter(format!("rhombus side {side} must be in 1..=8")));
        }
        let l = side as i32;
        let nbrs = (0..side * side)
            .map(|b| {
                let (q, r) = ((b % side) as i32, (b / side) as i32);
                HEX_DIRS
                    .iter()
                    .map(|&(dq, dr)| (q + dq, r + dr))
                    .filter(|&(x, y)| (0..l).contains(&x) && (0..l).contains(&y))
                    .fold(0u64, |m, (x, y)| m | 1 << (y * l + x))
            })
            .collect();
        Ok(RhombusCrossing { side, nbrs })
    }

    pub fn bits(&self) -> usize {
        self.side * self.side
    }

    /// The cell of bit `b`.
    pub fn cell(&self, b: usize) -> Cell {
        Cell::hex((b % self.side) as i32, (b / self.side) as i32)
    }

    /// Whether open cells (bits of `w`) connect the left and right sides.
    pub fn occurs(&self, w: u64) -> bool {
        let l = self.side;
        let left: u64 = (0..l).fold(0, |m, r| m | 1 << (r * l));
        let right: u64 = left << (l - 1);
        let mut reach = w & left;
        loop {
            if reach & right != 0 {
                return true;
            }
            let mut next = reach;
            let mut rest = reach;
            while rest != 0 {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                next |= self.nbrs[b] & w;
            }
            if next == reach {
                return false;
            }
            reach = next;
        }
    }
}

/// P(0 ↔ R at times 0 and t) / P(0 ↔ R)² for each t, with the denominator
/// estimated from the same trials.
pub fn radial_correlation(big_r: u32, times: &[f64], trials: u64, rng: &mut Rng) -> Result<Vec<Estimate>> {
    if trials == 0 {
        return Err(Error::InsufficientTrials);
    }
    let ball: Arc<Ball> = Ball::new(LatticeKind::Hex, big_r);
    let x = Crossing::zero_to(&ball, big_r);
    let horizon = times.iter().copied().fold(0.0, f64::max);
    let mut joint = vec![0u64; times.len()];
    let mut marginal = 0u64;
    for _ in 0..trials {
        let traj = simulate(Configuration::sample(&ball, 0.5, rng), horizon, rng)?;
        let at0 = x.occurs(traj.initial());
        marginal += at0 as u64;
        if at0 {
            for (k, &t) in times.iter().enumerate() {
                joint[k] += x.occurs(&traj.state_at(t)) as u64;
            }
        }
    }
    let theta = marginal as f64 / trials as f64;
    Ok(joint
        .iter()
        .map(|&j| {
            let e = Estimate::binomial(j, trials);
            Estimate { value: e.value / (theta * theta), se: e.se / (theta * theta), n: trials }
        })
        .collect())
}
