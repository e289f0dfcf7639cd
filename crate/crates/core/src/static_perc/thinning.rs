use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{neighbors, norm, Cell, Circuit, LatticeKind, HEX_DIRS};
use crate::rng::Rng;
use crate::static_perc::{arm_probability, innermost_circuit, ArmKind, Configuration, Crossing};

/// η in α_4(R) ≤ C R^{-(1+η)} on the hexagonal lattice (α_4 = R^{-5/4}).
pub const HEX_ETA: f64 = 0.25;

/// Parameters of the Fine predicate together with the four-arm estimate
/// that stands in for the true α_4.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FineCriterion {
    pub r: u32,
    pub epsilon: f64,
    pub big_r: u32,
    pub eta: f64,
    /// α̂_4(1, ⌊r^{1+2ε}⌋).
    pub alpha4_hat: f64,
    /// ⌊r^{1+ε}⌋: Γ_r must lie in this ball.
    pub circuit_radius: u32,
    /// r^{2(1+2ε)} α̂_4: cap on the number of pivotals inside Γ_r.
    pub piv_bound: f64,
}

impl FineCriterion {
    pub fn new(r: u32, epsilon: f64, big_r: u32, eta: f64, alpha4_hat: f64) -> Result<Self> {
        let unmet = |m: String| Err(Error::PreconditionUnmet(m));
        if r < 2 || r % 2 != 0 {
            return unmet(format!("r = {r} must be even and at least 2"));
        }
        if (1.0 + 2.0 * epsilon) * (1.0 - eta) >= 1.0 {
            return unmet(format!("(1+2ε)(1-η) = {} is not below 1", (1.0 + 2.0 * epsilon) * (1.0 - eta)));
        }
        let rf = r as f64;
        let outer = rf.powf(1.0 + 2.0 * epsilon);
        if (big_r as f64) < outer {
            return unmet(format!("R = {big_r} is below r^(1+2ε) = {outer:.3}"));
        }
        let piv_bound = rf.powf(2.0 * (1.0 + 2.0 * epsilon)) * alpha4_hat;
        if piv_bound >= rf / 2.0 {
            return unmet(format!("r^(2(1+2ε)) α̂_4 = {piv_bound:.3} is not below r/2 = {}", rf / 2.0));
        }
        Ok(FineCriterion {
            r,
            epsilon,
            big_r,
            eta,
            alpha4_hat,
            circuit_radius: rf.powf(1.0 + epsilon).floor() as u32,
            piv_bound,
        })
    }

    /// Estimates α̂_4(1, ⌊r^{1+2ε}⌋) with `trials` samples and builds the criterion.
    pub fn estimate(r: u32, epsilon: f64, big_r: u32, eta: f64, trials: u64, rng: &mut Rng) -> Result<Self> {
        let s = ((r as f64).powf(1.0 + 2.0 * epsilon).floor() as u32).max(2);
        let a4 = arm_probability(ArmKind::Four, 1, s, 0.5, trials, rng)?;
        Self::new(r, epsilon, big_r, eta, a4.estimate)
    }
}

/// Γ_r and the pivotals of {0 ↔ R} inside Int(Γ_r) other than the origin,
/// when the configuration is Fine.
pub fn fine_witness(cfg: &Configuration, crit: &FineCriterion) -> Option<(Circuit, Vec<Cell>)> {
    let ball = cfg.ball();
    let x = Crossing::zero_to(ball, crit.big_r);
    if !x.occurs(cfg) {
        return None;
    }
    let gamma = innermost_circuit(cfg, crit.r)?;
    if gamma.max_norm() > crit.circuit_radius {
        return None;
    }
    let origin = ball.cell(ball.origin());
    let inside: Vec<Cell> = x
        .pivotals(cfg)
        .into_iter()
        .map(|i| ball.cell(i))
        .filter(|c| *c != origin && gamma.interior().contains(c))
        .collect();
    (inside.len() as f64 <= crit.piv_bound).then_some((gamma, inside))
}

/// The Fine predicate. The pivotal count in clause (iii) leaves out the
/// origin, which is pivotal in every configuration where 0 ↔ R.
pub fn is_fine(cfg: &Configuration, crit: &FineCriterion) -> bool {
    fine_witness(cfg, crit).is_some()
}

/// Graph distance to Γ through interior cells, for every interior cell.
fn distance_to_circuit(gamma: &Circuit) -> HashMap<Cell, u32> {
    let interior = gamma.interior();
    let mut dist = HashMap::with_capacity(interior.len());
    let mut queue = VecDeque::new();
    for &g in gamma.cells() {
        for n in neighbors(g) {
            if interior.contains(&n) && !dist.contains_key(&n) {
                dist.insert(n, 1);
                queue.push_back(n);
            }
        }
    }
    while let Some(c) = queue.pop_front() {
        let d = dist[&c];
        for n in neighbors(c) {
            if interior.contains(&n) && !dist.contains_key(&n) {
                dist.insert(n, d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

/// χ_{r,Γ,a}: a fixed configuration on Int(Γ) in which the origin reaches Γ
/// with exactly `a` pivotal cells besides the origin.
///
/// Layout: the x-axis cells of B_{r/2} and the ring {d = r/2+1} are open; a
/// two-cell-wide ladder runs from that ring along the positive x-axis while
/// the distance to Γ exceeds `a`; a single lane of `a` cells then descends
/// to Γ. All other interior cells are closed, so no open circuit around B_r
/// is created inside Γ.
pub fn slim_config(r: u32, gamma: &Circuit, a: usize) -> Result<BTreeMap<Cell, bool>> {
    let half = r / 2;
    if r % 2 != 0 || !gamma.encloses_ball(r) {
        return Err(Error::PreconditionUnmet("slim configuration needs even r and B_r inside Γ".into()));
    }
    if a > half as usize {
        return Err(Error::InvalidA { a, max: half as usize });
    }
    let interior = gamma.interior();
    let dist = distance_to_circuit(gamma);
    let mut out: BTreeMap<Cell, bool> = interior.iter().map(|&c| (c, false)).collect();
    for &c in interior {
        let d = norm(c);
        let on_axis = matches!(c, Cell::Hex { r: 0, .. });
        if (d <= half && on_axis) || d == half + 1 {
            out.insert(c, true);
        }
    }
    let h = half as i32;
    let ladder = |j: i32| if j % 2 == 0 { Cell::hex(h + 1 + j / 2, 0) } else { Cell::hex(h + 2 + j / 2, -1) };
    let a32 = a as u32;
    let mut j = 0;
    let start = loop {
        let c = ladder(j);
        match dist.get(&c) {
            Some(&d) if d > a32 => {
                out.insert(c, true);
                j += 1;
            }
            Some(_) => break Some(c),
            None => break None,
        }
    };
    if a > 0 {
        let mut cur = start.ok_or_else(|| Error::PreconditionUnmet("ladder left Int(Γ) before the lane".into()))?;
        let gset: BTreeSet<Cell> = gamma.cells().iter().copied().collect();
        let contacts = |c: Cell| neighbors(c).iter().filter(|n| gset.contains(n)).count();
        out.insert(cur, true);
        while dist[&cur] > 1 {
            let want = dist[&cur] - 1;
            let Cell::Hex { q, r: rr } = cur else { unreachable!() };
            let options: Vec<Cell> = HEX_DIRS
                .iter()
                .map(|&(dq, dr)| Cell::hex(q + dq, rr + dr))
                .filter(|n| dist.get(n) == Some(&want))
                .collect();
            let next = if want == 1 {
                *options.iter().max_by_key(|&&n| (contacts(n), std::cmp::Reverse(options.iter().position(|&m| m == n)))).unwrap()
            } else {
                options[0]
            };
            out.insert(next, true);
            cur = next;
        }
    }
    let realized = slim_pivot_count(gamma, &out);
    if realized != a {
        return Err(Error::PreconditionUnmet(format!(
            "slim construction realizes {realized} pivotals instead of {a} for this circuit"
        )));
    }
    Ok(out)
}

/// Pivotals of {0 ↔ Γ} other than the origin for an interior assignment with Γ open.
fn slim_pivot_count(gamma: &Circuit, inside: &BTreeMap<Cell, bool>) -> usize {
    let m = gamma.max_norm();
    let ball = crate::lattice::Ball::new(LatticeKind::Hex, m);
    let gidx: Vec<u32> = gamma.cells().iter().filter_map(|&c| ball.index(c)).collect();
    let cfg = Configuration::from_fn(&ball, |i| {
        let c = ball.cell(i);
        inside.get(&c).copied().unwrap_or(false) || gamma.contains(c)
    });
    let allowed: Vec<u32> = (0..ball.len() as u32)
        .filter(|&i| gamma.interior().contains(&ball.cell(i)) || gamma.contains(ball.cell(i)))
        .collect();
    let x = Crossing::new(&ball, &allowed, &[ball.origin()], &gidx);
    x.pivotals(&cfg)
        .into_iter()
        .filter(|&i| i != ball.origin() && !gamma.contains(ball.cell(i)))
        .count()
}

/// Thinning: the identity off Fine; on Fine, Int(Γ_r) is replaced by the
/// slim configuration with the same number of interior pivotals.
pub fn thin(cfg: &Configuration, crit: &FineCriterion) -> Result<Configuration> {
    let Some((gamma, inside)) = fine_witness(cfg, crit) else {
        return Ok(cfg.clone());
    };
    let slim = slim_config(crit.r, &gamma, inside.len())?;
    let mut out = cfg.clone();
    let ball = cfg.ball();
    for (c, open) in slim {
        out.set(ball.index(c).expect("interior inside ball"), open);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{hex_ring, validate_circuit, Ball};

    fn crit() -> FineCriterion {
        FineCriterion::new(8, 0.1, 32, HEX_ETA, 0.02).unwrap()
    }

    #[test]
    fn preconditions() {
        assert!(FineCriterion::new(7, 0.1, 32, HEX_ETA, 0.02).is_err());
        assert!(FineCriterion::new(8, 0.1, 10, HEX_ETA, 0.02).is_err());
        assert!(FineCriterion::new(8, 0.1, 32, HEX_ETA, 0.5).is_err());
        assert!(FineCriterion::new(8, 0.3, 32, 0.0, 0.001).is_err());
        assert_eq!(crit().circuit_radius, 9);
    }

    #[test]
    fn slim_counts() {
        let gamma = validate_circuit(&hex_ring(6)).unwrap();
        for a in 0..=2 {
            let slim = slim_config(4, &gamma, a).unwrap();
            assert_eq!(slim_pivot_count(&gamma, &slim), a);
            for (c, open) in &slim {
                if norm(*c) <= 2 {
                    assert_eq!(*open, matches!(c, Cell::Hex { r: 0, .. }));
                }
            }
        }
        assert!(matches!(slim_config(4, &gamma, 3), Err(Error::InvalidA { .. })));
    }

    #[test]
    fn all_closed_not_fine() {
        let ball = Ball::new(LatticeKind::Hex, 32);
        assert!(!is_fine(&Configuration::closed(&ball), &crit()));
    }
}
