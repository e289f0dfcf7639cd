use std::collections::BTreeSet;

use perclab::lattice::{hex_ring, norm, validate_circuit, Ball, Cell, LatticeKind};
use perclab::oracle;
use perclab::rng::stream;
use perclab::static_perc::{
    arm_probability, innermost_circuit, is_fine, slim_config, thin, ArmKind, Configuration, Crossing, FineCriterion,
    zero_to_r, HEX_ETA,
};
use proptest::prelude::*;

/// P(0 ↔ 1) by enumerating the 2^7 states of B_1 with the DFS reference.
fn theta1_enumerated() -> (u64, u64) {
    let ball = Ball::new(LatticeKind::Hex, 1);
    let hits = (0u64..128).filter(|&m| oracle::zero_to_r(&Configuration::from_mask(&ball, m), 1)).count();
    (hits as u64, 128)
}

#[test]
fn theta_one_by_enumeration() {
    assert_eq!(theta1_enumerated(), (63, 128));
}

#[test]
fn theta_one_monte_carlo() {
    let ball = Ball::new(LatticeKind::Hex, 1);
    let mut rng = stream(3, "theta1", 0);
    let n = 100_000;
    let hits = (0..n).filter(|_| zero_to_r(&Configuration::sample(&ball, 0.5, &mut rng), 1)).count();
    let p = hits as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((p - 63.0 / 128.0).abs() <= 3.0 * se, "{p} vs 63/128");
}

#[test]
fn one_arm_r1_r2_matches_enumeration() {
    // Enumerate the 2^18 states of B_2 \ B_0 with the DFS reference.
    let ball = Ball::new(LatticeKind::Hex, 2);
    let origin = ball.origin();
    let sphere: Vec<Cell> = ball.sphere(2).iter().map(|&i| ball.cell(i)).collect();
    let mut hits = 0u64;
    for m in 0u64..1 << 18 {
        let mask = (m & ((1 << origin) - 1)) | (m >> origin) << (origin + 1);
        let cfg = Configuration::from_mask(&ball, mask);
        let open = oracle::open_cells(&cfg);
        hits += oracle::dfs_connected(&open, &|c| norm(c) == 2, &sphere, &sphere) as u64;
    }
    let exact = hits as f64 / (1u64 << 18) as f64;
    assert_eq!(exact, 1.0 - 0.5f64.powi(12));
    let mut rng = stream(4, "arm12", 0);
    let e = arm_probability(ArmKind::One, 1, 2, 0.5, 200_000, &mut rng).unwrap();
    assert!((e.estimate - exact).abs() <= 3.0 * e.se.max(1.0 / 200_000.0), "{e:?}");
}

#[test]
fn open_fraction_is_half() {
    let ball = Ball::new(LatticeKind::Hex, 5);
    let mut rng = stream(5, "frac", 0);
    let n = 100_000u64;
    let open: usize = (0..n).map(|_| Configuration::sample(&ball, 0.5, &mut rng).count_open()).sum();
    let total = (n as usize * ball.len()) as f64;
    let p = open as f64 / total;
    assert!((p - 0.5).abs() <= 3.0 * (0.25 / total).sqrt());
}

#[test]
fn pivotal_examples() {
    let ball = Ball::new(LatticeKind::Hex, 6);
    let open = Configuration::open(&ball);
    let origin = ball.cell(ball.origin());
    assert_eq!(perclab::static_perc::pivotals(&open, 6), BTreeSet::from([origin]));
    let path = Configuration::from_fn(&ball, |i| matches!(ball.cell(i), Cell::Hex { q, r: 0 } if q >= 0));
    let piv = perclab::static_perc::pivotals(&path, 6);
    assert_eq!(piv.len(), 7);
    assert_eq!(piv, oracle::pivotals_zero_to_r(&path, 6));
}

#[test]
fn circuit_examples() {
    let ball = Ball::new(LatticeKind::Hex, 5);
    for r in 0..5 {
        let g = innermost_circuit(&Configuration::open(&ball), r).unwrap();
        let ring: BTreeSet<Cell> = hex_ring(r + 1).into_iter().collect();
        assert_eq!(g.cells().iter().copied().collect::<BTreeSet<Cell>>(), ring);
    }
    let inside_open = Configuration::from_fn(&ball, |i| ball.dist(i) <= 1);
    assert!(innermost_circuit(&inside_open, 1).is_none());
}

/// FKG on exhaustive enumeration: increasing events A, B on B_2 satisfy
/// P(A ∩ B) ≥ P(A) P(B) exactly (counts compared as integers).
#[test]
fn fkg_exhaustive() {
    let ball = Ball::new(LatticeKind::Hex, 2);
    let sphere = ball.sphere(2).to_vec();
    let left: Vec<u32> = sphere.iter().copied().filter(|&i| perclab::lattice::arc_of(ball.cell(i)) == perclab::lattice::Arc4::Left).collect();
    let right: Vec<u32> = sphere.iter().copied().filter(|&i| perclab::lattice::arc_of(ball.cell(i)) == perclab::lattice::Arc4::Right).collect();
    let all: Vec<u32> = (0..ball.len() as u32).collect();
    let events = [
        Crossing::zero_to(&ball, 2),
        Crossing::new(&ball, &all, &left, &right),
        Crossing::annulus(&ball, 0, 2),
    ];
    let n = 1u64 << ball.len();
    let mut counts = vec![[0u64; 2]; events.len()];
    let mut joint = vec![vec![0u64; events.len()]; events.len()];
    for m in 0..n {
        let cfg = Configuration::from_mask(&ball, m);
        let occ: Vec<bool> = events.iter().map(|e| e.occurs(&cfg)).collect();
        for a in 0..events.len() {
            counts[a][occ[a] as usize] += 1;
            for b in 0..events.len() {
                joint[a][b] += (occ[a] && occ[b]) as u64;
            }
        }
    }
    for a in 0..events.len() {
        for b in 0..events.len() {
            let lhs = joint[a][b] as u128 * n as u128;
            let rhs = counts[a][1] as u128 * counts[b][1] as u128;
            assert!(lhs >= rhs, "FKG fails for events {a},{b}");
        }
    }
}

#[test]
fn quasi_multiplicativity_right_inequality() {
    let radii = [2u32, 4, 8, 16, 32];
    let trials = 20_000;
    let est = |r: u32, big_r: u32, label: &str| {
        let mut rng = stream(6, label, r as u64 * 1000 + big_r as u64);
        arm_probability(ArmKind::One, r, big_r, 0.5, trials, &mut rng).unwrap()
    };
    for (k, &r) in radii.iter().enumerate() {
        for &big_r in &radii[k + 1..] {
            let whole = est(1, big_r, "qm/whole");
            let a = est(1, r, "qm/inner");
            let b = est(r, big_r, "qm/outer");
            let prod = a.estimate * b.estimate;
            let se = (whole.se.powi(2) + (a.se * b.estimate).powi(2) + (b.se * a.estimate).powi(2)).sqrt();
            assert!(whole.estimate <= prod + 3.0 * se, "r={r} R={big_r}: {} > {prod}", whole.estimate);
        }
    }
}

fn crit(big_r: u32) -> FineCriterion {
    FineCriterion::new(8, 0.1, big_r, HEX_ETA, 0.02).unwrap()
}

/// Ring 9 open, an open spoke along the positive x-axis from ring 9 to the
/// boundary, the interior drawn from `inside`, everything else random.
fn with_ring_and_spoke(ball: &std::sync::Arc<Ball>, seed: u64, inside: impl Fn(Cell, bool) -> bool) -> Configuration {
    let mut rng = stream(seed, "fine", 0);
    let base = Configuration::sample(ball, 0.5, &mut rng);
    Configuration::from_fn(ball, |i| {
        let c = ball.cell(i);
        let d = norm(c);
        if d == 9 {
            true
        } else if d < 9 {
            inside(c, base.get(i))
        } else {
            base.get(i) || matches!(c, Cell::Hex { q, r: 0 } if q > 0)
        }
    })
}

#[test]
fn literal_ring_and_spoke_example_is_not_fine() {
    // The origin-to-boundary spoke makes the 8 interior axis cells pivotal,
    // which exceeds the bound r^(2(1+2ε)) α̂_4 < r/2 = 4.
    let ball = Ball::new(LatticeKind::Hex, 13);
    let cfg = Configuration::from_fn(&ball, |i| {
        let c = ball.cell(i);
        norm(c) == 9 || matches!(c, Cell::Hex { q, r: 0 } if q >= 0)
    });
    let x = Crossing::zero_to(&ball, 13);
    let interior_piv = x.pivotals(&cfg).into_iter().filter(|&i| (1..9).contains(&ball.dist(i))).count();
    assert_eq!(interior_piv, 8);
    assert!(!is_fine(&cfg, &crit(13)));
}

#[test]
fn constructed_fine_configuration() {
    let ball = Ball::new(LatticeKind::Hex, 13);
    let ring = validate_circuit(&hex_ring(9)).unwrap();
    for a in 0..=2 {
        let slim = slim_config(8, &ring, a).unwrap();
        let cfg = with_ring_and_spoke(&ball, 40 + a as u64, |c, _| slim[&c]);
        assert!(is_fine(&cfg, &crit(13)), "a = {a}");
        assert_eq!(thin(&cfg, &crit(13)).unwrap(), cfg);
    }
}

#[test]
fn circuit_outside_radius_is_not_fine() {
    // Ring 9 closed, ring 10 open: Γ_8 = ring 10, outside B_9.
    let ball = Ball::new(LatticeKind::Hex, 13);
    let cfg = Configuration::from_fn(&ball, |i| {
        let c = ball.cell(i);
        let d = norm(c);
        d == 10 || (d != 9 && matches!(c, Cell::Hex { q, r: 0 } if q >= 0)) || (d < 9 && d > 4)
    });
    let g = innermost_circuit(&cfg, 8).unwrap();
    assert_eq!(g.max_norm(), 10);
    assert!(!is_fine(&cfg, &crit(13)));
}

#[test]
fn slim_pivotals_match_oracle() {
    for (r, ring, a) in [(4u32, 6u32, 0usize), (4, 6, 1), (4, 6, 2), (8, 9, 0), (8, 9, 3), (8, 11, 4)] {
        let gamma = validate_circuit(&hex_ring(ring)).unwrap();
        let slim = slim_config(r, &gamma, a).unwrap();
        let ball = Ball::new(LatticeKind::Hex, ring);
        let cfg = Configuration::from_fn(&ball, |i| {
            let c = ball.cell(i);
            gamma.contains(c) || slim.get(&c).copied().unwrap_or(false)
        });
        let sphere: Vec<Cell> = gamma.cells().to_vec();
        let piv = oracle::pivotals(&cfg, &|c| norm(c) <= ring, &[ball.cell(ball.origin())], &sphere);
        let inside = piv.iter().filter(|c| norm(**c) > 0 && gamma.interior().contains(c)).count();
        assert_eq!(inside, a, "r={r} ring={ring} a={a}");
        for (c, open) in &slim {
            if norm(*c) <= r / 2 {
                assert_eq!(*open, matches!(c, Cell::Hex { r: 0, .. }));
            }
        }
    }
}

/// Thinning keeps the configuration off Int(Γ_r), keeps |Piv_{0↔R}| and is
/// idempotent, on random configurations with a forced circuit and spoke.
#[test]
fn thinning_properties_on_random_configurations() {
    let ball = Ball::new(LatticeKind::Hex, 13);
    let c = crit(13);
    let mut fine = 0;
    for seed in 0..400 {
        let cfg = with_ring_and_spoke(&ball, seed, |_, b| b);
        let t = thin(&cfg, &c).unwrap();
        if !is_fine(&cfg, &c) {
            assert_eq!(t, cfg);
            continue;
        }
        fine += 1;
        let gamma = innermost_circuit(&cfg, 8).unwrap();
        for i in 0..ball.len() as u32 {
            if !gamma.interior().contains(&ball.cell(i)) {
                assert_eq!(t.get(i), cfg.get(i));
            }
        }
        let before = oracle::pivotals_zero_to_r(&cfg, 13).len();
        let after = oracle::pivotals_zero_to_r(&t, 13).len();
        assert_eq!(before, after, "seed {seed}");
        assert!(is_fine(&t, &c));
        assert_eq!(thin(&t, &c).unwrap(), t);
    }
    assert!(fine >= 10, "only {fine} Fine samples");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distance_is_a_metric(a in (-20i32..=20, -20i32..=20), b in (-20i32..=20, -20i32..=20), c in (-20i32..=20, -20i32..=20)) {
        use perclab::lattice::distance;
        let (a, b, c) = (Cell::hex(a.0, a.1), Cell::hex(b.0, b.1), Cell::hex(c.0, c.1));
        prop_assert_eq!(distance(a, b), distance(b, a));
        prop_assert!(distance(a, c) <= distance(a, b) + distance(b, c));
        prop_assert_eq!(distance(a, a), 0);
    }

    #[test]
    fn circuits_separate_interior(seed in 0u64..1_000_000, r in 0u32..4) {
        // Flood fill from outside B_{M+1} avoiding Γ never enters Int(Γ).
        let ball = Ball::new(LatticeKind::Hex, 7);
        let mut rng = stream(seed, "flood", 0);
        let cfg = Configuration::sample(&ball, 0.6, &mut rng);
        if let Some(g) = innermost_circuit(&cfg, r) {
            let big = Ball::new(LatticeKind::Hex, g.max_norm() + 1);
            let mut seen = vec![false; big.len()];
            let mut stack: Vec<u32> = big.sphere(g.max_norm() + 1).to_vec();
            stack.iter().for_each(|&i| seen[i as usize] = true);
            while let Some(v) = stack.pop() {
                prop_assert!(!g.interior().contains(&big.cell(v)));
                for &w in big.nbrs(v) {
                    if w != perclab::lattice::NONE && !seen[w as usize] && !g.contains(big.cell(w)) {
                        seen[w as usize] = true;
                        stack.push(w);
                    }
                }
            }
            prop_assert!(g.encloses_ball(r));
        }
    }

    #[test]
    fn fast_pivotals_match_naive(seed in 0u64..1_000_000, big_r in 2u32..6) {
        let ball = Ball::new(LatticeKind::Hex, big_r);
        let mut rng = stream(seed, "piv", 0);
        let cfg = Configuration::sample(&ball, 0.5, &mut rng);
        let x = Crossing::zero_to(&ball, big_r);
        prop_assert_eq!(x.pivotals(&cfg), x.pivotals_naive(&cfg));
    }
}
