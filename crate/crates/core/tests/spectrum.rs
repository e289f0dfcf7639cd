use std::collections::HashSet;

use perclab::lattice::Cell;
use perclab::oracle;
use perclab::rng::stream;
use perclab::spectrum::{
    decorrelation_exact, decorrelation_mc, pivotal_moments, radial_correlation, spectral_size_moments, walsh_transform,
    RhombusCrossing, MAX_BITS,
};
use perclab::Error;
use proptest::prelude::*;

fn majority3(w: u64) -> bool {
    (w & 7).count_ones() >= 2
}

#[test]
fn dictator_and_parity() {
    let d = walsh_transform(4, |w| w & 1 == 1).unwrap();
    assert_eq!(d.coefficient(1), 1.0);
    assert!((d.total_weight() - d.weight(1)).abs() < 1e-15);
    assert_eq!(spectral_size_moments(&d), (1.0, 1.0));
    let s0 = 0b1011u64;
    let p = walsh_transform(4, |w| (w & s0).count_ones() % 2 == 1).unwrap();
    assert!((p.weight(s0) - 1.0).abs() < 1e-15);
}

#[test]
fn majority_by_direct_enumeration() {
    let m = walsh_transform(3, majority3).unwrap();
    // f̂(S) = 2^-3 Σ_x f(x) χ_S(x), written out row by row.
    for s in 0u64..8 {
        let mut sum = 0.0;
        for x in 0u64..8 {
            let f = if majority3(x) { 1.0 } else { -1.0 };
            let chi: f64 = (0..3).filter(|i| s >> i & 1 == 1).map(|i| if x >> i & 1 == 1 { 1.0 } else { -1.0 }).product();
            sum += f * chi;
        }
        assert_eq!(m.coefficient(s), sum / 8.0, "S = {s:03b}");
    }
    for s in [1u64, 2, 4] {
        assert_eq!(m.coefficient(s), 0.5);
    }
    assert_eq!(m.coefficient(7), -0.5);
    for s in [0u64, 3, 5, 6] {
        assert_eq!(m.coefficient(s), 0.0);
    }
    assert_eq!(spectral_size_moments(&m).0, 1.5);
}

#[test]
fn too_many_bits() {
    assert_eq!(walsh_transform(MAX_BITS + 1, |_| true).unwrap_err(), Error::TooManyBits { n: 25, max: 24 });
    assert!(pivotal_moments(25, |_| true).is_err());
}

#[test]
fn rhombus_crossing_matches_reference() {
    for side in 1..=4 {
        let rc = RhombusCrossing::new(side).unwrap();
        let cells: Vec<Cell> = (0..rc.bits()).map(|b| rc.cell(b)).collect();
        let inside: HashSet<Cell> = cells.iter().copied().collect();
        let left: Vec<Cell> = cells.iter().copied().filter(|c| matches!(c, Cell::Hex { q: 0, .. })).collect();
        let right: Vec<Cell> = cells.iter().copied().filter(|c| matches!(c, Cell::Hex { q, .. } if *q == side as i32 - 1)).collect();
        for w in 0u64..1 << rc.bits() {
            let open: HashSet<Cell> = (0..rc.bits()).filter(|b| w >> b & 1 == 1).map(|b| cells[b]).collect();
            let slow = oracle::dfs_connected(&open, &|c| inside.contains(&c), &left, &right);
            assert_eq!(rc.occurs(w), slow, "side {side}, word {w:#x}");
        }
    }
    assert!(RhombusCrossing::new(9).is_err());
}

#[test]
fn crossing_moments_match_pivotals() {
    for side in [3usize, 4] {
        let rc = RhombusCrossing::new(side).unwrap();
        let spec = walsh_transform(rc.bits(), |w| rc.occurs(w)).unwrap();
        assert!((spec.total_weight() - 1.0).abs() < 1e-12);
        let (s1, s2) = spectral_size_moments(&spec);
        let (p1, p2) = pivotal_moments(rc.bits(), |w| rc.occurs(w)).unwrap();
        assert!((s1 - p1).abs() < 1e-10, "side {side}: {s1} vs {p1}");
        assert!((s2 - p2).abs() < 1e-10, "side {side}: {s2} vs {p2}");
        let back = spec.inverse();
        for (w, v) in back.iter().enumerate() {
            let f = if rc.occurs(w as u64) { 1.0 } else { -1.0 };
            assert!((v - f).abs() < 1e-10);
        }
    }
}

#[test]
fn exact_decorrelation_limits() {
    let rc = RhombusCrossing::new(3).unwrap();
    let a = walsh_transform(9, |w| rc.occurs(w)).unwrap();
    let b = walsh_transform(9, |w| w.count_ones() >= 5).unwrap();
    assert!((decorrelation_exact(&a, &a, 0.0).unwrap() - 1.0).abs() < 1e-12);
    let far = decorrelation_exact(&a, &b, 60.0).unwrap();
    assert!((far - a.coefficient(0) * b.coefficient(0)).abs() < 1e-12);
    let mut last = f64::INFINITY;
    for k in 0..40 {
        let v = decorrelation_exact(&a, &a, k as f64 * 0.1).unwrap();
        assert!(v <= last + 1e-15);
        last = v;
    }
    let c = walsh_transform(4, |w| w == 0).unwrap();
    assert_eq!(decorrelation_exact(&a, &c, 1.0).unwrap_err(), Error::MismatchedBitSets(9, 4));
}

#[test]
fn decorrelation_mc_matches_exact() {
    let rc = RhombusCrossing::new(3).unwrap();
    let spec = walsh_transform(9, |w| rc.occurs(w)).unwrap();
    let mut rng = stream(1, "decor", 0);
    let zero = decorrelation_mc(9, |w| rc.occurs(w), |w| rc.occurs(w), 0.0, 1000, &mut rng).unwrap();
    assert_eq!(zero.value, 1.0);
    for t in [0.1, 0.5, 1.0, 2.0] {
        let e = decorrelation_mc(9, |w| rc.occurs(w), |w| rc.occurs(w), t, 40_000, &mut rng).unwrap();
        let x = decorrelation_exact(&spec, &spec, t).unwrap();
        assert!(e.within(x, 3.0), "t = {t}: {e:?} vs {x}");
    }
}

#[test]
fn radial_correlation_decreases() {
    for big_r in [8u32, 16] {
        let times = [0.05, 0.2, 0.8, 3.2];
        let est = radial_correlation(big_r, &times, 3000, &mut stream(2, "radial", big_r as u64)).unwrap();
        for w in est.windows(2) {
            assert!(w[1].value <= w[0].value + 3.0 * (w[0].se + w[1].se), "R = {big_r}: {est:?}");
        }
        assert!(est[0].value > est[3].value, "R = {big_r}: {est:?}");
    }
}

#[test]
fn csv_exports() {
    let m = walsh_transform(2, |w| w == 3).unwrap();
    let csv = m.to_csv();
    assert!(csv.starts_with("bitmask,coefficient\n0,-0.5\n"));
    assert_eq!(m.size_law_csv().lines().count(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_and_involution(n in 1usize..10, table in proptest::collection::vec(any::<bool>(), 512)) {
        let f = |w: u64| table[w as usize];
        let spec = walsh_transform(n, f).unwrap();
        prop_assert!((spec.total_weight() - 1.0).abs() < 1e-12);
        let back = spec.inverse();
        for (w, v) in back.iter().enumerate() {
            let want = if f(w as u64) { 1.0 } else { -1.0 };
            prop_assert!((v - want).abs() < 1e-10);
        }
        let (s1, s2) = spectral_size_moments(&spec);
        let (p1, p2) = pivotal_moments(n, f).unwrap();
        prop_assert!((s1 - p1).abs() < 1e-10 && (s2 - p2).abs() < 1e-10);
    }
}
