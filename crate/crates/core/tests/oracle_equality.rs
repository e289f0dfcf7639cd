use perclab::lattice::{Ball, LatticeKind};
use perclab::oracle;
use perclab::static_perc::Configuration;

#[test]
fn b2_table_has_expected_circuits() {
    // The ring at distance 1 and the ring at distance 2 are both circuits;
    // their interiors are B_0 and B_1.
    let ball = Ball::new(LatticeKind::Hex, 2);
    let sizes: Vec<u32> = oracle::b2_circuits().iter().map(|&(_, int)| int.count_ones()).collect();
    assert!(sizes.contains(&1));
    assert!(sizes.contains(&7));
    let open = Configuration::open(&ball);
    assert_eq!(oracle::b2_innermost_circuit(open.mask(), 0).unwrap().len(), 6);
    assert_eq!(oracle::b2_innermost_circuit(open.mask(), 1).unwrap().len(), 12);
}

#[test]
fn random_b2_configurations() {
    let r = oracle::check_random(2, 10_000, 11);
    assert!(r.passed(), "{r:?}");
}

#[test]
fn random_b3_configurations() {
    let r = oracle::check_random(3, 1_000, 12);
    assert!(r.passed(), "{r:?}");
}

#[test]
fn random_b5_configurations() {
    let r = oracle::check_random(5, 200, 13);
    assert!(r.passed(), "{r:?}");
}

