use std::sync::Arc;

use perclab::dynamics::{
    arrival_sample, connection_timeline, coupled_from, coupled_norm_thin, first_exceptional_time, simulate, Convention,
    Ring, Trajectory, DEFAULT_CAP,
};
use perclab::lattice::{hex_ring, norm, validate_circuit, Ball, Cell, LatticeKind};
use perclab::measures::{exact, IicPrimeSampler};
use perclab::oracle;
use perclab::rng::stream;
use perclab::stats::{chi2_quantile, empirical, ks_critical_1pct, ks_two_sample, tv, wls, Estimate};
use perclab::static_perc::{is_fine, Configuration, Crossing, FineCriterion, HEX_ETA};
use proptest::prelude::*;
use rand::Rng as _;

fn hex(radius: u32) -> Arc<Ball> {
    Ball::new(LatticeKind::Hex, radius)
}

fn stationary(ball: &Arc<Ball>, horizon: f64, seed: u64, t: u64) -> Trajectory {
    let mut rng = stream(seed, "dyn-test", t);
    let init = Configuration::sample(ball, 0.5, &mut rng);
    simulate(init, horizon, &mut rng).unwrap()
}

#[test]
fn zero_horizon_has_no_rings() {
    let ball = hex(3);
    for t in 0..20 {
        assert!(stationary(&ball, 0.0, 1, t).rings().is_empty());
    }
    let mut rng = stream(1, "neg", 0);
    assert!(simulate(Configuration::open(&ball), -1.0, &mut rng).is_err());
}

#[test]
fn ring_counts_and_resampling() {
    let ball = hex(5);
    assert_eq!(ball.len(), 91);
    let runs = 10_000;
    let mut counts = Vec::with_capacity(runs);
    let (mut changes, mut total) = (0u64, 0u64);
    for t in 0..runs as u64 {
        let traj = stationary(&ball, 1.0, 2, t);
        counts.push(traj.rings().len() as f64);
        let mut cfg = traj.initial().clone();
        for r in traj.rings() {
            changes += (cfg.get(r.cell) != r.state) as u64;
            cfg.set(r.cell, r.state);
        }
        total += traj.rings().len() as u64;
    }
    let mean = Estimate::mean(&counts);
    let sigma = (91.0 / runs as f64).sqrt();
    assert!((mean.value - 91.0).abs() < 3.0 * sigma, "mean ring count {}", mean.value);
    let frac = Estimate::binomial(changes, total);
    assert!(frac.within(0.5, 3.0), "state-changing fraction {frac:?}");
}

#[test]
fn trivial_timelines() {
    let ball = hex(3);
    let open = Trajectory::new(Configuration::open(&ball), vec![], 2.5, Convention::Cadlag).unwrap();
    let tl = connection_timeline(&open, 3).unwrap();
    assert_eq!(tl.intervals.len(), 1);
    let i = tl.intervals[0];
    assert_eq!((i.start, i.end, i.closed_start, i.closed_end), (0.0, 2.5, true, true));
    let closed = Trajectory::new(Configuration::closed(&ball), vec![], 2.5, Convention::Cadlag).unwrap();
    assert!(connection_timeline(&closed, 3).unwrap().intervals.is_empty());
    assert!(connection_timeline(&closed, 4).is_err());
}

#[test]
fn trajectory_validation() {
    let ball = hex(1);
    let ring = |time, cell| Ring { time, cell, state: true };
    let cfg = Configuration::closed(&ball);
    assert!(Trajectory::new(cfg.clone(), vec![ring(0.5, 0), ring(0.5, 1)], 1.0, Convention::Cadlag).is_err());
    assert!(Trajectory::new(cfg.clone(), vec![ring(0.0, 0)], 1.0, Convention::Cadlag).is_err());
    assert!(Trajectory::new(cfg.clone(), vec![ring(1.5, 0)], 1.0, Convention::Cadlag).is_err());
    assert!(Trajectory::new(cfg.clone(), vec![ring(0.5, 7)], 1.0, Convention::Cadlag).is_err());
    let ok = Trajectory::new(cfg, vec![ring(0.5, 3)], 1.0, Convention::Cadlag).unwrap();
    assert!(ok.state_at(0.5).get(3));
    let left = Trajectory::new(ok.initial().clone(), ok.rings().to_vec(), 1.0, Convention::Caglad).unwrap();
    assert!(!left.state_at(0.5).get(3));
}

/// Intervals of {0 ↔ R} rebuilt from scratch: the reference connectivity at
/// time 0 and just after every ring, merged into maximal runs.
fn brute_force_intervals(traj: &Trajectory, r: u32) -> Vec<(f64, f64)> {
    let mut times = vec![0.0];
    times.extend(traj.rings().iter().map(|x| x.time));
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut cfg = traj.initial().clone();
    let mut open_since: Option<f64> = None;
    for (k, &t) in times.iter().enumerate() {
        if k > 0 {
            let ring = traj.rings()[k - 1];
            cfg.set(ring.cell, ring.state);
        }
        let on = oracle::zero_to_r(&cfg, r);
        match (on, open_since) {
            (true, None) => open_since = Some(t),
            (false, Some(s)) => {
                out.push((s, t));
                open_since = None;
            }
            _ => {}
        }
    }
    if let Some(s) = open_since {
        out.push((s, traj.horizon()));
    }
    out
}

#[test]
fn timeline_matches_dense_grid_reference() {
    let ball = hex(3);
    for t in 0..1000 {
        let traj = stationary(&ball, 0.5, 3, t);
        let tl = connection_timeline(&traj, 3).unwrap();
        let got: Vec<(f64, f64)> = tl.intervals.iter().map(|i| (i.start, i.end)).collect();
        assert_eq!(got, brute_force_intervals(&traj, 3), "trajectory {t}");
        for i in &tl.intervals {
            assert_eq!(i.closed_start, true);
            assert_eq!(i.closed_end, i.end == traj.horizon());
        }
        for k in 0..=200 {
            let s = traj.horizon() * k as f64 / 200.0;
            assert_eq!(tl.contains(s), oracle::zero_to_r(&traj.state_at(s), 3), "trajectory {t} at {s}");
        }
        for ring in traj.rings() {
            assert_eq!(tl.contains(ring.time), oracle::zero_to_r(&traj.state_at(ring.time), 3));
        }
    }
}

#[test]
fn interior_endpoints_are_pivotal_rings() {
    let ball = hex(4);
    let mut endpoints = 0;
    for t in 0..300 {
        let traj = stationary(&ball, 1.0, 4, t);
        let tl = connection_timeline(&traj, 4).unwrap();
        for i in &tl.intervals {
            for e in [i.start, i.end] {
                if e <= 0.0 || e >= traj.horizon() {
                    continue;
                }
                endpoints += 1;
                let ring = traj.rings().iter().find(|r| r.time == e).expect("endpoint at a ring time");
                let piv = oracle::pivotals_zero_to_r(&traj.state_at(e), 4);
                assert!(piv.contains(&ball.cell(ring.cell)), "trajectory {t}: ring at {e} not pivotal");
            }
        }
    }
    assert!(endpoints > 100);
}

#[test]
fn reversal_reflects_the_timeline() {
    let ball = hex(4);
    for t in 0..300 {
        let traj = stationary(&ball, 1.5, 5, t);
        let back = traj.reversed();
        assert_eq!(back.convention(), Convention::Caglad);
        assert_eq!(back.final_state(), *traj.initial());
        let forward = connection_timeline(&traj, 4).unwrap();
        assert_eq!(connection_timeline(&back, 4).unwrap(), forward.reflected(), "trajectory {t}");
        assert_eq!(back.reversed().rings().len(), traj.rings().len());
    }
}

#[test]
fn stationarity_of_marginals() {
    let ball = hex(3);
    let runs = 10_000u64;
    let mut open = vec![0u64; ball.len()];
    for t in 0..runs {
        let cfg = stationary(&ball, 1.0, 6, t).final_state();
        (0..ball.len()).for_each(|i| open[i] += cfg.get(i as u32) as u64);
    }
    let n = runs as f64;
    let stat: f64 = open.iter().map(|&k| (k as f64 - n / 2.0).powi(2) / (n / 4.0)).sum();
    let crit = chi2_quantile(0.999, ball.len() as f64);
    assert!(stat < crit, "chi-square {stat} ≥ {crit}");
}

#[test]
fn dynamical_fkg() {
    let ball = hex(3);
    let x = Crossing::zero_to(&ball, 3);
    for horizon in [0.1, 1.0] {
        let runs = 10_000u64;
        let (mut a, mut b, mut ab) = (0u64, 0u64, 0u64);
        for t in 0..runs {
            let traj = stationary(&ball, horizon, 7, t);
            let at0 = x.occurs(traj.initial());
            let at1 = x.occurs(&traj.final_state());
            a += at0 as u64;
            b += at1 as u64;
            ab += (at0 && at1) as u64;
        }
        let (pa, pb) = (Estimate::binomial(a, runs), Estimate::binomial(b, runs));
        let pab = Estimate::binomial(ab, runs);
        assert!(pab.value >= pa.value * pb.value - 3.0 * pab.se, "t = {horizon}: {pab:?} vs {pa:?} {pb:?}");
    }
}

/// FET_1 on B_1 by a fixed time step: each cell rings with probability dt
/// per step and the reference connectivity is checked after every change.
fn grid_fet1(dt: f64, rng: &mut perclab::rng::Rng) -> f64 {
    let ball = hex(1);
    let mut cfg = loop {
        let c = Configuration::sample(&ball, 0.5, rng);
        if !oracle::zero_to_r(&c, 1) {
            break c;
        }
    };
    let mut step = 0u64;
    loop {
        step += 1;
        let mut changed = false;
        for i in 0..ball.len() as u32 {
            if rng.random::<f64>() < dt {
                let s = rng.random::<bool>();
                changed |= cfg.get(i) != s;
                cfg.set(i, s);
            }
        }
        if changed && oracle::zero_to_r(&cfg, 1) {
            return step as f64 * dt;
        }
    }
}

#[test]
fn fet_one_matches_grid_simulator() {
    let n = 10_000;
    let ball = hex(1);
    let mut fast: Vec<f64> = (0..n)
        .map(|t| {
            let s = first_exceptional_time(&ball, 1, &mut stream(8, "fet1", t)).unwrap();
            assert!(s.time > 0.0);
            s.time
        })
        .collect();
    let mut grid: Vec<f64> = (0..n).map(|t| grid_fet1(1e-3, &mut stream(9, "grid", t))).collect();
    let d = ks_two_sample(&mut fast, &mut grid);
    let crit = ks_critical_1pct(n as f64, n as f64);
    assert!(d < crit, "KS {d} ≥ {crit}");
}

#[test]
fn fet_survival_decays_exponentially() {
    for (big_r, n) in [(8u32, 4000u64), (16, 2000), (32, 1000)] {
        let ball = hex(big_r);
        let mut times: Vec<f64> = (0..n)
            .map(|t| {
                let s = first_exceptional_time(&ball, big_r, &mut stream(10, "fet-tail", t)).unwrap();
                assert!(s.time > 0.0);
                s.time
            })
            .collect();
        times.sort_by(f64::total_cmp);
        // log P(FET > t) on a grid from the median to the 99% quantile.
        let t_lo = times[n as usize / 2];
        let t_hi = times[n as usize * 99 / 100];
        let grid: Vec<f64> = (0..12).map(|k| t_lo + (t_hi - t_lo) * k as f64 / 11.0).collect();
        let surv: Vec<f64> = grid.iter().map(|&t| times.iter().filter(|&&x| x > t).count() as f64 / n as f64).collect();
        let ys: Vec<f64> = surv.iter().map(|s| s.ln()).collect();
        let ws: Vec<f64> = surv.iter().map(|&s| n as f64 * s / (1.0 - s).max(1e-9)).collect();
        let fit = wls(&grid, &ys, &ws).unwrap();
        assert!(fit.slope < 0.0 && fit.slope.abs() > 3.0 * fit.slope_se, "R = {big_r}: slope {fit:?}");
        // Beyond the fitted range the tail stays at or below the line.
        let t_far = times[n as usize - 1 - n as usize / 500];
        let s_far = times.iter().filter(|&&x| x > t_far).count() as f64 / n as f64;
        let line = fit.intercept + fit.slope * t_far;
        let slack = 3.0 / (n as f64 * s_far).sqrt();
        assert!(s_far.ln() <= line + slack, "R = {big_r}: tail {} above line {line}", s_far.ln());
    }
}

#[test]
fn fetic_configuration_is_a_first_entry() {
    let ball = hex(6);
    for t in 0..300 {
        let s = first_exceptional_time(&ball, 6, &mut stream(11, "fetic", t)).unwrap();
        assert!(oracle::zero_to_r(&s.config, 6));
        let mut back = s.config.clone();
        back.flip(s.cell);
        assert!(!oracle::zero_to_r(&back, 6));
    }
}

#[test]
fn arrival_sample_properties() {
    let mut sampler = IicPrimeSampler::new(5);
    let x = Crossing::zero_to(sampler.ball(), 5);
    for t in 0..500 {
        let (cfg, s) = arrival_sample(&mut sampler, &mut stream(12, "arrival", t));
        assert!(x.occurs(&cfg));
        let mut cut = cfg.clone();
        cut.set(s, false);
        assert!(!x.occurs(&cut));
    }
}

#[test]
fn arrival_window_law_at_radius_two() {
    let n = 100_000u64;
    let mut sampler = IicPrimeSampler::new(2);
    let mut rng = stream(13, "arrival-law", 0);
    let mut counts = vec![0u64; 128];
    for _ in 0..n {
        let (cfg, _) = arrival_sample(&mut sampler, &mut rng);
        counts[exact::window(&cfg, 1)] += 1;
    }
    let d = tv(&empirical(&counts), &exact::iic_prime_marginal(2, 1));
    assert!(d < 0.02, "TV {d}");
}

fn coupling_criterion() -> FineCriterion {
    FineCriterion::new(8, 0.1, 13, HEX_ETA, 0.02).unwrap()
}

#[test]
fn coupling_without_fine_is_the_identity() {
    let crit = coupling_criterion();
    let mut sampler = IicPrimeSampler::new(13);
    for t in 0..150 {
        let c = coupled_norm_thin(&crit, DEFAULT_CAP, &mut sampler, &mut stream(14, "couple", t)).unwrap();
        assert!(c.n > 0.0 && c.t > 0.0);
        if !c.fine {
            assert_eq!((c.n, c.n_capped), (c.t, c.t_capped));
            assert_eq!(c.s, c.s_thin);
            assert!(!c.good_slow);
        }
    }
}

/// The rings in `shell` open, an open spoke from ring 9 to the boundary,
/// the rest random: a source of Fine arrival configurations at desk scale.
fn forced_fine(
    ball: &Arc<Ball>,
    crit: &FineCriterion,
    shell: std::ops::RangeInclusive<u32>,
    seeds: std::ops::Range<u64>,
) -> Vec<Configuration> {
    seeds
        .filter_map(|seed| {
            let mut rng = stream(seed, "forced-fine", 0);
            let base = Configuration::sample(ball, 0.5, &mut rng);
            let cfg = Configuration::from_fn(ball, |i| {
                let c = ball.cell(i);
                let d = norm(c);
                shell.contains(&d) || base.get(i) || (d > 9 && matches!(c, Cell::Hex { q, r: 0 } if q > 0))
            });
            is_fine(&cfg, crit).then_some(cfg)
        })
        .collect()
}

#[test]
fn coupling_on_fine_arrivals() {
    let crit = coupling_criterion();
    let ball = hex(13);
    let fine = forced_fine(&ball, &crit, 9..=9, 0..400);
    assert!(fine.len() >= 10, "only {} Fine configurations", fine.len());
    assert!(validate_circuit(&hex_ring(9)).unwrap().encloses_ball(8));
    let x = Crossing::zero_to(&ball, 13);
    let mut reselected = 0;
    for (k, cfg) in fine.iter().enumerate() {
        let piv = x.pivotals(cfg);
        for (j, &s) in piv.iter().enumerate().take(6) {
            let mut rng = stream(15, "fine-couple", (k * 100 + j) as u64);
            let mut s_rng = stream(16, "fine-s", (k * 100 + j) as u64);
            let c = coupled_from(cfg, s, &crit, DEFAULT_CAP, &mut rng, &mut s_rng).unwrap();
            assert!(c.fine);
            assert!(c.n > 0.0 && c.t > 0.0);
            if c.good_slow {
                assert!(c.t > 1.0 / 8.0, "Good and N > 1/r but T = {}", c.t);
            }
            if norm(ball.cell(s)) < 9 {
                reselected += 1;
                assert!(norm(ball.cell(c.s_thin)) < 9);
            } else {
                assert_eq!(c.s, c.s_thin);
            }
        }
    }
    assert!(reselected > 0);
    let mut rng = stream(17, "bad", 0);
    let not_pivotal = (0..ball.len() as u32).find(|i| !x.pivotals(&fine[0]).contains(i)).unwrap();
    assert!(coupled_from(&fine[0], not_pivotal, &crit, DEFAULT_CAP, &mut rng.clone(), &mut rng).is_err());
}

#[test]
fn good_and_slow_implies_slow_thinned() {
    // Rings 9 to 12 open and a single open cell on the outer sphere as S,
    // so that Good has a chance to persist over [0, 1/r].
    let crit = coupling_criterion();
    let ball = hex(13);
    let x = Crossing::zero_to(&ball, 13);
    let tip = ball.index(Cell::hex(13, 0)).unwrap();
    let fine: Vec<Configuration> = forced_fine(&ball, &crit, 9..=12, 0..200)
        .into_iter()
        .map(|mut cfg| {
            ball.sphere(13).iter().for_each(|&i| cfg.set(i, i == tip));
            cfg
        })
        .filter(|cfg| is_fine(cfg, &crit))
        .collect();
    let (mut slow, mut runs) = (0, 0);
    for (k, cfg) in fine.iter().enumerate() {
        let outer: Vec<u32> = x.pivotals(cfg).into_iter().filter(|&i| ball.dist(i) == 13).collect();
        for &s in &outer {
            for rep in 0..5u64 {
                let id = (k as u64 * 1000 + s as u64) * 8 + rep;
                let c = coupled_from(cfg, s, &crit, DEFAULT_CAP, &mut stream(20, "slow", id), &mut stream(21, "slow-s", id))
                    .unwrap();
                runs += 1;
                if c.good_slow {
                    slow += 1;
                    assert!(c.n > 1.0 / 8.0);
                    assert!(c.t > 1.0 / 8.0, "Good and N > 1/r but T = {}", c.t);
                }
            }
        }
    }
    assert!(slow > 0, "Good ∩ {{N > 1/r}} never occurred in {runs} runs");
}

#[test]
fn trajectory_bytes_round_trip() {
    let ball = hex(4);
    for t in 0..50 {
        let traj = stationary(&ball, 2.0, 18, t);
        let bytes = traj.to_bytes();
        assert_eq!(Trajectory::from_bytes(&bytes).unwrap(), traj);
        let back = traj.reversed();
        assert_eq!(Trajectory::from_bytes(&back.to_bytes()).unwrap(), back);
        assert!(Trajectory::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}

#[test]
fn simulation_is_reproducible() {
    let ball = hex(6);
    assert_eq!(stationary(&ball, 3.0, 19, 4), stationary(&ball, 3.0, 19, 4));
    assert_ne!(stationary(&ball, 3.0, 19, 4), stationary(&ball, 3.0, 19, 5));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn timeline_is_disjoint_and_ordered(seed in any::<u64>(), radius in 1u32..5, horizon in 0.0f64..3.0) {
        let ball = hex(radius);
        let traj = stationary(&ball, horizon, seed, 0);
        let tl = connection_timeline(&traj, radius).unwrap();
        let mut last = -1.0;
        for i in &tl.intervals {
            prop_assert!(i.start >= 0.0 && i.end <= horizon);
            prop_assert!(i.start > last || (i.start == 0.0 && last < 0.0));
            prop_assert!(i.end >= i.start);
            last = i.end;
        }
        prop_assert!(tl.measure() <= horizon);
    }

    #[test]
    fn reversal_is_an_involution(seed in any::<u64>(), horizon in 0.0f64..2.0) {
        let ball = hex(2);
        let traj = stationary(&ball, horizon, seed, 1);
        let twice = traj.reversed().reversed();
        prop_assert_eq!(twice.initial(), traj.initial());
        prop_assert_eq!(twice.convention(), traj.convention());
        prop_assert_eq!(twice.rings().len(), traj.rings().len());
        for (a, b) in twice.rings().iter().zip(traj.rings()) {
            prop_assert_eq!((a.cell, a.state), (b.cell, b.state));
            prop_assert!((a.time - b.time).abs() <= 1e-12 * horizon.max(1.0));
        }
    }
}
