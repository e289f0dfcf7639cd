use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dynamics::{coupled_norm_thin, first_exceptional_time, simulate, CoupledSample, DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::experiments::{chunked, PointEstimate};
use crate::lattice::{Ball, LatticeKind};
use crate::measures::{exact, mu_bar, IicPrimeSampler, IicSampler, LocalTimeKind, LocalTimeSeries, ThetaTable};
use crate::rng::{Rng, Seeder};
use crate::static_perc::{Configuration, FineCriterion, HEX_ETA};
use crate::stats::{bootstrap_ratio_ci, tv, Estimate};

/// One horizon of the quenched trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchedPoint {
    pub horizon: f64,
    /// μ̄_r[0, T].
    pub mass: f64,
    /// TV between the B_1 window of ω(χ̄_{r,T}) and the IIC_r marginal;
    /// None when the mass is zero.
    pub tv: Option<f64>,
    pub draws: u64,
}

impl QuenchedPoint {
    pub fn zero_mass(&self) -> bool {
        self.tv.is_none()
    }
}

/// The series restricted to [0, T].
fn truncate(series: &LocalTimeSeries, horizon: f64) -> LocalTimeSeries {
    let mut bp = vec![0.0];
    let mut ds = Vec::new();
    for (a, b, d) in series.pieces() {
        if a >= horizon {
            break;
        }
        ds.push(d);
        bp.push(b.min(horizon));
    }
    LocalTimeSeries::from_pieces(series.r, LocalTimeKind::MuBar, bp, ds)
}

/// `draws` times from μ̄/μ̄[0, T], ascending.
fn sorted_chi(series: &LocalTimeSeries, draws: u64, rng: &mut Rng) -> Vec<f64> {
    let mut us: Vec<f64> = (0..draws).map(|_| rng.random::<f64>() * series.mass).collect();
    us.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(us.len());
    let mut pieces = series.pieces().filter(|p| p.2 > 0.0).peekable();
    let mut acc = 0.0;
    for u in us {
        let mut chi = series.horizon();
        while let Some(&(a, b, d)) = pieces.peek() {
            if acc + d * (b - a) > u {
                chi = a + (u - acc) / d;
                break;
            }
            acc += d * (b - a);
            pieces.next();
        }
        out.push(chi);
    }
    out
}

/// One stationary trajectory on B_r up to the largest horizon; for each T
/// of `horizons`, `draws` samples of χ̄_{r,T} and the TV distance of the B_1
/// window of ω(χ̄) from the exact IIC_r marginal (r ≤ 2).
pub fn exp_quenched_iic(r: u32, horizons: &[f64], draws: u64, seed: u64) -> Result<Vec<QuenchedPoint>> {
    if r == 0 || r > exact::MAX_RADIUS {
        return Err(Error::InvalidParameter(format!("r = {r} must lie in 1..={}", exact::MAX_RADIUS)));
    }
    if draws == 0 {
        return Err(Error::InsufficientTrials);
    }
    if horizons.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter("horizons must be positive".into()));
    }
    let theta = ThetaTable::exact_small();
    let seeder = Seeder::new(seed, "quenched-iic");
    let ball = Ball::new(LatticeKind::Hex, r);
    let t_max = horizons.iter().copied().fold(0.0, f64::max);
    let mut rng = seeder.rng(0);
    let traj = simulate(Configuration::sample(&ball, 0.5, &mut rng), t_max, &mut rng)?;
    let full = mu_bar(&traj, r, &theta)?;
    let target = exact::iic_marginal(r, 1);
    let mut out = Vec::with_capacity(horizons.len());
    for (k, &t) in horizons.iter().enumerate() {
        let series = truncate(&full, t);
        if series.mass <= 0.0 {
            out.push(QuenchedPoint { horizon: t, mass: 0.0, tv: None, draws });
            continue;
        }
        let chis = sorted_chi(&series, draws, &mut seeder.rng(1 + k as u64));
        let mut counts = vec![0u64; target.len()];
        let mut cfg = traj.initial().clone();
        let mut rings = traj.rings().iter().peekable();
        for chi in chis {
            while let Some(ring) = rings.next_if(|ring| ring.time <= chi) {
                cfg.set(ring.cell, ring.state);
            }
            counts[exact::window(&cfg, 1)] += 1;
        }
        let law: Vec<f64> = counts.iter().map(|&c| c as f64 / draws as f64).collect();
        out.push(QuenchedPoint { horizon: t, mass: series.mass, tv: Some(tv(&law, &target)), draws });
    }
    Ok(out)
}

/// Parameters of the thinned/normal comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeticConfig {
    pub r: u32,
    pub epsilon: f64,
    pub big_r: u32,
    pub cap: f64,
    /// Coupled pairs.
    pub pairs: u64,
    /// Trials for α̂_4.
    pub alpha4_trials: u64,
    /// Uses this α̂_4 instead of estimating it.
    pub alpha4_override: Option<f64>,
    /// FETIC_R and IIC_R draws for the window diagnostic (0 skips it).
    pub window_samples: u64,
    pub resamples: usize,
}

impl Default for FeticConfig {
    fn default() -> Self {
        FeticConfig {
            r: 8,
            epsilon: 0.1,
            big_r: 32,
            cap: DEFAULT_CAP,
            pairs: 10_000,
            alpha4_trials: 100_000,
            alpha4_override: None,
            window_samples: 2000,
            resamples: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeticReport {
    pub config: FeticConfig,
    pub criterion: FineCriterion,
    pub pairs: u64,
    pub fine: u64,
    pub good_slow: u64,
    pub n_capped: u64,
    pub t_capped: u64,
    pub min_n: f64,
    pub min_t: f64,
    /// Σ T·1_Fine / Σ N·1_Fine; NaN without Fine samples. Capped times
    /// enter at the cap.
    pub ratio: f64,
    /// 95% percentile-bootstrap interval of the ratio.
    pub ratio_ci: (f64, f64),
    /// Σ T·1_¬Fine / Σ N·1_¬Fine.
    pub non_fine_ratio: f64,
    /// TV between the B_1 windows of FETIC_R and IIC_R draws.
    pub window_tv: Option<f64>,
    pub window_tv_ci: Option<(f64, f64)>,
}

impl FeticReport {
    /// The effect has the predicted sign: the interval lies above 1.
    pub fn ratio_exceeds_one(&self) -> bool {
        self.ratio > 1.0 && self.ratio_ci.0 > 1.0
    }
}

fn window_counts(patterns: &[usize], size: usize) -> Vec<f64> {
    let mut c = vec![0.0; size];
    patterns.iter().for_each(|&p| c[p] += 1.0 / patterns.len() as f64);
    c
}

/// TV of two samples of window patterns with a percentile bootstrap
/// interval.
fn tv_with_ci(a: &[usize], b: &[usize], size: usize, resamples: usize, level: f64, rng: &mut Rng) -> (f64, (f64, f64)) {
    let point = tv(&window_counts(a, size), &window_counts(b, size));
    let pick = |xs: &[usize], rng: &mut Rng| -> Vec<usize> { (0..xs.len()).map(|_| xs[rng.random_range(0..xs.len())]).collect() };
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            let (x, y) = (pick(a, rng), pick(b, rng));
            tv(&window_counts(&x, size), &window_counts(&y, size))
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let lo = ((1.0 - level) / 2.0 * resamples as f64) as usize;
    let hi = (((1.0 + level) / 2.0 * resamples as f64) as usize).min(resamples - 1);
    (point, (stats[lo], stats[hi]))
}

/// Coupled normal/thinned reconnection times at one (r, ε, R) tuple, plus
/// an optional comparison of FETIC_R with IIC_R on the B_1 window.
pub fn exp_fetic_vs_iic(config: &FeticConfig, seed: u64) -> Result<FeticReport> {
    if config.pairs == 0 || config.alpha4_trials == 0 || config.resamples == 0 {
        return Err(Error::InsufficientTrials);
    }
    let seeder = Seeder::new(seed, "fetic-vs-iic");
    let crit = match config.alpha4_override {
        Some(a4) => FineCriterion::new(config.r, config.epsilon, config.big_r, HEX_ETA, a4)?,
        None => FineCriterion::estimate(config.r, config.epsilon, config.big_r, HEX_ETA, config.alpha4_trials, &mut seeder.rng(0))?,
    };
    let big_r = config.big_r;
    let samples: Vec<CoupledSample> = chunked(&seeder.child("pairs"), 0, config.pairs, |rng, n| {
        let mut sampler = IicPrimeSampler::new(big_r);
        (0..n).map(|_| coupled_norm_thin(&crit, config.cap, &mut sampler, rng)).collect::<Result<Vec<_>>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?
    .concat();

    let (fine, rest): (Vec<&CoupledSample>, Vec<&CoupledSample>) = samples.iter().partition(|s| s.fine);
    let sums = |xs: &[&CoupledSample]| xs.iter().fold((0.0, 0.0), |(t, n), s| (t + s.t, n + s.n));
    let (ft, fnorm) = sums(&fine);
    let (rt, rn) = sums(&rest);
    let ratio = if fine.is_empty() { f64::NAN } else { ft / fnorm };
    let ratio_ci = if fine.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let x: Vec<f64> = fine.iter().map(|s| s.t).collect();
        let y: Vec<f64> = fine.iter().map(|s| s.n).collect();
        bootstrap_ratio_ci(&x, &y, config.resamples, 0.95, &mut seeder.rng(1))
    };

    let (window_tv, window_tv_ci) = if config.window_samples == 0 {
        (None, None)
    } else {
        let ball = Ball::new(LatticeKind::Hex, big_r);
        let fetic: Vec<usize> = chunked(&seeder.child("fetic"), 0, config.window_samples, |rng, n| {
            (0..n).map(|_| first_exceptional_time(&ball, big_r, rng).map(|f| exact::window(&f.config, 1))).collect::<Result<Vec<_>>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .concat();
        let iic: Vec<usize> = chunked(&seeder.child("iic"), 0, config.window_samples, |rng, n| {
            let mut sampler = IicSampler::new(big_r);
            (0..n).map(|_| exact::window(&sampler.sample(rng), 1)).collect::<Vec<_>>()
        })
        .concat();
        let (point, ci) = tv_with_ci(&fetic, &iic, 1 << 7, config.resamples, 0.95, &mut seeder.rng(2));
        (Some(point), Some(ci))
    };

    Ok(FeticReport {
        config: config.clone(),
        pairs: samples.len() as u64,
        fine: fine.len() as u64,
        good_slow: samples.iter().filter(|s| s.good_slow).count() as u64,
        n_capped: samples.iter().filter(|s| s.n_capped).count() as u64,
        t_capped: samples.iter().filter(|s| s.t_capped).count() as u64,
        min_n: samples.iter().map(|s| s.n).fold(f64::INFINITY, f64::min),
        min_t: samples.iter().map(|s| s.t).fold(f64::INFINITY, f64::min),
        criterion: crit,
        ratio,
        ratio_ci,
        non_fine_ratio: rt / rn,
        window_tv,
        window_tv_ci,
    })
}

/// Ê[μ̄_r[0, ε]²]/ε for each ε of `epsilons` under stationary dynamics on B_r.
pub fn radial_second_moment(r: u32, epsilons: &[f64], trials: u64, theta: &ThetaTable, seed: u64) -> Result<Vec<PointEstimate>> {
    if trials < 2 {
        return Err(Error::InsufficientTrials);
    }
    theta.get(r)?;
    let seeder = Seeder::new(seed, "radial-second-moment");
    let ball = Ball::new(LatticeKind::Hex, r);
    epsilons
        .iter()
        .enumerate()
        .map(|(k, &eps)| {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidParameter(format!("ε = {eps} must be positive")));
            }
            let masses: Vec<f64> = chunked(&seeder, k as u64, trials, |rng, n| {
                (0..n)
                    .map(|_| {
                        let traj = simulate(Configuration::sample(&ball, 0.5, rng), eps, rng)?;
                        Ok(mu_bar(&traj, r, theta)?.mass.powi(2) / eps)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?
            .concat();
            let e = Estimate::mean(&masses);
            Ok(PointEstimate { x: eps, value: e.value, se: e.se, trials })
        })
        .collect()
}
