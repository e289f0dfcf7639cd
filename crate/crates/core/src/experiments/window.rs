use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{chunked, rhombus_crossing, PivotalScale};
use crate::lattice::{Ball, LatticeKind};
use crate::rng::Seeder;
use crate::static_perc::{Configuration, Explorer};
use crate::stats::Estimate;

/// Crossing probabilities at p = 1/2 + s/Ê|Piv_{A(R)}|.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub big_r: u32,
    pub s: f64,
    pub p: f64,
    /// P_p(A(R, 2R)), the annulus crossing R ↔ 2R.
    pub estimate: f64,
    pub se: f64,
    /// P_p(A(R)), the left-right crossing of the R×R rhombus.
    pub rhombus: f64,
    pub rhombus_se: f64,
    pub trials: u64,
}

fn crossing_probability(ball: &std::sync::Arc<Ball>, inner: u32, outer: u32, p: f64, trials: u64, seeder: &Seeder, key: u64) -> Estimate {
    let hits: u64 = chunked(seeder, key, trials, |rng, n| {
        let mut ex = Explorer::new(ball, p);
        (0..n)
            .filter(|_| {
                ex.reset();
                ex.one_arm(inner, outer, rng)
            })
            .count() as u64
    })
    .iter()
    .sum();
    Estimate::binomial(hits, trials)
}

/// Crossing probabilities of A(R) and of the annulus A(R, 2R) across the
/// near-critical window. The pivotal means come from `scale` (interpolated
/// at R); p is clamped to [0, 1].
pub fn exp_window(radii: &[u32], s_values: &[f64], scale: &PivotalScale, trials: u64, seed: u64) -> Result<Vec<WindowRow>> {
    if trials == 0 {
        return Err(Error::InsufficientTrials);
    }
    let seeder = Seeder::new(seed, "window");
    let mut rows = Vec::with_capacity(radii.len() * s_values.len());
    for &r in radii {
        if r == 0 {
            return Err(Error::InvalidParameter("annulus radius must be positive".into()));
        }
        let ball = Ball::new(LatticeKind::Hex, 2 * r);
        let (square, x, _) = rhombus_crossing(r)?;
        let piv = scale.piv_at(r as f64);
        for (k, &s) in s_values.iter().enumerate() {
            let p = (0.5 + s / piv).clamp(0.0, 1.0);
            let key = (r as u64) << 16 | k as u64;
            let hits: u64 = chunked(&seeder.child("rhombus"), key, trials, |rng, n| {
                (0..n).filter(|_| x.occurs(&Configuration::sample(&square, p, rng))).count() as u64
            })
            .iter()
            .sum();
            let e = Estimate::binomial(hits, trials);
            let a = crossing_probability(&ball, r, 2 * r, p, trials, &seeder, key);
            rows.push(WindowRow { big_r: r, s, p, estimate: a.value, se: a.se, rhombus: e.value, rhombus_se: e.se, trials });
        }
    }
    Ok(rows)
}

/// P̂_{1/2+ε}(0 ↔ R_max) next to θ̂(L) at the correlation length
/// L = ρ̂(1/ε).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KestenRow {
    pub epsilon: f64,
    pub connect: f64,
    pub connect_se: f64,
    /// ρ̂(1/ε), rounded and capped at [`MAX_CORRELATION_LENGTH`].
    pub length: u32,
    pub theta: f64,
    pub theta_se: f64,
    pub ratio: f64,
}

/// Largest radius at which θ̂ is measured directly.
pub const MAX_CORRELATION_LENGTH: u32 = 1024;

/// One row per ε of `epsilons`, each side estimated with `trials` samples.
pub fn exp_kesten_relation(epsilons: &[f64], r_max: u32, scale: &PivotalScale, trials: u64, seed: u64) -> Result<Vec<KestenRow>> {
    if trials == 0 {
        return Err(Error::InsufficientTrials);
    }
    if r_max == 0 {
        return Err(Error::InvalidParameter("R_max must be positive".into()));
    }
    let seeder = Seeder::new(seed, "kesten");
    let big = Ball::new(LatticeKind::Hex, r_max);
    let mut rows = Vec::with_capacity(epsilons.len());
    for (k, &eps) in epsilons.iter().enumerate() {
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(Error::InvalidParameter(format!("ε = {eps} must lie in (0, 1/2]")));
        }
        let connect = crossing_probability(&big, 0, r_max, 0.5 + eps, trials, &seeder.child("supercritical"), k as u64);
        let length = (scale.rho(1.0 / eps).round().max(1.0) as u32).min(MAX_CORRELATION_LENGTH);
        let ball = Ball::new(LatticeKind::Hex, length);
        let theta = crossing_probability(&ball, 0, length, 0.5, trials, &seeder.child("critical"), k as u64);
        rows.push(KestenRow {
            epsilon: eps,
            connect: connect.value,
            connect_se: connect.se,
            length,
            theta: theta.value,
            theta_se: theta.se,
            ratio: connect.value / theta.value,
        });
    }
    Ok(rows)
}
