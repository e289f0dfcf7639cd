//! Small statistics toolkit: binomial and mean estimates, weighted least
//! squares, KS and TV distances, bootstrap intervals.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Point estimate with standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub n: u64,
}

impl Estimate {
    pub fn binomial(successes: u64, trials: u64) -> Estimate {
        let p = successes as f64 / trials as f64;
        Estimate { value: p, se: (p * (1.0 - p) / trials as f64).sqrt(), n: trials }
    }

    pub fn mean(xs: &[f64]) -> Estimate {
        let n = xs.len();
        if n == 0 {
            return Estimate { value: f64::NAN, se: f64::NAN, n: 0 };
        }
        let m = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Estimate { value: m, se: (var / n as f64).sqrt(), n: n as u64 }
    }

    /// Whether `target` lies within `k` standard errors.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.se
    }
}

/// Weighted least-squares line fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

/// Fits y = a + b x with weights w (inverse variances).
pub fn wls(xs: &[f64], ys: &[f64], ws: &[f64]) -> Result<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n || ws.len() != n {
        return Err(Error::InsufficientPoints { need: 2, got: n });
    }
    let sw: f64 = ws.iter().sum();
    let mx = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(ws).map(|(x, w)| w * (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).zip(ws).map(|((x, y), w)| w * (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - intercept - slope * x).collect();
    // Inverse-variance weights give var(slope) = 1/sxx; inflate by the
    // reduced chi-square when the scatter exceeds the stated errors.
    let chi2: f64 = residuals.iter().zip(ws).map(|(r, w)| w * r * r).sum();
    let dof = (n as f64 - 2.0).max(1.0);
    let scale = (chi2 / dof).max(1.0);
    Ok(LineFit { slope, slope_se: (scale / sxx).sqrt(), intercept, residuals })
}

/// Two-sample Kolmogorov–Smirnov distance. Sorts its inputs.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// KS distance between an empirical sample and a continuous CDF. Sorts the sample.
pub fn ks_one_sample(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let mut d = 0f64;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at the 1% level.
pub fn ks_critical_1pct(n: f64, m: f64) -> f64 {
    1.628 * ((n + m) / (n * m)).sqrt()
}

/// Asymptotic one-sample KS critical value at the 1% level.
pub fn ks_critical_1pct_one(n: f64) -> f64 {
    1.628 / n.sqrt()
}

/// Kish effective sample size of a weighted sample.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    s * s / s2
}

/// Total-variation distance between two probability vectors.
pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Normalizes counts into an empirical law.
pub fn empirical(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Percentile bootstrap interval for the ratio of means Σx/Σy over paired samples.
pub fn bootstrap_ratio_ci(x: &[f64], y: &[f64], resamples: usize, level: f64, rng: &mut Rng) -> (f64, f64) {
    let n = x.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut ratios = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let (mut sx, mut sy) = (0.0, 0.0);
        for _ in 0..n {
            let k = rng.random_range(0..n);
            sx += x[k];
            sy += y[k];
        }
        ratios.push(sx / sy);
    }
    ratios.sort_by(f64::total_cmp);
    let lo = ((1.0 - level) / 2.0 * resamples as f64) as usize;
    let hi = (((1.0 + level) / 2.0 * resamples as f64) as usize).min(resamples - 1);
    (ratios[lo], ratios[hi])
}

/// Upper quantile of the standard normal for the few levels the tests use.
pub fn normal_quantile(p: f64) -> f64 {
    // Acklam's rational approximation, accurate to about 1e-9.
    const A: [f64; 6] = [-3.969683028665376e1, 2.209460984245205e2, -2.759285104469687e2, 1.383577518672690e2, -3.066479806614716e1, 2.506628277459239];
    const B: [f64; 5] = [-5.447609879822406e1, 1.615858368580409e2, -1.556989798598866e2, 6.680131188771972e1, -1.328068155288572e1];
    const C: [f64; 6] = [-7.784894002430293e-3, -3.223964580411365e-1, -2.400758277161838, -2.549732539343734, 4.374664141464968, 2.938163982698783];
    const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
    let pl = 0.02425;
    if p < pl {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - pl {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

/// Chi-square quantile by the Wilson–Hilferty approximation.
pub fn chi2_quantile(p: f64, dof: f64) -> f64 {
    let z = normal_quantile(p);
    let h = 2.0 / (9.0 * dof);
    dof * (1.0 - h + z * h.sqrt()).powi(3)
}

/// Pearson statistic Σ (o − e)² / e over cells with e > 0.
pub fn chi2_stat(observed: &[f64], expected: &[f64]) -> f64 {
    observed.iter().zip(expected).filter(|(_, &e)| e > 0.0).map(|(o, e)| (o - e) * (o - e) / e).sum()
}
