//! Desk-scale experiments: exponent fits, the near-critical window, the
//! scaling relation, quenched and annealed IIC checks, the thinned/normal
//! comparison, the centre-cannot-hold probability and cluster collapse.
//!
//! Every experiment is a pure function of its parameters and a master seed;
//! each measured point draws from its own labelled stream.

mod centre;
mod exponents;
mod iic;
mod window;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{par_trials, Rng, Seeder};
use crate::stats::{normal_quantile, wls};

pub use centre::{exp_centre_cannot_hold, g_schedule, reconnection_probability, CentreRow};
pub use exponents::{
    exp_arm_exponents, exp_collapse, exp_pivotal_scale, exp_volume_exponent, iic_volume, rhombus_crossing, rhombus_pivotal_mean, ArmExponents,
    CollapseReport, PivotalScale,
};
pub use iic::{exp_fetic_vs_iic, exp_quenched_iic, radial_second_moment, FeticConfig, FeticReport, QuenchedPoint};
pub use window::{exp_kesten_relation, exp_window, KestenRow, WindowRow};

/// Trials of one measured point are split into this many chunks, each with
/// its own stream, so the result does not depend on the thread count.
pub const CHUNKS: u64 = 16;

/// Runs `trials` trials as [`CHUNKS`] parallel chunks. Chunk c of point `key`
/// reads stream `key·2^8 + c` of the seeder and receives its trial count.
pub(crate) fn chunked<T: Send>(seeder: &Seeder, key: u64, trials: u64, f: impl Fn(&mut Rng, u64) -> T + Sync + Send) -> Vec<T> {
    par_trials(CHUNKS, |c| {
        let n = trials / CHUNKS + u64::from(c < trials % CHUNKS);
        f(&mut seeder.rng(key << 8 | c), n)
    })
}

/// One measured point of a scaling curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub x: f64,
    pub value: f64,
    pub se: f64,
    pub trials: u64,
}

/// Weighted log-log fit of value against x.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub quantity: String,
    pub points: Vec<PointEstimate>,
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    /// log value minus the fitted line, per point.
    pub residuals: Vec<f64>,
}

/// Fewest points an exponent fit accepts.
pub const MIN_FIT_POINTS: usize = 4;

impl ExponentFit {
    /// Fits log value = a + b log x with weights (value/se)², the inverse
    /// delta-method variance of log value.
    pub fn fit(quantity: &str, points: Vec<PointEstimate>) -> Result<ExponentFit> {
        if points.len() < MIN_FIT_POINTS {
            return Err(Error::InsufficientPoints { need: MIN_FIT_POINTS, got: points.len() });
        }
        if let Some(p) = points.iter().find(|p| !(p.x > 0.0 && p.value > 0.0)) {
            return Err(Error::InvalidParameter(format!("{quantity}: nonpositive point ({}, {})", p.x, p.value)));
        }
        let xs: Vec<f64> = points.iter().map(|p| p.x.ln()).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.value.ln()).collect();
        let ws: Vec<f64> = points.iter().map(|p| (p.value / p.se.max(1e-12 * p.value)).powi(2)).collect();
        let line = wls(&xs, &ys, &ws)?;
        Ok(ExponentFit {
            quantity: quantity.to_string(),
            points,
            slope: line.slope,
            slope_se: line.slope_se,
            intercept: line.intercept,
            residuals: line.residuals,
        })
    }

    /// Two-sided normal confidence interval for the slope.
    pub fn slope_ci(&self, level: f64) -> (f64, f64) {
        let z = normal_quantile(0.5 + level / 2.0);
        (self.slope - z * self.slope_se, self.slope + z * self.slope_se)
    }

    /// Whether |slope − target| ≤ tol.
    pub fn within(&self, target: f64, tol: f64) -> bool {
        (self.slope - target).abs() <= tol
    }

    /// Fitted value at x.
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }

    /// CSV with columns x, value, se, trials, residual.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,value,se,trials,residual\n");
        for (p, r) in self.points.iter().zip(&self.residuals) {
            s.push_str(&format!("{:?},{:?},{:?},{},{:?}\n", p.x, p.value, p.se, p.trials, r));
        }
        s
    }
}
