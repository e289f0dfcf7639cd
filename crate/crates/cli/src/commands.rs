use std::collections::BTreeMap;

use perclab::experiments::{
    exp_arm_exponents, exp_centre_cannot_hold, exp_collapse, exp_fetic_vs_iic, exp_kesten_relation, exp_pivotal_scale,
    exp_quenched_iic, exp_volume_exponent, exp_window, ExponentFit, FeticConfig,
};
use perclab::measures::{estimate_theta, exact};
use perclab::oracle;
use perclab::rng::stream;
use perclab::spectrum::{decorrelation_exact, decorrelation_mc, pivotal_moments, spectral_size_moments, walsh_transform, RhombusCrossing};

use crate::args::*;
use crate::error::CliError;

/// What one run produces: the CSV body, the summary statistics and the
/// line printed on success.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub csv: String,
    pub summary: BTreeMap<String, String>,
    pub line: String,
    /// False when the run finished but its own check failed (selftest).
    pub passed: bool,
}

/// Round-trip float formatting.
pub fn fmt(x: f64) -> String {
    format!("{x:?}")
}

struct Table(csv::Writer<Vec<u8>>);

impl Table {
    fn new(header: &[&str]) -> Result<Table, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        Ok(Table(w))
    }

    fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        self.0.write_record(fields)?;
        Ok(())
    }

    fn finish(self) -> Result<String, CliError> {
        let bytes = self.0.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

#[derive(Default)]
struct Summary(BTreeMap<String, String>);

impl Summary {
    fn f(&mut self, key: impl Into<String>, x: f64) {
        self.0.insert(key.into(), fmt(x));
    }

    fn u(&mut self, key: impl Into<String>, x: u64) {
        self.0.insert(key.into(), x.to_string());
    }

    fn b(&mut self, key: impl Into<String>, x: bool) {
        self.0.insert(key.into(), x.to_string());
    }

    fn fit(&mut self, f: &ExponentFit) {
        self.f(format!("{}_slope", f.quantity), f.slope);
        self.f(format!("{}_slope_se", f.quantity), f.slope_se);
    }

    fn line(&self, command: &str) -> String {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{command}: {}", parts.join(" "))
    }
}

fn fit_rows(t: &mut Table, f: &ExponentFit) -> Result<(), CliError> {
    for (p, r) in f.points.iter().zip(&f.residuals) {
        t.row(&[f.quantity.clone(), fmt(p.x), fmt(p.value), fmt(p.se), p.trials.to_string(), fmt(*r)])?;
    }
    Ok(())
}

const FIT_HEADER: [&str; 6] = ["quantity", "x", "value", "se", "trials", "residual"];

/// Runs one experiment in memory.
pub fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    let mut s = Summary::default();
    let mut passed = true;
    let csv = match cmd {
        Command::Theta(a) => {
            let e = estimate_theta(a.r, a.trials, &mut stream(a.seed, "theta", a.r as u64))?;
            let mut t = Table::new(&["r", "estimate", "se", "trials", "exact"])?;
            let exact = (a.r <= exact::MAX_RADIUS).then(|| exact::theta(a.r));
            t.row(&[a.r.to_string(), fmt(e.estimate), fmt(e.se), e.trials.to_string(), exact.map(fmt).unwrap_or_default()])?;
            s.f("estimate", e.estimate);
            s.f("se", e.se);
            if let Some(x) = exact {
                s.f("exact", x);
            }
            t.finish()?
        }
        Command::Arm(a) => {
            let arms = exp_arm_exponents(&a.one_radii, &a.four_radii, a.trials, a.seed)?;
            let mut t = Table::new(&FIT_HEADER)?;
            fit_rows(&mut t, &arms.one_arm)?;
            fit_rows(&mut t, &arms.four_arm)?;
            s.fit(&arms.one_arm);
            s.fit(&arms.four_arm);
            t.finish()?
        }
        Command::PivotalScale(a) => {
            let scale = exp_pivotal_scale(&a.radii, a.trials, a.seed)?;
            let mut t = Table::new(&FIT_HEADER)?;
            fit_rows(&mut t, &scale.fit)?;
            s.fit(&scale.fit);
            s.b("monotone", scale.monotone_within(3.0));
            t.finish()?
        }
        Command::Window(a) => {
            let scale = exp_pivotal_scale(&a.scale_radii, a.scale_trials, a.seed)?;
            let rows = exp_window(&a.radii, &a.s, &scale, a.trials, a.seed)?;
            let mut t = Table::new(&["R", "s", "p", "annulus", "annulus_se", "rhombus", "rhombus_se", "trials"])?;
            for r in &rows {
                t.row(&[r.big_r.to_string(), fmt(r.s), fmt(r.p), fmt(r.estimate), fmt(r.se), fmt(r.rhombus), fmt(r.rhombus_se), r.trials.to_string()])?;
                s.f(format!("annulus_R{}_s{}", r.big_r, fmt(r.s)), r.estimate);
                s.f(format!("rhombus_R{}_s{}", r.big_r, fmt(r.s)), r.rhombus);
            }
            s.fit(&scale.fit);
            t.finish()?
        }
        Command::Kesten(a) => {
            let scale = exp_pivotal_scale(&a.scale_radii, a.scale_trials, a.seed)?;
            let rows = exp_kesten_relation(&a.epsilons, a.r_max, &scale, a.trials, a.seed)?;
            let mut t = Table::new(&["epsilon", "connect", "connect_se", "length", "theta", "theta_se", "ratio"])?;
            for r in &rows {
                t.row(&[fmt(r.epsilon), fmt(r.connect), fmt(r.connect_se), r.length.to_string(), fmt(r.theta), fmt(r.theta_se), fmt(r.ratio)])?;
                s.f(format!("ratio_eps{}", fmt(r.epsilon)), r.ratio);
                s.f(format!("connect_eps{}", fmt(r.epsilon)), r.connect);
            }
            t.finish()?
        }
        Command::QuenchedIic(a) => {
            let pts = exp_quenched_iic(a.r, &a.horizons, a.draws, a.seed)?;
            let mut t = Table::new(&["horizon", "mass", "tv", "draws"])?;
            for p in &pts {
                t.row(&[fmt(p.horizon), fmt(p.mass), p.tv.map(fmt).unwrap_or_default(), p.draws.to_string()])?;
                let key = format!("tv_T{}", fmt(p.horizon));
                match p.tv {
                    Some(tv) => s.f(key, tv),
                    None => {
                        s.0.insert(key, "zero-mass".into());
                    }
                }
            }
            t.finish()?
        }
        Command::FeticVsIic(a) => {
            let config = FeticConfig {
                r: a.r,
                epsilon: a.epsilon,
                big_r: a.big_r,
                cap: a.cap,
                pairs: a.pairs,
                alpha4_trials: a.alpha4_trials,
                alpha4_override: a.alpha4,
                window_samples: a.window_samples,
                resamples: a.resamples,
            };
            let rep = exp_fetic_vs_iic(&config, a.seed)?;
            let opt = |x: Option<f64>| x.map(fmt).unwrap_or_default();
            let mut t = Table::new(&[
                "pairs", "fine", "good_slow", "n_capped", "t_capped", "min_n", "min_t", "ratio", "ratio_lo", "ratio_hi", "non_fine_ratio",
                "alpha4_hat", "window_tv", "window_tv_lo", "window_tv_hi",
            ])?;
            t.row(&[
                rep.pairs.to_string(),
                rep.fine.to_string(),
                rep.good_slow.to_string(),
                rep.n_capped.to_string(),
                rep.t_capped.to_string(),
                fmt(rep.min_n),
                fmt(rep.min_t),
                fmt(rep.ratio),
                fmt(rep.ratio_ci.0),
                fmt(rep.ratio_ci.1),
                fmt(rep.non_fine_ratio),
                fmt(rep.criterion.alpha4_hat),
                opt(rep.window_tv),
                opt(rep.window_tv_ci.map(|c| c.0)),
                opt(rep.window_tv_ci.map(|c| c.1)),
            ])?;
            s.u("fine", rep.fine);
            s.f("ratio", rep.ratio);
            s.f("ratio_lo", rep.ratio_ci.0);
            s.f("ratio_hi", rep.ratio_ci.1);
            s.f("non_fine_ratio", rep.non_fine_ratio);
            s.f("min_n", rep.min_n);
            s.f("min_t", rep.min_t);
            if let Some(tv) = rep.window_tv {
                s.f("window_tv", tv);
            }
            t.finish()?
        }
        Command::Centre(a) => {
            let rows = exp_centre_cannot_hold(&a.ns, a.trials, a.seed)?;
            let mut t = Table::new(&["n", "start", "end", "estimate", "se", "trials"])?;
            for r in &rows {
                t.row(&[r.n.to_string(), fmt(r.start), fmt(r.end), fmt(r.estimate), fmt(r.se), r.trials.to_string()])?;
                s.f(format!("estimate_n{}", r.n), r.estimate);
            }
            t.finish()?
        }
        Command::Collapse(a) => {
            let rep = exp_collapse(a.big_r, &a.times, a.trials, a.seed)?;
            let mut t = Table::new(&["inverse_t", "chi", "se", "trials", "residual", "zero_fraction"])?;
            for ((p, r), z) in rep.fit.points.iter().zip(&rep.fit.residuals).zip(&rep.zero_fraction) {
                t.row(&[fmt(p.x), fmt(p.value), fmt(p.se), p.trials.to_string(), fmt(*r), fmt(*z)])?;
            }
            s.fit(&rep.fit);
            s.b("monotone", rep.monotone);
            s.b("starts_at_r", rep.starts_at_r);
            t.finish()?
        }
        Command::Volume(a) => {
            let fit = exp_volume_exponent(a.r, &a.ns, a.trials, a.seed)?;
            let mut t = Table::new(&FIT_HEADER)?;
            fit_rows(&mut t, &fit)?;
            s.fit(&fit);
            t.finish()?
        }
        Command::Spectrum(a) => {
            let mut t = Table::new(&["side", "t", "exact", "mc", "se", "z"])?;
            for &side in &a.sides {
                let x = RhombusCrossing::new(side)?;
                let n = x.bits();
                let spec = walsh_transform(n, |w| x.occurs(w))?;
                let (spec_mean, _) = spectral_size_moments(&spec);
                let (piv_mean, _) = pivotal_moments(n, |w| x.occurs(w))?;
                let mut max_z = 0.0f64;
                for (k, &time) in a.times.iter().enumerate() {
                    let exact = decorrelation_exact(&spec, &spec, time)?;
                    let mut rng = stream(a.seed, "spectrum", (side as u64) << 8 | k as u64);
                    let mc = decorrelation_mc(n, |w| x.occurs(w), |w| x.occurs(w), time, a.trials, &mut rng)?;
                    let z = (mc.value - exact).abs() / mc.se;
                    max_z = max_z.max(z);
                    t.row(&[side.to_string(), fmt(time), fmt(exact), fmt(mc.value), fmt(mc.se), fmt(z)])?;
                }
                s.f(format!("parseval_error_L{side}"), (spec.total_weight() - 1.0).abs());
                s.f(format!("spec_minus_piv_L{side}"), (spec_mean - piv_mean).abs());
                s.f(format!("max_z_L{side}"), max_z);
            }
            t.finish()?
        }
        Command::Selftest(a) => {
            let suites = [("b2-exhaustive", oracle::check_b2_exhaustive()), ("b3-random", oracle::check_random(3, a.b3_samples, a.seed))];
            let mut t = Table::new(&["suite", "checked", "mismatches", "first"])?;
            for (name, rep) in &suites {
                t.row(&[name.to_string(), rep.checked.to_string(), rep.mismatches.to_string(), rep.first.clone().unwrap_or_default()])?;
                s.u(format!("{name}_checked"), rep.checked);
                s.u(format!("{name}_mismatches"), rep.mismatches);
                passed &= rep.passed();
            }
            t.finish()?
        }
        Command::Replay(_) => return Err(CliError::Usage("replay is not an experiment".into())),
    };
    let line = s.line(cmd.name());
    Ok(Outcome { csv, summary: s.0, line, passed })
}
