use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "perclab", version, about = "Desk-scale dynamical percolation experiments", args_override_self = true)]
pub struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory; overrides PERCLAB_OUT.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat key=value file whose keys mirror the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// θ(r) = P(0 ↔ r) at p = 1/2.
    Theta(ThetaArgs),
    /// One- and four-arm exponent fits.
    Arm(ArmArgs),
    /// Mean pivotal counts of rhombus crossings and their fit.
    PivotalScale(PivotalScaleArgs),
    /// Crossing probabilities across the near-critical window.
    Window(WindowArgs),
    /// Supercritical connection next to θ at the correlation length.
    Kesten(KestenArgs),
    /// TV trace of quenched χ̄ sampling against IIC_r.
    QuenchedIic(QuenchedArgs),
    /// Coupled thinned/normal reconnection times.
    FeticVsIic(FeticArgs),
    /// Reconnection probability from the axis configuration.
    Centre(CentreArgs),
    /// Collapse of the origin's cluster started from IIC_R.
    Collapse(CollapseArgs),
    /// IIC_r volume growth fit.
    Volume(VolumeArgs),
    /// Exact Fourier–Walsh checks on rhombus crossings.
    Spectrum(SpectrumArgs),
    /// Re-runs a manifest and checks every output bit for bit.
    Replay(ReplayArgs),
    /// Oracle-equality suites.
    Selftest(SelftestArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Theta(_) => "theta",
            Command::Arm(_) => "arm",
            Command::PivotalScale(_) => "pivotal-scale",
            Command::Window(_) => "window",
            Command::Kesten(_) => "kesten",
            Command::QuenchedIic(_) => "quenched-iic",
            Command::FeticVsIic(_) => "fetic-vs-iic",
            Command::Centre(_) => "centre",
            Command::Collapse(_) => "collapse",
            Command::Volume(_) => "volume",
            Command::Spectrum(_) => "spectrum",
            Command::Replay(_) => "replay",
            Command::Selftest(_) => "selftest",
        }
    }

    /// The master seed; None for replay.
    pub fn seed(&self) -> Option<u64> {
        Some(match self {
            Command::Theta(a) => a.seed,
            Command::Arm(a) => a.seed,
            Command::PivotalScale(a) => a.seed,
            Command::Window(a) => a.seed,
            Command::Kesten(a) => a.seed,
            Command::QuenchedIic(a) => a.seed,
            Command::FeticVsIic(a) => a.seed,
            Command::Centre(a) => a.seed,
            Command::Collapse(a) => a.seed,
            Command::Volume(a) => a.seed,
            Command::Spectrum(a) => a.seed,
            Command::Selftest(a) => a.seed,
            Command::Replay(_) => return None,
        })
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            Command::Theta(a) => a.seed = seed,
            Command::Arm(a) => a.seed = seed,
            Command::PivotalScale(a) => a.seed = seed,
            Command::Window(a) => a.seed = seed,
            Command::Kesten(a) => a.seed = seed,
            Command::QuenchedIic(a) => a.seed = seed,
            Command::FeticVsIic(a) => a.seed = seed,
            Command::Centre(a) => a.seed = seed,
            Command::Collapse(a) => a.seed = seed,
            Command::Volume(a) => a.seed = seed,
            Command::Spectrum(a) => a.seed = seed,
            Command::Selftest(a) => a.seed = seed,
            Command::Replay(_) => {}
        }
    }
}

// The seed lives at the top level of a manifest, so parameter sets skip it.

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaArgs {
    #[arg(long, default_value_t = 1)]
    pub r: u32,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [8u32, 16, 32, 64, 128])]
    pub one_radii: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_values_t = [8u32, 16, 32, 64])]
    pub four_radii: Vec<u32>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PivotalScaleArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [8u32, 16, 32, 64, 128])]
    pub radii: Vec<u32>,
    #[arg(long, default_value_t = 400)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [16u32, 32, 64])]
    pub radii: Vec<u32>,
    #[arg(long = "s", value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-1.0f64, 0.0, 1.0])]
    pub s: Vec<f64>,
    /// Radii of the pivotal scale measured first.
    #[arg(long, value_delimiter = ',', default_values_t = [8u32, 16, 32, 64, 128])]
    pub scale_radii: Vec<u32>,
    #[arg(long, default_value_t = 400)]
    pub scale_trials: u64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KestenArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.02f64, 0.05, 0.1])]
    pub epsilons: Vec<f64>,
    #[arg(long, default_value_t = 256)]
    pub r_max: u32,
    #[arg(long, value_delimiter = ',', default_values_t = [8u32, 16, 32, 64, 128])]
    pub scale_radii: Vec<u32>,
    #[arg(long, default_value_t = 400)]
    pub scale_trials: u64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchedArgs {
    #[arg(long, default_value_t = 2)]
    pub r: u32,
    #[arg(long, value_delimiter = ',', default_values_t = [100.0f64, 1000.0, 10_000.0])]
    pub horizons: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub draws: u64,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeticArgs {
    #[arg(long, default_value_t = 8)]
    pub r: u32,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 32)]
    pub big_r: u32,
    #[arg(long, default_value_t = perclab::dynamics::DEFAULT_CAP)]
    pub cap: f64,
    #[arg(long, default_value_t = 10_000)]
    pub pairs: u64,
    #[arg(long, default_value_t = 100_000)]
    pub alpha4_trials: u64,
    /// Uses this α̂_4 instead of estimating it.
    #[arg(long)]
    pub alpha4: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub window_samples: u64,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentreArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [16u32, 32, 64])]
    pub ns: Vec<u32>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseArgs {
    #[arg(long, default_value_t = 256)]
    pub big_r: u32,
    #[arg(long, value_delimiter = ',', default_values_t = [0.00390625f64, 0.0078125, 0.015625, 0.03125, 0.0625, 0.125, 0.25])]
    pub times: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeArgs {
    #[arg(long, default_value_t = 64)]
    pub r: u32,
    #[arg(long, value_delimiter = ',', default_values_t = [2u32, 4, 8, 16, 32])]
    pub ns: Vec<u32>,
    #[arg(long, default_value_t = 500)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumArgs {
    /// Rhombus sides (at most 4).
    #[arg(long, value_delimiter = ',', default_values_t = [3usize, 4])]
    pub sides: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1f64, 0.3, 1.0, 3.0])]
    pub times: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestArgs {
    /// Random configurations of B_3.
    #[arg(long, default_value_t = 10_000)]
    pub b3_samples: u64,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
