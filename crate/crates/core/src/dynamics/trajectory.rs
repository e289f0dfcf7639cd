use serde::{Deserialize, Serialize};

use crate::dynamics::Clocks;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::static_perc::Configuration;

const MAGIC: &[u8; 4] = b"PTRJ";

/// Path convention at ring times.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    /// Right-continuous: the state at a ring time already includes the ring.
    Cadlag,
    /// Left-continuous: the state at a ring time is the one just before it.
    Caglad,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ring {
    pub time: f64,
    pub cell: u32,
    /// State drawn at the ring (it may equal the previous state).
    pub state: bool,
}

/// A sample path of dynamical percolation on a ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    initial: Configuration,
    rings: Vec<Ring>,
    horizon: f64,
    convention: Convention,
}

impl Trajectory {
    pub fn new(initial: Configuration, rings: Vec<Ring>, horizon: f64, convention: Convention) -> Result<Self> {
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!("horizon {horizon}")));
        }
        let mut last = 0.0;
        for r in &rings {
            if !(r.time > last && r.time <= horizon) {
                return Err(Error::InvalidParameter(format!("ring time {} out of order or outside (0, {horizon}]", r.time)));
            }
            if r.cell as usize >= initial.len() {
                return Err(Error::InvalidParameter(format!("ring cell {} outside the region", r.cell)));
            }
            last = r.time;
        }
        Ok(Trajectory { initial, rings, horizon, convention })
    }

    pub fn initial(&self) -> &Configuration {
        &self.initial
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// ω_t under the trajectory's convention.
    pub fn state_at(&self, t: f64) -> Configuration {
        let mut cfg = self.initial.clone();
        for r in &self.rings {
            let applies = match self.convention {
                Convention::Cadlag => r.time <= t,
                Convention::Caglad => r.time < t,
            };
            if !applies {
                break;
            }
            cfg.set(r.cell, r.state);
        }
        cfg
    }

    pub fn final_state(&self) -> Configuration {
        let mut cfg = self.initial.clone();
        self.rings.iter().for_each(|r| cfg.set(r.cell, r.state));
        cfg
    }

    /// The path run backwards from the horizon: a ring at t becomes a ring
    /// at horizon − t restoring the state held before it, and the
    /// continuity convention flips.
    pub fn reversed(&self) -> Trajectory {
        let mut cfg = self.initial.clone();
        let mut before = Vec::with_capacity(self.rings.len());
        for r in &self.rings {
            before.push(cfg.get(r.cell));
            cfg.set(r.cell, r.state);
        }
        let rings = self
            .rings
            .iter()
            .zip(before)
            .rev()
            .map(|(r, old)| Ring { time: self.horizon - r.time, cell: r.cell, state: old })
            .collect();
        let convention = match self.convention {
            Convention::Cadlag => Convention::Caglad,
            Convention::Caglad => Convention::Cadlag,
        };
        Trajectory { initial: cfg, rings, horizon: self.horizon, convention }
    }

    /// Serialized initial configuration followed by the ring records
    /// (time as f64, cell index as u32, new state as u8), all little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.initial.to_bytes();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.horizon.to_le_bytes());
        out.push(matches!(self.convention, Convention::Caglad) as u8);
        out.extend_from_slice(&(self.rings.len() as u64).to_le_bytes());
        for r in &self.rings {
            out.extend_from_slice(&r.time.to_le_bytes());
            out.extend_from_slice(&r.cell.to_le_bytes());
            out.push(r.state as u8);
        }
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Format(format!("trajectory: {m}"));
        let (initial, mut at) = Configuration::from_bytes(data)?;
        let mut take = |n: usize| -> Result<&[u8]> {
            let s = data.get(at..at + n).ok_or_else(|| bad("truncated"))?;
            at += n;
            Ok(s)
        };
        if take(4)? != MAGIC {
            return Err(bad("bad magic"));
        }
        let horizon = f64::from_le_bytes(take(8)?.try_into().unwrap());
        let convention = match take(1)?[0] {
            0 => Convention::Cadlag,
            1 => Convention::Caglad,
            _ => return Err(bad("unknown convention")),
        };
        let n = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
        if n > data.len() / 13 {
            return Err(bad("ring count exceeds data"));
        }
        let mut rings = Vec::with_capacity(n);
        for _ in 0..n {
            let rec = take(13)?;
            let state = match rec[12] {
                0 => false,
                1 => true,
                _ => return Err(bad("bad state byte")),
            };
            rings.push(Ring {
                time: f64::from_le_bytes(rec[..8].try_into().unwrap()),
                cell: u32::from_le_bytes(rec[8..12].try_into().unwrap()),
                state,
            });
        }
        if at != data.len() {
            return Err(bad("trailing bytes"));
        }
        Trajectory::new(initial, rings, horizon, convention)
    }
}

/// Runs the dynamics from `initial` for `horizon` time units with fair
/// resampling on every cell of the configuration's ball.
pub fn simulate(initial: Configuration, horizon: f64, rng: &mut Rng) -> Result<Trajectory> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon {horizon}")));
    }
    let mut rings = Vec::new();
    if horizon > 0.0 {
        let mut clocks = Clocks::new(0..initial.len() as u32, 0.0, 0.5, rng);
        while clocks.peek().is_some_and(|t| t <= horizon) {
            rings.push(clocks.next_ring(rng).expect("clock present"));
        }
    }
    Trajectory::new(initial, rings, horizon, Convention::Cadlag)
}
