use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Ball, LatticeKind};
use crate::rng::Rng;
use crate::static_perc::Explorer;
use crate::stats::Estimate;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaEntry {
    pub r: u32,
    pub estimate: f64,
    pub se: f64,
    pub trials: u64,
    /// Master seed of the estimate; 0 for exact values.
    pub seed: u64,
}

/// θ(r) = P(0 ↔ r) at p = 1/2 by direct sampling.
pub fn estimate_theta(r: u32, trials: u64, rng: &mut Rng) -> Result<ThetaEntry> {
    if trials == 0 {
        return Err(Error::InsufficientTrials);
    }
    let ball = Ball::new(LatticeKind::Hex, r);
    let mut ex = Explorer::new(&ball, 0.5);
    let mut hits = 0u64;
    for _ in 0..trials {
        ex.reset();
        hits += ex.zero_to(r, rng) as u64;
    }
    let e = Estimate::binomial(hits, trials);
    Ok(ThetaEntry { r, estimate: e.value, se: e.se, trials, seed: 0 })
}

/// Radius → θ(r), estimated once and then only read.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ThetaTable {
    entries: BTreeMap<u32, ThetaEntry>,
}

impl ThetaTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Exact values for r ≤ 2 from enumeration.
    pub fn exact_small() -> Self {
        let mut t = Self::new();
        for r in 0..=2 {
            t.insert(ThetaEntry { r, estimate: super::exact::theta(r), se: 0.0, trials: 0, seed: 0 });
        }
        t
    }

    /// Estimates every radius in `radii` with its own substream of `seed`.
    pub fn estimate(radii: &[u32], trials: u64, seed: u64) -> Result<Self> {
        let mut t = Self::new();
        for &r in radii {
            let mut rng = crate::rng::stream(seed, "theta", r as u64);
            let mut e = estimate_theta(r, trials, &mut rng)?;
            e.seed = seed;
            t.insert(e);
        }
        Ok(t)
    }

    pub fn insert(&mut self, e: ThetaEntry) {
        self.entries.insert(e.r, e);
    }

    pub fn entry(&self, r: u32) -> Result<&ThetaEntry> {
        self.entries.get(&r).ok_or(Error::MissingTheta(r))
    }

    pub fn get(&self, r: u32) -> Result<f64> {
        let e = self.entry(r)?;
        if e.estimate <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok(e.estimate)
    }

    pub fn entries(&self) -> impl Iterator<Item = &ThetaEntry> {
        self.entries.values()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for e in self.entries.values() {
            w.serialize(e).map_err(|e| Error::Format(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut t = Self::new();
        for row in csv::Reader::from_reader(text.as_bytes()).deserialize() {
            t.insert(row.map_err(|e: csv::Error| Error::Format(e.to_string()))?);
        }
        Ok(t)
    }
}
