//! Seeded random streams.
//!
//! A stream is identified by a master seed, an experiment label and a trial
//! index. The master seed and label are mixed into a 256-bit ChaCha8 key; the
//! trial index selects the ChaCha stream, so every trial reads its own
//! counter-addressed block sequence. Any implementation of ChaCha8 keyed the
//! same way reproduces the streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a hash of a label.
pub fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// The generator for trial `trial` of experiment `label` under `master`.
pub fn stream(master: u64, label: &str, trial: u64) -> Rng {
    let mut state = master ^ label_hash(label).rotate_left(17);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

/// Master seed plus experiment label, handing out per-trial streams.
#[derive(Clone, Debug)]
pub struct Seeder {
    master: u64,
    label: String,
}

impl Seeder {
    pub fn new(master: u64, label: impl Into<String>) -> Self {
        Seeder { master, label: label.into() }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rng(&self, trial: u64) -> Rng {
        stream(self.master, &self.label, trial)
    }

    /// A seeder for a named sub-experiment.
    pub fn child(&self, name: &str) -> Seeder {
        Seeder { master: self.master, label: format!("{}/{}", self.label, name) }
    }
}

/// Runs `f` on every trial index in parallel and returns results in index order.
pub fn par_trials<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}
