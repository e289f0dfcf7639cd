use std::sync::Arc;

use base64::Engine as _;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::lattice::{Ball, Cell, LatticeKind, Region};
use crate::rng::Rng;

const MAGIC: &[u8; 4] = b"PCFG";

/// Open/closed state of every cell of a ball, one bit per cell in the ball's
/// row-major index order.
#[derive(Clone, Debug)]
pub struct Configuration {
    ball: Arc<Ball>,
    bits: Vec<u64>,
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.ball.kind() == other.ball.kind() && self.ball.radius() == other.ball.radius() && self.bits == other.bits
    }
}

impl Eq for Configuration {}

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

impl Configuration {
    pub fn closed(ball: &Arc<Ball>) -> Self {
        Configuration { ball: ball.clone(), bits: vec![0; words(ball.len())] }
    }

    pub fn open(ball: &Arc<Ball>) -> Self {
        let mut c = Self::closed(ball);
        c.bits.iter_mut().for_each(|w| *w = u64::MAX);
        c.mask_tail();
        c
    }

    pub fn from_fn(ball: &Arc<Ball>, f: impl Fn(u32) -> bool) -> Self {
        let mut c = Self::closed(ball);
        for i in 0..ball.len() as u32 {
            if f(i) {
                c.set(i, true);
            }
        }
        c
    }

    /// Configuration on a ball of at most 64 cells from a bit mask.
    pub fn from_mask(ball: &Arc<Ball>, mask: u64) -> Self {
        assert!(ball.len() <= 64);
        let mut c = Self::closed(ball);
        c.bits[0] = mask;
        c.mask_tail();
        c
    }

    /// Bit mask of a configuration on at most 64 cells.
    pub fn mask(&self) -> u64 {
        assert!(self.len() <= 64);
        self.bits[0]
    }

    /// I.i.d. Bernoulli(p) cells.
    pub fn sample(ball: &Arc<Ball>, p: f64, rng: &mut Rng) -> Self {
        let mut c = Self::closed(ball);
        if p == 0.5 {
            c.bits.iter_mut().for_each(|w| *w = rng.next_u64());
            c.mask_tail();
        } else {
            let coin = Coin::new(p);
            for i in 0..ball.len() as u32 {
                if coin.flip(rng) {
                    c.set(i, true);
                }
            }
        }
        c
    }

    fn mask_tail(&mut self) {
        let n = self.ball.len();
        if n % 64 != 0 {
            let last = self.bits.len() - 1;
            self.bits[last] &= (1u64 << (n % 64)) - 1;
        }
    }

    pub fn ball(&self) -> &Arc<Ball> {
        &self.ball
    }

    pub fn kind(&self) -> LatticeKind {
        self.ball.kind()
    }

    pub fn region(&self) -> Region {
        Region::ball(self.ball.kind(), self.ball.radius())
    }

    pub fn len(&self) -> usize {
        self.ball.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ball.is_empty()
    }

    #[inline]
    pub fn get(&self, i: u32) -> bool {
        self.bits[(i >> 6) as usize] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: u32, open: bool) {
        let w = &mut self.bits[(i >> 6) as usize];
        if open {
            *w |= 1 << (i & 63);
        } else {
            *w &= !(1 << (i & 63));
        }
    }

    #[inline]
    pub fn flip(&mut self, i: u32) {
        self.bits[(i >> 6) as usize] ^= 1 << (i & 63);
    }

    /// Every cell flipped.
    pub fn complement(&self) -> Configuration {
        let mut c = Configuration { ball: self.ball.clone(), bits: self.bits.iter().map(|w| !w).collect() };
        c.mask_tail();
        c
    }

    pub fn is_open(&self, c: Cell) -> bool {
        self.ball.index(c).is_some_and(|i| self.get(i))
    }

    pub fn count_open(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    /// The states of the listed cells packed into an integer, bit k for cell k.
    pub fn pattern(&self, cells: &[u32]) -> u64 {
        cells.iter().enumerate().fold(0, |acc, (k, &i)| acc | (self.get(i) as u64) << k)
    }

    /// Binary form: magic, payload length, lattice tag, region tag and radius,
    /// cell count, then the row-major bit stream.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len();
        let mut payload = Vec::with_capacity(10 + n.div_ceil(8));
        payload.push(self.kind().tag());
        payload.push(0u8);
        payload.extend_from_slice(&self.ball.radius().to_le_bytes());
        payload.extend_from_slice(&(n as u32).to_le_bytes());
        let mut byte = 0u8;
        for i in 0..n as u32 {
            if self.get(i) {
                byte |= 1 << (i % 8);
            }
            if i % 8 == 7 {
                payload.push(byte);
                byte = 0;
            }
        }
        if n % 8 != 0 {
            payload.push(byte);
        }
        let mut out = Vec::with_capacity(8 + payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&payload);
        out
    }

    /// Parses [`Configuration::to_bytes`] output; returns the bytes consumed.
    pub fn from_bytes(data: &[u8]) -> Result<(Self, usize)> {
        let bad = |m: &str| Error::Format(format!("configuration: {m}"));
        if data.len() < 8 || &data[..4] != MAGIC {
            return Err(bad("bad magic"));
        }
        let len = u32::from_le_bytes(data[4..8].try_into().unwrap()) as usize;
        let payload = data.get(8..8 + len).ok_or_else(|| bad("truncated"))?;
        if payload.len() < 10 {
            return Err(bad("short header"));
        }
        let kind = LatticeKind::from_tag(payload[0]).ok_or_else(|| bad("unknown lattice"))?;
        if payload[1] != 0 {
            return Err(bad("unsupported region kind"));
        }
        let radius = u32::from_le_bytes(payload[2..6].try_into().unwrap());
        let n = u32::from_le_bytes(payload[6..10].try_into().unwrap()) as usize;
        if radius > 4096 {
            return Err(bad("radius too large"));
        }
        let ball = Ball::new(kind, radius);
        if ball.len() != n || payload.len() != 10 + n.div_ceil(8) {
            return Err(bad("cell count mismatch"));
        }
        let mut cfg = Configuration::closed(&ball);
        for i in 0..n {
            if payload[10 + i / 8] >> (i % 8) & 1 == 1 {
                cfg.set(i as u32, true);
            }
        }
        Ok((cfg, 8 + len))
    }

    pub fn to_base64(&self) -> String {
        base64::engine::general_purpose::STANDARD.encode(self.to_bytes())
    }

    pub fn from_base64(s: &str) -> Result<Self> {
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(s.trim())
            .map_err(|e| Error::Format(e.to_string()))?;
        let (cfg, used) = Self::from_bytes(&bytes)?;
        if used != bytes.len() {
            return Err(Error::Format("trailing bytes".into()));
        }
        Ok(cfg)
    }
}

/// Bernoulli(p) draws from a single 64-bit word each.
#[derive(Clone, Copy, Debug)]
pub struct Coin {
    threshold: u64,
    always: bool,
}

impl Coin {
    pub fn new(p: f64) -> Coin {
        let p = p.clamp(0.0, 1.0);
        Coin { threshold: (p * 18446744073709551616.0) as u64, always: p >= 1.0 }
    }

    #[inline]
    pub fn flip(&self, rng: &mut Rng) -> bool {
        self.always || rng.next_u64() < self.threshold
    }
}

/// A stream of fair bits, 64 per generator call.
#[derive(Debug, Default)]
pub struct FairBits {
    word: u64,
    left: u32,
}

impl FairBits {
    #[inline]
    pub fn next(&mut self, rng: &mut Rng) -> bool {
        if self.left == 0 {
            self.word = rng.next_u64();
            self.left = 64;
        }
        let b = self.word & 1 == 1;
        self.word >>= 1;
        self.left -= 1;
        b
    }
}
