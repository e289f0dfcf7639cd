use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use rand::Rng as _;
use rand_distr::Exp1;

use crate::dynamics::Ring;
use crate::rng::Rng;
use crate::static_perc::Coin;

/// Independent rate-one clocks on a set of cells, merged through a priority
/// queue. Each cell's next ring is drawn only when its previous one fires.
#[derive(Clone, Debug)]
pub struct Clocks {
    heap: BinaryHeap<Reverse<(OrderedFloat<f64>, u32)>>,
    coin: Coin,
}

impl Clocks {
    /// Clocks on `cells` started at `start`; rings resample to open with probability `p`.
    pub fn new(cells: impl IntoIterator<Item = u32>, start: f64, p: f64, rng: &mut Rng) -> Clocks {
        let heap = cells
            .into_iter()
            .map(|c| {
                let gap: f64 = rng.sample(Exp1);
                Reverse((OrderedFloat(start + gap), c))
            })
            .collect();
        Clocks { heap, coin: Coin::new(p) }
    }

    /// Time of the next ring, if any clock exists.
    pub fn peek(&self) -> Option<f64> {
        self.heap.peek().map(|Reverse((t, _))| t.0)
    }

    /// Fires the next ring: returns its time, cell and resampled state.
    pub fn next_ring(&mut self, rng: &mut Rng) -> Option<Ring> {
        let Reverse((t, cell)) = self.heap.pop()?;
        let state = self.coin.flip(rng);
        let gap: f64 = rng.sample(Exp1);
        self.heap.push(Reverse((OrderedFloat(t.0 + gap), cell)));
        Some(Ring { time: t.0, cell, state })
    }
}
