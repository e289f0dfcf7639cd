use serde::{Deserialize, Serialize};

use crate::dynamics::{Convention, Trajectory};
use crate::error::{Error, Result};
use crate::static_perc::{Configuration, Crossing};

/// A maximal time interval on which the event holds, with endpoint closure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub closed_start: bool,
    pub closed_end: bool,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start && !(self.closed_start && self.closed_end)
    }

    pub fn contains(&self, t: f64) -> bool {
        (t > self.start || (t == self.start && self.closed_start)) && (t < self.end || (t == self.end && self.closed_end))
    }
}

/// E_R ∩ [0, horizon] for one trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionTimeline {
    pub r: u32,
    pub horizon: f64,
    pub intervals: Vec<Interval>,
}

impl ConnectionTimeline {
    /// Lebesgue measure of the connection set.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(t))
    }

    /// Mirror image under t ↦ horizon − t.
    pub fn reflected(&self) -> ConnectionTimeline {
        let intervals = self
            .intervals
            .iter()
            .rev()
            .map(|i| Interval {
                start: self.horizon - i.end,
                end: self.horizon - i.start,
                closed_start: i.closed_end,
                closed_end: i.closed_start,
            })
            .collect();
        ConnectionTimeline { r: self.r, horizon: self.horizon, intervals }
    }

    /// Start times of intervals not beginning at 0.
    pub fn arrivals(&self) -> Vec<f64> {
        self.intervals.iter().map(|i| i.start).filter(|&s| s > 0.0).collect()
    }
}

/// Intervals on which `event` holds along the trajectory. The indicator is
/// re-evaluated only at state-changing rings of cells the event looks at,
/// and only when monotonicity leaves the outcome open: opening a cell cannot
/// break an occurring event, closing one cannot create it.
pub fn event_timeline(traj: &Trajectory, event: &Crossing) -> Vec<Interval> {
    let horizon = traj.horizon();
    let cadlag = traj.convention() == Convention::Cadlag;
    let mut cfg: Configuration = traj.initial().clone();
    let mut on = event.occurs(&cfg);
    let mut start = if on { Some((0.0, true)) } else { None };
    let mut out = Vec::new();
    for ring in traj.rings() {
        if cfg.get(ring.cell) == ring.state {
            continue;
        }
        cfg.set(ring.cell, ring.state);
        if !event.is_allowed(ring.cell) || on == ring.state {
            continue;
        }
        let now = event.occurs(&cfg);
        if now == on {
            continue;
        }
        on = now;
        if on {
            start = Some((ring.time, cadlag));
        } else if let Some((s, cs)) = start.take() {
            out.push(Interval { start: s, end: ring.time, closed_start: cs, closed_end: !cadlag });
        }
    }
    if let Some((s, cs)) = start {
        out.push(Interval { start: s, end: horizon, closed_start: cs, closed_end: true });
    }
    out
}

/// E_R: the times at which 0 ↔ R along the trajectory.
pub fn connection_timeline(traj: &Trajectory, r: u32) -> Result<ConnectionTimeline> {
    let ball = traj.initial().ball();
    if r > ball.radius() {
        return Err(Error::InvalidRegion(format!("B_{r} is not inside B_{}", ball.radius())));
    }
    let x = Crossing::zero_to(ball, r);
    Ok(ConnectionTimeline { r, horizon: traj.horizon(), intervals: event_timeline(traj, &x) })
}
