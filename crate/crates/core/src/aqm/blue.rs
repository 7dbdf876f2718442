use rand::Rng;

use super::{Capacity, DisciplineKind, DropReason, Fifo, QueueDiscipline, Verdict};
use crate::packet::Packet;
use crate::rng::SimRng;
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq)]
pub struct BlueParams {
    /// Increment applied on buffer overflow.
    pub d1: f64,
    /// Decrement applied when the link goes idle.
    pub d2: f64,
    /// Minimum spacing between two updates, in seconds.
    pub freeze_time: f64,
}

impl Default for BlueParams {
    fn default() -> Self {
        Self {
            d1: 0.02,
            d2: 0.002,
            freeze_time: 0.01,
        }
    }
}

/// A marking probability with freeze-time-guarded updates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MarkingProbability {
    pub pm: f64,
    pub last_update: Option<SimTime>,
}

impl MarkingProbability {
    fn frozen(&self, now: SimTime, freeze: SimTime) -> bool {
        matches!(self.last_update, Some(last) if now.saturating_sub(last) <= freeze)
    }

    fn adjust(&mut self, delta: f64, freeze: SimTime, now: SimTime) -> bool {
        if self.frozen(now, freeze) {
            return false;
        }
        self.pm = (self.pm + delta).clamp(0.0, 1.0);
        self.last_update = Some(now);
        true
    }

    /// Returns whether the update was applied.
    pub fn increase(&mut self, d1: f64, freeze: SimTime, now: SimTime) -> bool {
        self.adjust(d1, freeze, now)
    }

    pub fn decrease(&mut self, d2: f64, freeze: SimTime, now: SimTime) -> bool {
        self.adjust(-d2, freeze, now)
    }
}

/// BLUE: a single marking probability driven by loss and idle events.
#[derive(Debug, Clone)]
pub struct Blue {
    fifo: Fifo,
    params: BlueParams,
    freeze: SimTime,
    state: MarkingProbability,
    rng: SimRng,
}

impl Blue {
    pub fn new(params: BlueParams, capacity: Capacity, rng: SimRng) -> Self {
        Self {
            fifo: Fifo::new(capacity),
            freeze: SimTime::from_secs_f64(params.freeze_time),
            params,
            state: MarkingProbability::default(),
            rng,
        }
    }

    pub fn pm(&self) -> f64 {
        self.state.pm
    }

    pub fn state(&self) -> MarkingProbability {
        self.state
    }

    pub fn set_state(&mut self, state: MarkingProbability) {
        self.state = state;
    }

    pub fn on_loss(&mut self, now: SimTime) -> bool {
        self.state.increase(self.params.d1, self.freeze, now)
    }

    pub fn on_idle(&mut self, now: SimTime) -> bool {
        self.state.decrease(self.params.d2, self.freeze, now)
    }
}

impl QueueDiscipline for Blue {
    fn kind(&self) -> DisciplineKind {
        DisciplineKind::Blue
    }

    fn enqueue(&mut self, pkt: Packet, now: SimTime) -> Verdict {
        if !self.fifo.has_room_for(&pkt) {
            self.on_loss(now);
            return Verdict::drop(DropReason::Overflow);
        }
        if self.rng.random::<f64>() < self.state.pm {
            return Verdict::drop(DropReason::Early);
        }
        self.fifo.push(pkt, ());
        Verdict::accept()
    }

    fn dequeue(&mut self, now: SimTime) -> Option<Packet> {
        match self.fifo.pop() {
            Some((p, ())) => Some(p),
            None => {
                self.on_idle(now);
                None
            }
        }
    }

    fn len(&self) -> usize {
        self.fifo.len()
    }

    fn byte_len(&self) -> u64 {
        self.fifo.bytes()
    }

    fn contents(&self) -> Box<dyn Iterator<Item = &Packet> + '_> {
        Box::new(self.fifo.packets())
    }
}
