use rand::Rng;

use super::{Capacity, DisciplineKind, DropReason, Fifo, QueueDiscipline, Verdict};
use crate::packet::Packet;
use crate::rng::SimRng;
use crate::time::SimTime;

/// One step of the exponentially weighted moving average.
pub fn ewma_update(avg: f64, sample: f64, weight: f64) -> f64 {
    (1.0 - weight) * avg + weight * sample
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedParams {
    /// Lower threshold on the average queue, in packets.
    pub min_th: f64,
    /// Upper threshold on the average queue, in packets.
    pub max_th: f64,
    pub max_p: f64,
    pub w_q: f64,
    /// Spread drops uniformly with `p_b / (1 - count * p_b)`.
    pub count_spread: bool,
}

impl Default for RedParams {
    fn default() -> Self {
        Self {
            min_th: 50.0,
            max_th: 100.0,
            max_p: 0.02,
            w_q: 0.002,
            count_spread: true,
        }
    }
}

/// Drop probability for an arrival given the average queue and the number
/// of packets accepted since the last drop.
pub fn red_drop_probability(avg: f64, p: &RedParams, count: u64) -> f64 {
    if avg < p.min_th {
        return 0.0;
    }
    if avg >= p.max_th {
        return 1.0;
    }
    let p_b = p.max_p * (avg - p.min_th) / (p.max_th - p.min_th);
    if !p.count_spread {
        return p_b.clamp(0.0, 1.0);
    }
    let denom = 1.0 - count as f64 * p_b;
    if denom <= 0.0 {
        1.0
    } else {
        (p_b / denom).clamp(0.0, 1.0)
    }
}

/// Where the average queue sits relative to the thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RedRegion {
    Below,
    Between,
    Above,
}

/// Average-queue estimator and drop-spreading counter shared by the RED
/// family (RED, FRED, CHOKe).
#[derive(Debug, Clone)]
pub struct RedEstimator {
    pub params: RedParams,
    pub avg: f64,
    pub count: u64,
}

impl RedEstimator {
    pub fn new(params: RedParams) -> Self {
        Self {
            params,
            avg: 0.0,
            count: 0,
        }
    }

    pub fn update(&mut self, qlen: usize) -> f64 {
        self.avg = ewma_update(self.avg, qlen as f64, self.params.w_q);
        self.avg
    }

    pub fn region(&self) -> RedRegion {
        if self.avg < self.params.min_th {
            RedRegion::Below
        } else if self.avg >= self.params.max_th {
            RedRegion::Above
        } else {
            RedRegion::Between
        }
    }

    pub fn probability(&self) -> f64 {
        red_drop_probability(self.avg, &self.params, self.count)
    }

    /// Flips the RED coin for an arrival in the band between thresholds and
    /// updates the drop-spreading counter. Returns `true` to drop.
    pub fn early_drop(&mut self, rng: &mut SimRng) -> bool {
        let p = self.probability();
        let drop = p > 0.0 && rng.random::<f64>() < p;
        self.note(drop);
        drop
    }

    /// Records the fate of an arrival for drop spreading.
    pub fn note(&mut self, dropped: bool) {
        if dropped {
            self.count = 0;
        } else {
            self.count += 1;
        }
    }
}

/// Random Early Detection over a single FIFO.
#[derive(Debug, Clone)]
pub struct Red {
    fifo: Fifo,
    est: RedEstimator,
    rng: SimRng,
}

impl Red {
    pub fn new(params: RedParams, capacity: Capacity, rng: SimRng) -> Self {
        Self {
            fifo: Fifo::new(capacity),
            est: RedEstimator::new(params),
            rng,
        }
    }

    pub fn avg(&self) -> f64 {
        self.est.avg
    }

    pub fn estimator_mut(&mut self) -> &mut RedEstimator {
        &mut self.est
    }
}

impl QueueDiscipline for Red {
    fn kind(&self) -> DisciplineKind {
        DisciplineKind::Red
    }

    fn enqueue(&mut self, pkt: Packet, _now: SimTime) -> Verdict {
        self.est.update(self.fifo.len());
        match self.est.region() {
            RedRegion::Below => self.est.count = 0,
            RedRegion::Above => {
                self.est.note(true);
                return Verdict::drop(DropReason::Forced);
            }
            RedRegion::Between => {
                if self.est.early_drop(&mut self.rng) {
                    return Verdict::drop(DropReason::Early);
                }
            }
        }
        if !self.fifo.has_room_for(&pkt) {
            self.est.note(true);
            return Verdict::drop(DropReason::Overflow);
        }
        self.fifo.push(pkt, ());
        Verdict::accept()
    }

    fn dequeue(&mut self, _now: SimTime) -> Option<Packet> {
        self.fifo.pop().map(|(p, ())| p)
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
