use rand::seq::index;

use super::red::RedRegion;
use super::{Capacity, DisciplineKind, DropReason, Fifo, QueueDiscipline, RedEstimator, RedParams, Verdict};
use crate::packet::Packet;
use crate::rng::SimRng;
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq)]
pub struct ChokeParams {
    /// Pick the number of drop candidates from the average queue (A-CHOKe).
    pub adaptive: bool,
    /// Candidates per arrival when not adaptive; 1 is basic CHOKe.
    pub cand_num: usize,
    /// Regions the `[min_th, max_th)` band is split into when adaptive.
    pub interval_num: usize,
}

impl Default for ChokeParams {
    fn default() -> Self {
        Self {
            adaptive: true,
            cand_num: 1,
            interval_num: 5,
        }
    }
}

/// Number of drop candidates drawn for an arrival seeing average queue `avg`.
///
/// Adaptive mode puts `avg` into region `i` of `interval_num` equal-width
/// regions (averages at or above `max_th` use the top region) and draws `2i`.
pub fn choke_candidate_count(avg: f64, red: &RedParams, p: &ChokeParams) -> usize {
    if !p.adaptive {
        return p.cand_num;
    }
    let k = p.interval_num.max(1);
    let width = (red.max_th - red.min_th) / k as f64;
    let offset = ((avg - red.min_th) / width).floor();
    let region = if offset.is_finite() && offset >= 0.0 {
        (offset as usize + 1).min(k)
    } else {
        1
    };
    2 * region
}

/// CHOKe: RED plus drop-candidate comparison against queued packets.
#[derive(Debug, Clone)]
pub struct Choke {
    fifo: Fifo,
    est: RedEstimator,
    params: ChokeParams,
    rng: SimRng,
}

impl Choke {
    pub fn new(red: RedParams, params: ChokeParams, capacity: Capacity, rng: SimRng) -> Self {
        Self {
            fifo: Fifo::new(capacity),
            est: RedEstimator::new(red),
            params,
            rng,
        }
    }

    pub fn avg(&self) -> f64 {
        self.est.avg
    }

    pub fn estimator_mut(&mut self) -> &mut RedEstimator {
        &mut self.est
    }

    fn admit_tail(&mut self, pkt: Packet) -> Verdict {
        if !self.fifo.has_room_for(&pkt) {
            self.est.note(true);
            return Verdict::drop(DropReason::Overflow);
        }
        self.fifo.push(pkt, ());
        Verdict::accept()
    }
}

impl QueueDiscipline for Choke {
    fn kind(&self) -> DisciplineKind {
        DisciplineKind::Choke
    }

    fn enqueue(&mut self, pkt: Packet, _now: SimTime) -> Verdict {
        self.est.update(self.fifo.len());
        let region = self.est.region();
        if region == RedRegion::Below {
            self.est.count = 0;
            return self.admit_tail(pkt);
        }

        let len = self.fifo.len();
        let m = choke_candidate_count(self.est.avg, &self.est.params, &self.params).min(len);
        let mut matches: Vec<usize> = index::sample(&mut self.rng, len, m)
            .into_iter()
            .filter(|&i| self.fifo.get(i).is_some_and(|c| c.flow == pkt.flow))
            .collect();
        if !matches.is_empty() {
            // Remove back to front so earlier indices stay valid.
            matches.sort_unstable_by(|a, b| b.cmp(a));
            let mut evicted: Vec<Packet> = matches
                .into_iter()
                .filter_map(|i| self.fifo.remove(i).map(|(p, ())| p))
                .collect();
            evicted.reverse();
            self.est.note(true);
            return Verdict {
                admission: super::Admission::Dropped(DropReason::CandidateMatch),
                evicted,
            };
        }

        match region {
            RedRegion::Above => {
                self.est.note(true);
                Verdict::drop(DropReason::Forced)
            }
            _ => {
                if self.est.early_drop(&mut self.rng) {
                    return Verdict::drop(DropReason::Early);
                }
                self.admit_tail(pkt)
            }
        }
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
