use std::collections::HashMap;

use super::red::RedRegion;
use super::{Capacity, DisciplineKind, DropReason, Fifo, QueueDiscipline, RedEstimator, RedParams, Verdict};
use crate::packet::{FlowId, Packet};
use crate::rng::SimRng;
use crate::time::SimTime;

/// Fraction of the buffer at which two-packet mode caps every flow.
const TWO_PACKET_FILL: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct FredParams {
    /// Packets a flow may always buffer without facing an early drop.
    pub min_q: f64,
    /// Experimental: cap every flow at two packets when the buffer is nearly full.
    pub two_packet_mode: bool,
}

impl Default for FredParams {
    fn default() -> Self {
        Self {
            min_q: 2.0,
            two_packet_mode: false,
        }
    }
}

/// Per-active-flow record. Exists only while the flow has packets queued.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlowAccount {
    pub qlen: usize,
    pub strike: u32,
}

/// Flow Random Early Drop.
#[derive(Debug, Clone)]
pub struct Fred {
    fifo: Fifo,
    est: RedEstimator,
    params: FredParams,
    accounts: HashMap<FlowId, FlowAccount>,
    avgcq: f64,
    rng: SimRng,
}

impl Fred {
    pub fn new(red: RedParams, params: FredParams, capacity: Capacity, rng: SimRng) -> Self {
        Self {
            fifo: Fifo::new(capacity),
            est: RedEstimator::new(red),
            params,
            accounts: HashMap::new(),
            avgcq: 0.0,
            rng,
        }
    }

    pub fn avg(&self) -> f64 {
        self.est.avg
    }

    pub fn avgcq(&self) -> f64 {
        self.avgcq
    }

    pub fn n_active(&self) -> usize {
        self.accounts.len()
    }

    pub fn account(&self, flow: FlowId) -> Option<FlowAccount> {
        self.accounts.get(&flow).copied()
    }

    /// Sum of per-flow buffered packets; equals the queue length.
    pub fn accounted_packets(&self) -> usize {
        self.accounts.values().map(|a| a.qlen).sum()
    }

    /// Current per-flow cap.
    pub fn max_q(&self) -> f64 {
        let red = &self.est.params;
        if self.est.avg >= red.max_th {
            return 2.0;
        }
        if self.params.two_packet_mode {
            let cap = match self.fifo.capacity() {
                Capacity::Packets(n) => self.fifo.len() as f64 / n as f64,
                Capacity::Bytes(b) => self.fifo.bytes() as f64 / b as f64,
            };
            if cap >= TWO_PACKET_FILL {
                return 2.0;
            }
        }
        red.min_th
    }

    fn recompute_avgcq(&mut self) {
        let n = self.accounts.len();
        self.avgcq = if n > 0 {
            self.est.avg / n as f64
        } else {
            self.est.avg
        };
    }
}

impl QueueDiscipline for Fred {
    fn kind(&self) -> DisciplineKind {
        DisciplineKind::Fred
    }

    fn enqueue(&mut self, pkt: Packet, _now: SimTime) -> Verdict {
        self.est.update(self.fifo.len());
        let avg = self.est.avg;
        let max_th = self.est.params.max_th;
        let acct = self.accounts.get(&pkt.flow).copied().unwrap_or_default();
        let qlen = acct.qlen as f64;
        let max_q = self.max_q();

        let unresponsive = qlen >= max_q
            || (avg >= max_th && qlen > 2.0 * self.avgcq)
            || (qlen >= self.avgcq && acct.strike > 1);
        if unresponsive {
            // A flow with nothing queued cannot trip the guard, so the
            // account always exists here.
            if let Some(a) = self.accounts.get_mut(&pkt.flow) {
                a.strike += 1;
            }
            return Verdict::drop(DropReason::PerFlowLimit);
        }

        match self.est.region() {
            RedRegion::Between => {
                if qlen >= self.params.min_q.max(self.avgcq) && self.est.early_drop(&mut self.rng) {
                    return Verdict::drop(DropReason::Early);
                }
            }
            RedRegion::Below => self.est.count = 0,
            RedRegion::Above => {
                self.est.note(true);
                return Verdict::drop(DropReason::Forced);
            }
        }

        if !self.fifo.has_room_for(&pkt) {
            self.est.note(true);
            return Verdict::drop(DropReason::Overflow);
        }
        self.fifo.push(pkt, ());
        self.accounts.entry(pkt.flow).or_default().qlen += 1;
        Verdict::accept()
    }

    fn dequeue(&mut self, _now: SimTime) -> Option<Packet> {
        let (pkt, ()) = self.fifo.pop()?;
        if let Some(a) = self.accounts.get_mut(&pkt.flow) {
            a.qlen -= 1;
            if a.qlen == 0 {
                self.accounts.remove(&pkt.flow);
            }
        }
        self.est.update(self.fifo.len());
        self.recompute_avgcq();
        Some(pkt)
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
