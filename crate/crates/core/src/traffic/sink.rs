use std::collections::BTreeSet;

use crate::packet::Packet;

/// Receiver state for one flow: counters plus cumulative-ACK reassembly.
#[derive(Debug, Clone, Default)]
pub struct SinkFlow {
    pub received_packets: u64,
    pub received_bytes: u64,
    /// Next in-order sequence number expected.
    pub next_expected: u64,
    out_of_order: BTreeSet<u64>,
}

impl SinkFlow {
    /// Accepts a data packet and returns the cumulative ACK to send back.
    pub fn receive(&mut self, pkt: &Packet) -> u64 {
        self.received_packets += 1;
        self.received_bytes += u64::from(pkt.size_bytes);
        if pkt.seq == self.next_expected {
            self.next_expected += 1;
            while self.out_of_order.remove(&self.next_expected) {
                self.next_expected += 1;
            }
        } else if pkt.seq > self.next_expected {
            self.out_of_order.insert(pkt.seq);
        }
        self.next_expected
    }

    pub fn buffered(&self) -> usize {
        self.out_of_order.len()
    }
}

/// Receiving end of every flow, indexed by flow id.
#[derive(Debug, Clone)]
pub struct Sink {
    flows: Vec<SinkFlow>,
}

impl Sink {
    pub fn new(n_flows: usize) -> Self {
        Self {
            flows: vec![SinkFlow::default(); n_flows],
        }
    }

    pub fn receive(&mut self, pkt: &Packet) -> u64 {
        self.flows[pkt.flow.index()].receive(pkt)
    }

    pub fn flow(&self, index: usize) -> &SinkFlow {
        &self.flows[index]
    }

    pub fn flows(&self) -> &[SinkFlow] {
        &self.flows
    }
}
