use crate::packet::{FlowId, Packet};
use crate::time::SimTime;

/// Constant-bit-rate sender with exact, jitter-free spacing.
#[derive(Debug, Clone)]
pub struct CbrSource {
    flow: FlowId,
    rate_bps: u64,
    packet_size: u32,
    start: SimTime,
    sent: u64,
}

impl CbrSource {
    pub fn new(flow: FlowId, rate_bps: u64, packet_size: u32, start: SimTime) -> Self {
        assert!(rate_bps > 0, "CBR rate must be positive");
        Self {
            flow,
            rate_bps,
            packet_size,
            start,
            sent: 0,
        }
    }

    pub fn flow(&self) -> FlowId {
        self.flow
    }

    pub fn rate_bps(&self) -> u64 {
        self.rate_bps
    }

    pub fn sent(&self) -> u64 {
        self.sent
    }

    /// Nominal inter-packet gap.
    pub fn gap(&self) -> SimTime {
        SimTime::serialization(self.packet_size, self.rate_bps)
    }

    /// Send time of packet `k`, computed from the start time so that
    /// rounding never accumulates.
    fn send_time(&self, k: u64) -> SimTime {
        let bits = u128::from(self.packet_size) * 8 * 1_000_000_000;
        let offset = u128::from(k) * bits / u128::from(self.rate_bps);
        self.start + SimTime::from_nanos(offset as u64)
    }

    pub fn next_send(&self) -> SimTime {
        self.send_time(self.sent)
    }

    pub fn emit(&mut self, now: SimTime) -> Packet {
        debug_assert_eq!(now, self.next_send());
        let pkt = Packet::data(self.flow, self.sent, self.packet_size, now);
        self.sent += 1;
        pkt
    }
}
