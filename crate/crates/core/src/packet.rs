use crate::time::SimTime;

/// Flow identity. Flows are numbered densely from zero within a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowId(pub u32);

impl FlowId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PacketKind {
    Data,
    Ack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    pub flow: FlowId,
    pub size_bytes: u32,
    /// Segment number for data, cumulative next-expected segment for ACKs.
    pub seq: u64,
    pub kind: PacketKind,
    pub created_at: SimTime,
}

impl Packet {
    pub fn data(flow: FlowId, seq: u64, size_bytes: u32, created_at: SimTime) -> Self {
        assert!(size_bytes > 0, "packet size must be positive");
        Self {
            flow,
            size_bytes,
            seq,
            kind: PacketKind::Data,
            created_at,
        }
    }

    pub fn ack(flow: FlowId, ack_seq: u64, created_at: SimTime) -> Self {
        Self {
            flow,
            size_bytes: ACK_SIZE_BYTES,
            seq: ack_seq,
            kind: PacketKind::Ack,
            created_at,
        }
    }
}

pub const ACK_SIZE_BYTES: u32 = 40;
pub const DEFAULT_PACKET_SIZE: u32 = 1000;
