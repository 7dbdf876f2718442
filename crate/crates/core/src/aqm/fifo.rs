use std::collections::VecDeque;

use crate::packet::Packet;

/// Buffer limit, counted in packets or in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capacity {
    Packets(usize),
    Bytes(u64),
}

impl Capacity {
    /// Whether a queue holding `len` packets / `bytes` bytes has room for a
    /// packet of `size_bytes`.
    pub fn admits(&self, len: usize, bytes: u64, size_bytes: u32) -> bool {
        match *self {
            Capacity::Packets(n) => len < n,
            Capacity::Bytes(b) => bytes + u64::from(size_bytes) <= b,
        }
    }

    /// Capacity expressed in packets of `nominal_size` bytes.
    pub fn in_packets(&self, nominal_size: u32) -> f64 {
        match *self {
            Capacity::Packets(n) => n as f64,
            Capacity::Bytes(b) => b as f64 / f64::from(nominal_size.max(1)),
        }
    }
}

/// Bounded FIFO with a per-entry tag that disciplines use for bookkeeping.
#[derive(Debug, Clone)]
pub struct Fifo<T = ()> {
    entries: VecDeque<(Packet, T)>,
    bytes: u64,
    capacity: Capacity,
}

impl<T> Fifo<T> {
    pub fn new(capacity: Capacity) -> Self {
        Self {
            entries: VecDeque::new(),
            bytes: 0,
            capacity,
        }
    }

    pub fn capacity(&self) -> Capacity {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn bytes(&self) -> u64 {
        self.bytes
    }

    pub fn has_room_for(&self, pkt: &Packet) -> bool {
        self.capacity.admits(self.len(), self.bytes, pkt.size_bytes)
    }

    /// Appends without checking capacity; callers decide admission first.
    pub fn push(&mut self, pkt: Packet, tag: T) {
        debug_assert!(self.has_room_for(&pkt), "FIFO overflow");
        self.bytes += u64::from(pkt.size_bytes);
        self.entries.push_back((pkt, tag));
    }

    pub fn pop(&mut self) -> Option<(Packet, T)> {
        let (pkt, tag) = self.entries.pop_front()?;
        self.bytes -= u64::from(pkt.size_bytes);
        Some((pkt, tag))
    }

    /// Removes the entry at `index`, keeping the order of the others.
    pub fn remove(&mut self, index: usize) -> Option<(Packet, T)> {
        let (pkt, tag) = self.entries.remove(index)?;
        self.bytes -= u64::from(pkt.size_bytes);
        Some((pkt, tag))
    }

    pub fn get(&self, index: usize) -> Option<&Packet> {
        self.entries.get(index).map(|(p, _)| p)
    }

    pub fn packets(&self) -> impl Iterator<Item = &Packet> + '_ {
        self.entries.iter().map(|(p, _)| p)
    }

    pub fn entries(&self) -> impl Iterator<Item = &(Packet, T)> + '_ {
        self.entries.iter()
    }

    pub fn entries_mut(&mut self) -> impl Iterator<Item = &mut (Packet, T)> + '_ {
        self.entries.iter_mut()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packet::FlowId;
    use crate::time::SimTime;

    fn pkt(flow: u32, size: u32) -> Packet {
        Packet::data(FlowId(flow), 0, size, SimTime::ZERO)
    }

    #[test]
    fn packet_capacity_boundary() {
        let c = Capacity::Packets(150);
        assert!(c.admits(149, 0, 1000));
        assert!(!c.admits(150, 0, 1000));
    }

    #[test]
    fn byte_capacity_boundary() {
        let c = Capacity::Bytes(3000);
        assert!(c.admits(2, 2000, 1000));
        assert!(!c.admits(3, 2001, 1000));
        assert_eq!(Capacity::Bytes(300_000).in_packets(1000), 300.0);
    }

    #[test]
    fn remove_keeps_order_and_bytes() {
        let mut f: Fifo = Fifo::new(Capacity::Packets(10));
        for i in 0..4 {
            f.push(pkt(i, 100 + i), ());
        }
        let (removed, ()) = f.remove(1).unwrap();
        assert_eq!(removed.flow, FlowId(1));
        let flows: Vec<u32> = f.packets().map(|p| p.flow.0).collect();
        assert_eq!(flows, vec![0, 2, 3]);
        assert_eq!(f.bytes(), 100 + 102 + 103);
    }
}
