use super::{Capacity, DisciplineKind, DropReason, Fifo, QueueDiscipline, Verdict};
use crate::packet::Packet;
use crate::time::SimTime;

/// Accept iff the buffer has room.
pub fn droptail_admits(qlen: usize, capacity: usize) -> bool {
    qlen < capacity
}

#[derive(Debug, Clone)]
pub struct DropTail {
    fifo: Fifo,
}

impl DropTail {
    pub fn new(capacity: Capacity) -> Self {
        Self {
            fifo: Fifo::new(capacity),
        }
    }
}

impl QueueDiscipline for DropTail {
    fn kind(&self) -> DisciplineKind {
        DisciplineKind::DropTail
    }

    fn enqueue(&mut self, pkt: Packet, _now: SimTime) -> Verdict {
        if !self.fifo.has_room_for(&pkt) {
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
