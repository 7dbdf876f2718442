use crate::time::SimTime;

/// Point-to-point link that serializes one packet at a time.
#[derive(Debug, Clone)]
pub struct Link {
    bandwidth_bps: u64,
    prop_delay: SimTime,
    busy_until: SimTime,
}

/// Timing of one transmission on a [`Link`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transmission {
    pub start: SimTime,
    /// Last bit leaves the sender; the link is free again.
    pub tx_end: SimTime,
    /// Last bit arrives at the far end.
    pub delivery: SimTime,
}

impl Link {
    pub fn new(bandwidth_bps: u64, prop_delay: SimTime) -> Self {
        assert!(bandwidth_bps > 0, "link bandwidth must be positive");
        Self {
            bandwidth_bps,
            prop_delay,
            busy_until: SimTime::ZERO,
        }
    }

    pub fn bandwidth_bps(&self) -> u64 {
        self.bandwidth_bps
    }

    pub fn prop_delay(&self) -> SimTime {
        self.prop_delay
    }

    pub fn busy_until(&self) -> SimTime {
        self.busy_until
    }

    pub fn is_idle(&self, now: SimTime) -> bool {
        self.busy_until <= now
    }

    /// Puts `size_bytes` on the wire as soon as the link is free.
    pub fn transmit(&mut self, size_bytes: u32, now: SimTime) -> Transmission {
        let start = now.max(self.busy_until);
        let tx_end = start + SimTime::serialization(size_bytes, self.bandwidth_bps);
        self.busy_until = tx_end;
        Transmission {
            start,
            tx_end,
            delivery: tx_end + self.prop_delay,
        }
    }

    /// One-way latency of an otherwise idle link for a packet of `size_bytes`.
    pub fn unloaded_latency(&self, size_bytes: u32) -> SimTime {
        SimTime::serialization(size_bytes, self.bandwidth_bps) + self.prop_delay
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idle_link_delivery() {
        let mut link = Link::new(1_000_000, SimTime::from_millis(10));
        let tx = link.transmit(1000, SimTime::ZERO);
        assert_eq!(tx.tx_end, SimTime::from_millis(8));
        assert_eq!(tx.delivery, SimTime::from_millis(18));
        assert_eq!(link.busy_until(), SimTime::from_millis(8));
    }

    #[test]
    fn back_to_back_serialization() {
        let mut link = Link::new(1_000_000, SimTime::from_millis(10));
        link.transmit(1000, SimTime::ZERO);
        let tx = link.transmit(1000, SimTime::ZERO);
        assert_eq!(tx.start, SimTime::from_millis(8));
        assert_eq!(tx.delivery, SimTime::from_millis(26));
    }

    #[test]
    #[should_panic(expected = "positive")]
    fn zero_bandwidth_rejected() {
        Link::new(0, SimTime::ZERO);
    }
}
