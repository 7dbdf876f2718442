//! Router queue disciplines.
//!
//! Every discipline serves a single FIFO. They differ only in admission:
//! which arrivals are accepted, and (for CHOKe) which already-queued packets
//! are evicted alongside a dropped arrival.

mod blue;
mod choke;
mod droptail;
mod fifo;
mod fred;
mod red;
mod sfb;

use std::fmt;
use std::str::FromStr;

pub use blue::{Blue, BlueParams, MarkingProbability};
pub use choke::{choke_candidate_count, Choke, ChokeParams};
pub use droptail::{droptail_admits, DropTail};
pub use fifo::{Capacity, Fifo};
pub use fred::{Fred, FredParams, FlowAccount};
pub use red::{ewma_update, red_drop_probability, Red, RedEstimator, RedParams};
pub use sfb::{sfb_hash, Sfb, SfbBin, SfbParams};

use crate::packet::Packet;
use crate::rng::SimRng;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DropReason {
    /// Physical buffer overflow.
    Overflow,
    /// Probabilistic early drop (RED curve, BLUE/SFB marking probability).
    Early,
    /// Average queue at or above the upper threshold.
    Forced,
    /// FRED per-flow cap.
    PerFlowLimit,
    /// An SFB accounting bin exceeded its size.
    BinOverflow,
    /// SFB penalty box for non-responsive flows.
    RateLimited,
    /// CHOKe drop candidate matched the arriving flow.
    CandidateMatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Accepted,
    Dropped(DropReason),
}

/// Outcome of offering one packet to a discipline.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub admission: Admission,
    /// Previously queued packets removed by this arrival.
    pub evicted: Vec<Packet>,
}

impl Verdict {
    pub fn accept() -> Self {
        Self {
            admission: Admission::Accepted,
            evicted: Vec::new(),
        }
    }

    pub fn drop(reason: DropReason) -> Self {
        Self {
            admission: Admission::Dropped(reason),
            evicted: Vec::new(),
        }
    }

    pub fn is_accepted(&self) -> bool {
        self.admission == Admission::Accepted
    }

    pub fn drop_reason(&self) -> Option<DropReason> {
        match self.admission {
            Admission::Accepted => None,
            Admission::Dropped(r) => Some(r),
        }
    }
}

/// Uniform admission/service interface shared by all disciplines.
pub trait QueueDiscipline: Send {
    fn kind(&self) -> DisciplineKind;

    fn enqueue(&mut self, pkt: Packet, now: SimTime) -> Verdict;

    /// Removes the head of the FIFO. Called whenever the outgoing link is
    /// free; `None` means the link goes idle.
    fn dequeue(&mut self, now: SimTime) -> Option<Packet>;

    fn len(&self) -> usize;

    fn byte_len(&self) -> u64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn contents(&self) -> Box<dyn Iterator<Item = &Packet> + '_>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DisciplineKind {
    DropTail,
    Red,
    Fred,
    Blue,
    Sfb,
    Choke,
}

impl DisciplineKind {
    pub const ALL: [DisciplineKind; 6] = [
        DisciplineKind::DropTail,
        DisciplineKind::Red,
        DisciplineKind::Fred,
        DisciplineKind::Blue,
        DisciplineKind::Sfb,
        DisciplineKind::Choke,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DisciplineKind::DropTail => "droptail",
            DisciplineKind::Red => "red",
            DisciplineKind::Fred => "fred",
            DisciplineKind::Blue => "blue",
            DisciplineKind::Sfb => "sfb",
            DisciplineKind::Choke => "choke",
        }
    }
}

impl fmt::Display for DisciplineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DisciplineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DisciplineKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                format!("unknown discipline {s:?} (expected droptail, red, fred, blue, sfb or choke)")
            })
    }
}

/// Parameter blocks for every discipline; only the selected one is used.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DisciplineParams {
    pub red: RedParams,
    pub fred: FredParams,
    pub blue: BlueParams,
    pub sfb: SfbParams,
    pub choke: ChokeParams,
}

/// Builds the selected discipline around a FIFO of `capacity`.
///
/// `nominal_packet_size` converts byte capacities to packet equivalents for
/// parameters defined relative to the buffer (SFB bin size).
pub fn build(
    kind: DisciplineKind,
    params: &DisciplineParams,
    capacity: Capacity,
    nominal_packet_size: u32,
    rng: SimRng,
) -> Box<dyn QueueDiscipline> {
    match kind {
        DisciplineKind::DropTail => Box::new(DropTail::new(capacity)),
        DisciplineKind::Red => Box::new(Red::new(params.red.clone(), capacity, rng)),
        DisciplineKind::Fred => Box::new(Fred::new(
            params.red.clone(),
            params.fred.clone(),
            capacity,
            rng,
        )),
        DisciplineKind::Blue => Box::new(Blue::new(params.blue.clone(), capacity, rng)),
        DisciplineKind::Sfb => Box::new(Sfb::new(
            params.sfb.clone(),
            capacity,
            nominal_packet_size,
            rng,
        )),
        DisciplineKind::Choke => Box::new(Choke::new(
            params.red.clone(),
            params.choke.clone(),
            capacity,
            rng,
        )),
    }
}
