//! Stochastic Fair BLUE.
//!
//! Flows are hashed into one bin per level of an `L x N` grid of accounting
//! bins, each running its own BLUE-style marking probability. A flow whose
//! bins all saturate at probability 1 is treated as non-responsive and only
//! admitted through a shared penalty box that spaces admissions by `boxtime`.
//!
//! Two grids are kept. The active grid makes admission decisions while the
//! warm-up grid, hashed with the next set of salts, sees the same traffic.
//! Every `h_interval` the warm grid becomes active, so flows that were
//! already saturating their warm-up bins stay rate-limited across the switch.

use rand::Rng;

use super::blue::MarkingProbability;
use super::{Capacity, DisciplineKind, DropReason, Fifo, QueueDiscipline, Verdict};
use crate::packet::{FlowId, Packet};
use crate::rng::SimRng;
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq)]
pub struct SfbParams {
    pub levels: usize,
    pub bins: usize,
    pub d1: f64,
    pub d2: f64,
    /// Seconds; applied to each bin independently.
    pub freeze_time: f64,
    /// Packets per bin before it counts as overflowing. `None` derives
    /// `1.5 / bins` of the buffer.
    pub bin_size: Option<f64>,
    /// Seconds between two admissions from the penalty box.
    pub boxtime: f64,
    /// Relative jitter applied to `boxtime` per decision, in `[0, 1)`.
    pub boxtime_jitter: f64,
    /// Seconds between hash rotations; zero disables rotation.
    pub h_interval: f64,
}

impl Default for SfbParams {
    fn default() -> Self {
        Self {
            levels: 2,
            bins: 23,
            d1: 0.005,
            d2: 0.001,
            freeze_time: 0.001,
            bin_size: None,
            boxtime: 0.05,
            boxtime_jitter: 0.0,
            h_interval: 5.0,
        }
    }
}

impl SfbParams {
    pub fn effective_bin_size(&self, buffer_packets: f64) -> f64 {
        self.bin_size
            .unwrap_or(1.5 / self.bins as f64 * buffer_packets)
    }
}

/// Maps a flow to a bin of one level. Distinct salts give independent
/// mappings per level and per grid.
pub fn sfb_hash(flow: FlowId, level: usize, salt: u64, bins: usize) -> usize {
    if bins <= 1 {
        return 0;
    }
    let mut x = salt
        ^ u64::from(flow.0)
        ^ (level as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    // splitmix64 finalizer
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    (x % bins as u64) as usize
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SfbBin {
    pub qlen: usize,
    pub marking: MarkingProbability,
}

impl SfbBin {
    pub fn pm(&self) -> f64 {
        self.marking.pm
    }
}

#[derive(Debug, Clone)]
struct BinGrid {
    salts: Vec<u64>,
    bins: Vec<SfbBin>,
    width: usize,
}

impl BinGrid {
    fn new(levels: usize, width: usize, rng: &mut SimRng) -> Self {
        Self {
            salts: (0..levels).map(|_| rng.random()).collect(),
            bins: vec![SfbBin::default(); levels * width],
            width,
        }
    }

    /// Flat bin indices of `flow`, one per level.
    fn locate(&self, flow: FlowId, out: &mut Vec<u32>) {
        for (level, &salt) in self.salts.iter().enumerate() {
            let b = sfb_hash(flow, level, salt, self.width);
            out.push((level * self.width + b) as u32);
        }
    }
}

/// Bins a queued packet was counted in, first the active grid then warm-up.
type BinTag = Vec<u32>;

#[derive(Debug, Clone)]
pub struct Sfb {
    fifo: Fifo<BinTag>,
    params: SfbParams,
    levels: usize,
    bin_size: f64,
    freeze: SimTime,
    active: BinGrid,
    warm: BinGrid,
    last_nonresponsive_enqueue: Option<SimTime>,
    next_hash_switch: Option<SimTime>,
    rng: SimRng,
}

impl Sfb {
    pub fn new(params: SfbParams, capacity: Capacity, nominal_packet_size: u32, mut rng: SimRng) -> Self {
        assert!(params.levels >= 1 && params.bins >= 1, "SFB needs at least one bin");
        let bin_size = params.effective_bin_size(capacity.in_packets(nominal_packet_size));
        let active = BinGrid::new(params.levels, params.bins, &mut rng);
        let warm = BinGrid::new(params.levels, params.bins, &mut rng);
        let next_hash_switch =
            (params.h_interval > 0.0).then(|| SimTime::from_secs_f64(params.h_interval));
        Self {
            fifo: Fifo::new(capacity),
            levels: params.levels,
            bin_size,
            freeze: SimTime::from_secs_f64(params.freeze_time),
            active,
            warm,
            last_nonresponsive_enqueue: None,
            next_hash_switch,
            params,
            rng,
        }
    }

    pub fn bin_size(&self) -> f64 {
        self.bin_size
    }

    pub fn active_salts(&self) -> &[u64] {
        &self.active.salts
    }

    pub fn warmup_salts(&self) -> &[u64] {
        &self.warm.salts
    }

    pub fn next_hash_switch(&self) -> Option<SimTime> {
        self.next_hash_switch
    }

    pub fn last_nonresponsive_enqueue(&self) -> Option<SimTime> {
        self.last_nonresponsive_enqueue
    }

    pub fn set_last_nonresponsive_enqueue(&mut self, t: Option<SimTime>) {
        self.last_nonresponsive_enqueue = t;
    }

    /// Bin index of `flow` at `level` in the active grid.
    pub fn active_bin_of(&self, flow: FlowId, level: usize) -> usize {
        sfb_hash(flow, level, self.active.salts[level], self.params.bins)
    }

    pub fn warmup_bin_of(&self, flow: FlowId, level: usize) -> usize {
        sfb_hash(flow, level, self.warm.salts[level], self.params.bins)
    }

    pub fn active_bin(&self, level: usize, index: usize) -> SfbBin {
        self.active.bins[level * self.params.bins + index]
    }

    pub fn warmup_bin(&self, level: usize, index: usize) -> SfbBin {
        self.warm.bins[level * self.params.bins + index]
    }

    /// Overrides the marking state of one active bin.
    pub fn set_active_marking(&mut self, level: usize, index: usize, marking: MarkingProbability) {
        self.active.bins[level * self.params.bins + index].marking = marking;
    }

    /// Minimum marking probability over the active bins `flow` maps to.
    pub fn pmin(&self, flow: FlowId) -> f64 {
        (0..self.levels)
            .map(|l| self.active_bin(l, self.active_bin_of(flow, l)).pm())
            .fold(1.0, f64::min)
    }

    /// Per-level sums of bin occupancy for the active and warm-up grids.
    pub fn level_sums(&self) -> (Vec<usize>, Vec<usize>) {
        let sums = |g: &BinGrid| {
            g.bins
                .chunks(self.params.bins)
                .map(|lvl| lvl.iter().map(|b| b.qlen).sum())
                .collect()
        };
        (sums(&self.active), sums(&self.warm))
    }

    /// Whether every queued packet's recorded bins match its current hash
    /// and are non-empty.
    pub fn tags_consistent(&self) -> bool {
        let mut idx = Vec::with_capacity(2 * self.levels);
        self.fifo.entries().all(|(pkt, tag)| {
            idx.clear();
            self.active.locate(pkt.flow, &mut idx);
            self.warm.locate(pkt.flow, &mut idx);
            *tag == idx
                && tag[..self.levels]
                    .iter()
                    .all(|&i| self.active.bins[i as usize].qlen >= 1)
                && tag[self.levels..]
                    .iter()
                    .all(|&i| self.warm.bins[i as usize].qlen >= 1)
        })
    }

    /// Promotes the warm-up grid and starts warming a fresh one.
    ///
    /// The fresh grid starts with zero marking probabilities and its
    /// occupancy counts rebuilt from the packets currently queued.
    pub fn rotate_hashes(&mut self) {
        let fresh = BinGrid::new(self.levels, self.params.bins, &mut self.rng);
        self.active = std::mem::replace(&mut self.warm, fresh);
        let levels = self.levels;
        let mut idx = Vec::with_capacity(levels);
        for (pkt, tag) in self.fifo.entries_mut() {
            tag.copy_within(levels.., 0);
            tag.truncate(levels);
            idx.clear();
            self.warm.locate(pkt.flow, &mut idx);
            for &i in &idx {
                self.warm.bins[i as usize].qlen += 1;
            }
            tag.extend_from_slice(&idx);
        }
    }

    fn maybe_rotate(&mut self, now: SimTime) {
        let step = SimTime::from_secs_f64(self.params.h_interval);
        while let Some(at) = self.next_hash_switch {
            if now < at {
                break;
            }
            self.rotate_hashes();
            self.next_hash_switch = Some(at + step);
        }
    }

    /// Penalty-box admission for a packet classified non-responsive.
    pub fn rate_limit_admits(&mut self, now: SimTime) -> bool {
        let mut boxtime = self.params.boxtime;
        if self.params.boxtime_jitter > 0.0 {
            let j = self.params.boxtime_jitter;
            boxtime *= 1.0 + self.rng.random_range(-j..j);
        }
        let admit = match self.last_nonresponsive_enqueue {
            None => true,
            Some(last) => boxtime <= 0.0 || (now.saturating_sub(last)).as_secs_f64() > boxtime,
        };
        if admit {
            self.last_nonresponsive_enqueue = Some(now);
        }
        admit
    }

    /// BLUE update of one grid for an arrival; returns whether any of the
    /// flow's bins is over its size.
    fn update_on_arrival(grid: &mut BinGrid, idx: &[u32], bin_size: f64, p: &SfbParams, freeze: SimTime, now: SimTime) -> bool {
        let mut over = false;
        for &i in idx {
            let bin = &mut grid.bins[i as usize];
            if bin.qlen as f64 > bin_size {
                bin.marking.increase(p.d1, freeze, now);
                over = true;
            } else if bin.qlen == 0 {
                bin.marking.decrease(p.d2, freeze, now);
            }
        }
        over
    }
}

impl QueueDiscipline for Sfb {
    fn kind(&self) -> DisciplineKind {
        DisciplineKind::Sfb
    }

    fn enqueue(&mut self, pkt: Packet, now: SimTime) -> Verdict {
        self.maybe_rotate(now);
        let mut tag = Vec::with_capacity(2 * self.levels);
        self.active.locate(pkt.flow, &mut tag);
        self.warm.locate(pkt.flow, &mut tag);
        let (act_idx, warm_idx) = tag.split_at(self.levels);

        let over = Self::update_on_arrival(&mut self.active, act_idx, self.bin_size, &self.params, self.freeze, now);
        Self::update_on_arrival(&mut self.warm, warm_idx, self.bin_size, &self.params, self.freeze, now);
        if over {
            return Verdict::drop(DropReason::BinOverflow);
        }
        if !self.fifo.has_room_for(&pkt) {
            return Verdict::drop(DropReason::Overflow);
        }

        let pmin = act_idx
            .iter()
            .map(|&i| self.active.bins[i as usize].pm())
            .fold(1.0, f64::min);
        if pmin >= 1.0 {
            if !self.rate_limit_admits(now) {
                return Verdict::drop(DropReason::RateLimited);
            }
        } else if pmin > 0.0 && self.rng.random::<f64>() < pmin {
            return Verdict::drop(DropReason::Early);
        }

        for &i in act_idx {
            self.active.bins[i as usize].qlen += 1;
        }
        for &i in warm_idx {
            self.warm.bins[i as usize].qlen += 1;
        }
        self.fifo.push(pkt, tag);
        Verdict::accept()
    }

    fn dequeue(&mut self, now: SimTime) -> Option<Packet> {
        self.maybe_rotate(now);
        let (pkt, tag) = self.fifo.pop()?;
        let (act_idx, warm_idx) = tag.split_at(self.levels);
        for (grid, idx) in [(&mut self.active, act_idx), (&mut self.warm, warm_idx)] {
            for &i in idx {
                let bin = &mut grid.bins[i as usize];
                bin.qlen -= 1;
                if bin.qlen == 0 {
                    bin.marking.decrease(self.params.d2, self.freeze, now);
                }
            }
        }
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
