//! Throughput accounting, queue traces and fairness.

use thiserror::Error;

use crate::aqm::ewma_update;
use crate::packet::FlowId;
use crate::time::SimTime;
use crate::traffic::FlowKind;

/// Aging weight of the reported average queue.
pub const QUEUE_EWMA_WEIGHT: f64 = 0.002;

/// Emitted trace resolution.
pub const TRACE_POINTS_PER_SECOND: u64 = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FairnessError {
    #[error("fairness index of an empty set is undefined")]
    Empty,
    #[error("fairness index is undefined when every throughput is zero")]
    AllZero,
    #[error("throughput {0} is negative or not finite")]
    Invalid(f64),
}

/// Jain's fairness index `(Σx)² / (n·Σx²)`.
pub fn jain_index(xs: &[f64]) -> Result<f64, FairnessError> {
    if xs.is_empty() {
        return Err(FairnessError::Empty);
    }
    if let Some(&bad) = xs.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(FairnessError::Invalid(bad));
    }
    let sum: f64 = xs.iter().sum();
    let sq: f64 = xs.iter().map(|x| x * x).sum();
    if sq == 0.0 {
        return Err(FairnessError::AllZero);
    }
    Ok(sum * sum / (xs.len() as f64 * sq))
}

/// Fraction of link capacity carried over `duration_s`. Zero duration
/// yields zero.
pub fn utilization(delivered_bits: f64, bottleneck_bps: f64, duration_s: f64) -> f64 {
    if duration_s <= 0.0 || bottleneck_bps <= 0.0 {
        return 0.0;
    }
    delivered_bits / (bottleneck_bps * duration_s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowStats {
    pub flow_id: FlowId,
    pub kind: FlowKind,
    pub delivered_bytes: u64,
    pub dropped_packets: u64,
    pub throughput_bps: f64,
}

impl FlowStats {
    pub fn new(flow_id: FlowId, kind: FlowKind, delivered_bytes: u64, dropped_packets: u64, window_s: f64) -> Self {
        let throughput_bps = if window_s > 0.0 {
            delivered_bytes as f64 * 8.0 / window_s
        } else {
            0.0
        };
        Self {
            flow_id,
            kind,
            delivered_bytes,
            dropped_packets,
            throughput_bps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueTraceSample {
    pub time: SimTime,
    pub total_qlen: usize,
    pub tcp_qlen: usize,
    pub udp_qlen: usize,
    pub ewma_qlen: f64,
}

/// Tracks the averaged queue on every enqueue and dequeue and keeps a
/// downsampled trace for emission.
#[derive(Debug, Clone)]
pub struct QueueMonitor {
    weight: f64,
    ewma: f64,
    window_start: SimTime,
    window_end: SimTime,
    last_time: SimTime,
    last_total: usize,
    ewma_area: f64,
    qlen_area: f64,
    emit_every: SimTime,
    next_emit: SimTime,
    trace: Vec<QueueTraceSample>,
}

impl QueueMonitor {
    pub fn new(window_start: SimTime, window_end: SimTime) -> Self {
        Self {
            weight: QUEUE_EWMA_WEIGHT,
            ewma: 0.0,
            window_start,
            window_end,
            last_time: SimTime::ZERO,
            last_total: 0,
            ewma_area: 0.0,
            qlen_area: 0.0,
            emit_every: SimTime::from_nanos(1_000_000_000 / TRACE_POINTS_PER_SECOND),
            next_emit: SimTime::ZERO,
            trace: Vec::new(),
        }
    }

    pub fn ewma(&self) -> f64 {
        self.ewma
    }

    fn integrate_to(&mut self, now: SimTime) {
        let from = self.last_time.max(self.window_start);
        let to = now.min(self.window_end);
        if to > from {
            let dt = (to - from).as_secs_f64();
            self.ewma_area += self.ewma * dt;
            self.qlen_area += self.last_total as f64 * dt;
        }
        self.last_time = self.last_time.max(now);
    }

    pub fn record(&mut self, now: SimTime, tcp_qlen: usize, udp_qlen: usize) -> QueueTraceSample {
        self.integrate_to(now);
        let total = tcp_qlen + udp_qlen;
        self.ewma = ewma_update(self.ewma, total as f64, self.weight);
        self.last_total = total;
        let sample = QueueTraceSample {
            time: now,
            total_qlen: total,
            tcp_qlen,
            udp_qlen,
            ewma_qlen: self.ewma,
        };
        if now >= self.next_emit {
            self.trace.push(sample);
            self.next_emit = now + self.emit_every;
        }
        sample
    }

    /// Closes the integration at `end`.
    pub fn finish(&mut self, end: SimTime) {
        self.integrate_to(end);
    }

    fn window_secs(&self) -> f64 {
        self.window_end.saturating_sub(self.window_start).as_secs_f64()
    }

    /// Time-weighted mean of the averaged queue over the window.
    pub fn mean_ewma(&self) -> f64 {
        let w = self.window_secs();
        if w > 0.0 {
            self.ewma_area / w
        } else {
            0.0
        }
    }

    /// Time-weighted mean of the instantaneous queue over the window.
    pub fn mean_qlen(&self) -> f64 {
        let w = self.window_secs();
        if w > 0.0 {
            self.qlen_area / w
        } else {
            0.0
        }
    }

    pub fn trace(&self) -> &[QueueTraceSample] {
        &self.trace
    }

    pub fn into_trace(self) -> Vec<QueueTraceSample> {
        self.trace
    }
}
