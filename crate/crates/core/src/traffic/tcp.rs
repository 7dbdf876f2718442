use std::fmt;
use std::str::FromStr;

use crate::packet::FlowId;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TcpVariant {
    /// Three duplicate ACKs collapse the window to one segment.
    Tahoe,
    /// Fast retransmit and recovery; any new ACK ends recovery.
    #[default]
    Reno,
    /// Like Reno, but partial ACKs retransmit the next hole and keep recovery.
    NewReno,
}

impl TcpVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            TcpVariant::Tahoe => "tahoe",
            TcpVariant::Reno => "reno",
            TcpVariant::NewReno => "newreno",
        }
    }
}

impl fmt::Display for TcpVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TcpVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tahoe" => Ok(TcpVariant::Tahoe),
            "reno" => Ok(TcpVariant::Reno),
            "newreno" => Ok(TcpVariant::NewReno),
            other => Err(format!("unknown TCP variant {other:?} (expected tahoe, reno or newreno)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TcpConfig {
    /// Receiver window in packets.
    pub max_window: u32,
    pub variant: TcpVariant,
    pub initial_rto: f64,
    pub min_rto: f64,
    pub max_rto: f64,
}

impl Default for TcpConfig {
    fn default() -> Self {
        Self {
            max_window: 50,
            variant: TcpVariant::Reno,
            initial_rto: 1.0,
            min_rto: 0.2,
            max_rto: 64.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub seq: u64,
    pub retransmit: bool,
}

/// Window-based, loss-responsive bulk sender counting in whole segments.
#[derive(Debug, Clone)]
pub struct TcpSource {
    flow: FlowId,
    cfg: TcpConfig,
    cwnd: f64,
    ssthresh: f64,
    snd_una: u64,
    next_seq: u64,
    high_tx: u64,
    dup_acks: u32,
    recover: Option<u64>,
    last_recover: Option<u64>,
    pending_retx: Option<u64>,
    srtt: Option<f64>,
    rttvar: f64,
    rto: f64,
    rtt_probe: Option<(u64, SimTime)>,
    deadline: Option<SimTime>,
    timer_event_outstanding: bool,
    timeouts: u64,
    retransmits: u64,
}

impl TcpSource {
    pub fn new(flow: FlowId, cfg: TcpConfig) -> Self {
        Self {
            flow,
            cwnd: 1.0,
            ssthresh: f64::from(cfg.max_window),
            snd_una: 0,
            next_seq: 0,
            high_tx: 0,
            dup_acks: 0,
            recover: None,
            last_recover: None,
            pending_retx: None,
            srtt: None,
            rttvar: 0.0,
            rto: cfg.initial_rto,
            rtt_probe: None,
            deadline: None,
            timer_event_outstanding: false,
            timeouts: 0,
            retransmits: 0,
            cfg,
        }
    }

    pub fn flow(&self) -> FlowId {
        self.flow
    }

    pub fn cwnd(&self) -> f64 {
        self.cwnd
    }

    pub fn ssthresh(&self) -> f64 {
        self.ssthresh
    }

    pub fn rto(&self) -> f64 {
        self.rto
    }

    pub fn srtt(&self) -> Option<f64> {
        self.srtt
    }

    pub fn dup_acks(&self) -> u32 {
        self.dup_acks
    }

    pub fn highest_acked(&self) -> u64 {
        self.snd_una
    }

    pub fn timeouts(&self) -> u64 {
        self.timeouts
    }

    pub fn retransmits(&self) -> u64 {
        self.retransmits
    }

    pub fn in_recovery(&self) -> bool {
        self.recover.is_some()
    }

    /// Segments sent but not yet cumulatively acknowledged.
    pub fn in_flight(&self) -> u64 {
        self.next_seq - self.snd_una
    }

    /// Effective send window, `min(cwnd, max_window)` in whole segments.
    pub fn window(&self) -> u64 {
        (self.cwnd.min(f64::from(self.cfg.max_window)).floor() as u64).max(1)
    }

    #[cfg(test)]
    pub(crate) fn set_cwnd(&mut self, cwnd: f64, ssthresh: f64) {
        self.cwnd = cwnd;
        self.ssthresh = ssthresh;
    }

    /// Next segment to transmit, if the window allows one.
    pub fn next_segment(&mut self, now: SimTime) -> Option<Segment> {
        let seg = if let Some(seq) = self.pending_retx.take() {
            Segment { seq, retransmit: true }
        } else {
            if self.in_flight() >= self.window() {
                return None;
            }
            let seq = self.next_seq;
            self.next_seq += 1;
            let retransmit = seq < self.high_tx;
            if !retransmit {
                self.high_tx = seq + 1;
                if self.rtt_probe.is_none() {
                    self.rtt_probe = Some((seq, now));
                }
            }
            debug_assert!(self.in_flight() <= self.window());
            Segment { seq, retransmit }
        };
        if seg.retransmit {
            self.retransmits += 1;
        }
        if self.deadline.is_none() {
            self.deadline = Some(now + SimTime::from_secs_f64(self.rto));
        }
        Some(seg)
    }

    pub fn on_ack(&mut self, ack: u64, now: SimTime) {
        if ack < self.snd_una || ack > self.high_tx {
            return;
        }
        if ack == self.snd_una {
            if self.snd_una < self.high_tx {
                self.dup_acks += 1;
                if self.dup_acks == 3 {
                    self.fast_retransmit();
                }
            }
            return;
        }

        if let Some((seq, sent)) = self.rtt_probe {
            if ack > seq {
                self.rtt_sample((now - sent).as_secs_f64());
                self.rtt_probe = None;
            }
        }
        self.snd_una = ack;
        self.next_seq = self.next_seq.max(ack);
        self.dup_acks = 0;

        match self.recover {
            Some(recover) if self.cfg.variant == TcpVariant::NewReno && ack <= recover => {
                self.pending_retx = Some(ack);
            }
            Some(_) => {
                self.recover = None;
                self.cwnd = self.ssthresh.min(self.max_cwnd());
            }
            None => self.grow(),
        }

        self.deadline = if self.snd_una >= self.high_tx {
            None
        } else {
            Some(now + SimTime::from_secs_f64(self.rto))
        };
    }

    fn grow(&mut self) {
        if self.cwnd < self.ssthresh {
            self.cwnd += 1.0;
        } else {
            self.cwnd += 1.0 / self.cwnd;
        }
        self.cwnd = self.cwnd.min(self.max_cwnd());
    }

    fn max_cwnd(&self) -> f64 {
        f64::from(self.cfg.max_window)
    }

    fn halve(&mut self) {
        self.ssthresh = (self.cwnd / 2.0).max(2.0);
    }

    fn fast_retransmit(&mut self) {
        if self.recover.is_some() {
            return;
        }
        if self.cfg.variant == TcpVariant::NewReno && self.last_recover.is_some_and(|r| self.snd_una <= r) {
            return;
        }
        self.halve();
        self.rtt_probe = None;
        match self.cfg.variant {
            TcpVariant::Tahoe => {
                self.cwnd = 1.0;
                self.next_seq = self.snd_una;
            }
            TcpVariant::Reno | TcpVariant::NewReno => {
                self.cwnd = self.ssthresh.min(self.max_cwnd());
                self.pending_retx = Some(self.snd_una);
                let recover = self.high_tx - 1;
                self.recover = Some(recover);
                self.last_recover = Some(recover);
            }
        }
    }

    fn rtt_sample(&mut self, r: f64) {
        match self.srtt {
            None => {
                self.srtt = Some(r);
                self.rttvar = r / 2.0;
            }
            Some(srtt) => {
                self.rttvar = 0.75 * self.rttvar + 0.25 * (srtt - r).abs();
                self.srtt = Some(0.875 * srtt + 0.125 * r);
            }
        }
        let srtt = self.srtt.unwrap_or(r);
        self.rto = (srtt + 4.0 * self.rttvar).clamp(self.cfg.min_rto, self.cfg.max_rto);
    }

    /// Retransmission timeout: collapse to one segment, back off the timer
    /// and go back to the first unacknowledged segment.
    pub fn on_timeout(&mut self) {
        self.halve();
        self.cwnd = 1.0;
        self.rto = (self.rto * 2.0).min(self.cfg.max_rto);
        self.next_seq = self.snd_una;
        self.pending_retx = None;
        self.recover = None;
        self.last_recover = self.high_tx.checked_sub(1);
        self.dup_acks = 0;
        self.rtt_probe = None;
        self.deadline = None;
        self.timeouts += 1;
    }

    /// Returns a time at which the owner should fire [`Self::on_timer`],
    /// if the timer is armed and no such event is outstanding.
    pub fn timer_request(&mut self) -> Option<SimTime> {
        if self.timer_event_outstanding {
            return None;
        }
        let at = self.deadline?;
        self.timer_event_outstanding = true;
        Some(at)
    }

    /// Timer event delivery. Returns `true` if a timeout actually happened;
    /// a deadline that moved later only needs re-requesting.
    pub fn on_timer(&mut self, now: SimTime) -> bool {
        self.timer_event_outstanding = false;
        match self.deadline {
            Some(at) if at <= now => {
                self.on_timeout();
                true
            }
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(variant: TcpVariant) -> TcpSource {
        TcpSource::new(
            FlowId(0),
            TcpConfig {
                variant,
                ..TcpConfig::default()
            },
        )
    }

    fn drain(s: &mut TcpSource, now: SimTime) -> Vec<Segment> {
        std::iter::from_fn(|| s.next_segment(now)).collect()
    }

    #[test]
    fn slow_start_increment() {
        let mut s = src(TcpVariant::Reno);
        s.set_cwnd(2.0, 32.0);
        drain(&mut s, SimTime::ZERO);
        s.on_ack(1, SimTime::from_millis(30));
        assert_eq!(s.cwnd(), 3.0);
    }

    #[test]
    fn congestion_avoidance_increment() {
        let mut s = src(TcpVariant::Reno);
        s.set_cwnd(40.0, 20.0);
        drain(&mut s, SimTime::ZERO);
        s.on_ack(1, SimTime::from_millis(30));
        assert!((s.cwnd() - 40.025).abs() < 1e-12);
    }

    #[test]
    fn third_dup_ack_halves_and_retransmits() {
        let mut s = src(TcpVariant::Reno);
        s.set_cwnd(20.0, 64.0);
        let sent = drain(&mut s, SimTime::ZERO);
        assert_eq!(sent.len(), 20);
        for _ in 0..3 {
            s.on_ack(0, SimTime::from_millis(30));
        }
        assert_eq!(s.ssthresh(), 10.0);
        assert_eq!(s.cwnd(), 10.0);
        let again = drain(&mut s, SimTime::from_millis(30));
        assert_eq!(again, vec![Segment { seq: 0, retransmit: true }]);
        // more dup acks during recovery do not halve again
        s.on_ack(0, SimTime::from_millis(31));
        assert_eq!(s.cwnd(), 10.0);
    }

    #[test]
    fn reno_exits_recovery_on_new_ack() {
        let mut s = src(TcpVariant::Reno);
        s.set_cwnd(20.0, 64.0);
        drain(&mut s, SimTime::ZERO);
        for _ in 0..3 {
            s.on_ack(0, SimTime::from_millis(30));
        }
        drain(&mut s, SimTime::from_millis(30));
        s.on_ack(20, SimTime::from_millis(60));
        assert!(!s.in_recovery());
        assert_eq!(s.cwnd(), 10.0);
        assert_eq!(s.in_flight(), 0);
    }

    #[test]
    fn newreno_partial_ack_retransmits_next_hole() {
        let mut s = src(TcpVariant::NewReno);
        s.set_cwnd(20.0, 64.0);
        drain(&mut s, SimTime::ZERO);
        for _ in 0..3 {
            s.on_ack(0, SimTime::from_millis(30));
        }
        drain(&mut s, SimTime::from_millis(30));
        s.on_ack(7, SimTime::from_millis(60));
        assert!(s.in_recovery());
        let segs = drain(&mut s, SimTime::from_millis(60));
        assert_eq!(segs[0], Segment { seq: 7, retransmit: true });
        s.on_ack(20, SimTime::from_millis(90));
        assert!(!s.in_recovery());
    }

    #[test]
    fn tahoe_collapses_on_dup_acks() {
        let mut s = src(TcpVariant::Tahoe);
        s.set_cwnd(20.0, 64.0);
        drain(&mut s, SimTime::ZERO);
        for _ in 0..3 {
            s.on_ack(0, SimTime::from_millis(30));
        }
        assert_eq!(s.cwnd(), 1.0);
        assert_eq!(s.ssthresh(), 10.0);
        let segs = drain(&mut s, SimTime::from_millis(30));
        assert_eq!(segs, vec![Segment { seq: 0, retransmit: true }]);
    }

    #[test]
    fn timeout_collapses_window() {
        let mut s = src(TcpVariant::Reno);
        s.set_cwnd(16.0, 64.0);
        drain(&mut s, SimTime::ZERO);
        s.on_timeout();
        assert_eq!(s.ssthresh(), 8.0);
        assert_eq!(s.cwnd(), 1.0);
        let segs = drain(&mut s, SimTime::from_secs(1));
        assert_eq!(segs, vec![Segment { seq: 0, retransmit: true }]);
    }

    #[test]
    fn timeout_floor() {
        let mut s = src(TcpVariant::Reno);
        drain(&mut s, SimTime::ZERO);
        s.on_timeout();
        assert_eq!(s.ssthresh(), 2.0);
        assert_eq!(s.cwnd(), 1.0);
    }

    #[test]
    fn consecutive_timeouts_back_off() {
        let mut s = src(TcpVariant::Reno);
        assert_eq!(s.rto(), 1.0);
        drain(&mut s, SimTime::ZERO);
        assert_eq!(s.timer_request(), Some(SimTime::from_secs(1)));
        assert!(s.on_timer(SimTime::from_secs(1)));
        assert_eq!(s.rto(), 2.0);
        drain(&mut s, SimTime::from_secs(1));
        assert_eq!(s.timer_request(), Some(SimTime::from_secs(3)));
        assert!(s.on_timer(SimTime::from_secs(3)));
        assert_eq!(s.rto(), 4.0);
    }

    #[test]
    fn moved_deadline_is_not_a_timeout() {
        let mut s = src(TcpVariant::Reno);
        s.set_cwnd(4.0, 64.0);
        drain(&mut s, SimTime::ZERO);
        let first = s.timer_request().unwrap();
        s.on_ack(1, SimTime::from_millis(500));
        assert_eq!(s.timer_request(), None);
        assert!(!s.on_timer(first));
        let next = s.timer_request().unwrap();
        assert!(next > first);
    }

    #[test]
    fn stale_ack_ignored() {
        let mut s = src(TcpVariant::Reno);
        s.set_cwnd(4.0, 64.0);
        drain(&mut s, SimTime::ZERO);
        s.on_ack(3, SimTime::from_millis(10));
        let cwnd = s.cwnd();
        s.on_ack(2, SimTime::from_millis(11));
        assert_eq!(s.cwnd(), cwnd);
        assert_eq!(s.highest_acked(), 3);
    }

    #[test]
    fn window_respects_receiver_limit() {
        let mut s = src(TcpVariant::Reno);
        s.set_cwnd(80.0, 100.0);
        assert_eq!(drain(&mut s, SimTime::ZERO).len(), 50);
        assert_eq!(s.in_flight(), 50);
    }

    #[test]
    fn rtt_sample_sets_rto() {
        let mut s = src(TcpVariant::Reno);
        drain(&mut s, SimTime::ZERO);
        s.on_ack(1, SimTime::from_millis(100));
        assert_eq!(s.srtt(), Some(0.1));
        // srtt + 4 * srtt/2 = 0.3
        assert!((s.rto() - 0.3).abs() < 1e-12);
    }
}
