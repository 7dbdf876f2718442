//! Dumbbell network: per-flow access links feeding one bottleneck router.

use super::{Link, Scheduler};
use crate::aqm::QueueDiscipline;
use crate::metrics::{FlowStats, QueueMonitor, QueueTraceSample};
use crate::packet::{FlowId, Packet, PacketKind, ACK_SIZE_BYTES};
use crate::time::SimTime;
use crate::traffic::{CbrSource, FlowKind, Sink, TcpConfig, TcpSource};

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub access_bps: u64,
    pub access_delay: SimTime,
    pub bottleneck_bps: u64,
    pub bottleneck_delay: SimTime,
}

impl Default for Topology {
    fn default() -> Self {
        Self {
            access_bps: 10_000_000,
            access_delay: SimTime::from_millis(1),
            bottleneck_bps: 1_000_000,
            bottleneck_delay: SimTime::from_millis(10),
        }
    }
}

impl Topology {
    /// Latency of an ACK over the uncongested reverse path.
    pub fn ack_latency(&self) -> SimTime {
        let hop = |bps: u64, delay: SimTime| SimTime::serialization(ACK_SIZE_BYTES, bps) + delay;
        hop(self.access_bps, self.access_delay)
            + hop(self.bottleneck_bps, self.bottleneck_delay)
            + hop(self.access_bps, self.access_delay)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowSetup {
    Tcp { start: SimTime, config: TcpConfig },
    Cbr { start: SimTime, rate_bps: u64 },
}

impl FlowSetup {
    pub fn kind(&self) -> FlowKind {
        match self {
            FlowSetup::Tcp { .. } => FlowKind::Tcp,
            FlowSetup::Cbr { .. } => FlowKind::Udp,
        }
    }
}

/// Data-packet accounting. At any instant
/// `injected == delivered + dropped + queued + in_access + in_wire`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub injected: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub queued: u64,
    pub in_access: u64,
    pub in_wire: u64,
}

impl Counters {
    pub fn balanced(&self) -> bool {
        self.injected == self.delivered + self.dropped + self.queued + self.in_access + self.in_wire
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlowCounters {
    pub injected: u64,
    pub delivered_packets: u64,
    pub delivered_bytes: u64,
    pub dropped_packets: u64,
    pub window_delivered_bytes: u64,
    pub window_dropped_packets: u64,
}

#[derive(Debug, Clone, Copy)]
enum Action {
    SourceStart(FlowId),
    CbrSend(FlowId),
    ArriveRouter(Packet),
    BottleneckDone,
    ArriveSink(Packet),
    AckArrive(FlowId, u64),
    TcpTimer(FlowId),
}

#[derive(Debug)]
enum Source {
    Tcp(TcpSource),
    Cbr(CbrSource),
}

pub struct Simulation {
    sched: Scheduler<Action>,
    topology: Topology,
    packet_size: u32,
    kinds: Vec<FlowKind>,
    sources: Vec<Source>,
    ingress: Vec<Link>,
    egress: Vec<Link>,
    bottleneck: Link,
    transmitting: bool,
    discipline: Box<dyn QueueDiscipline>,
    sink: Sink,
    ack_latency: SimTime,
    counters: Counters,
    flows: Vec<FlowCounters>,
    tcp_queued: usize,
    udp_queued: usize,
    monitor: QueueMonitor,
    window_start: SimTime,
    window_end: SimTime,
    events: u64,
}

/// Results of a finished run.
#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub flows: Vec<FlowStats>,
    pub flow_counters: Vec<FlowCounters>,
    pub counters: Counters,
    pub trace: Vec<QueueTraceSample>,
    pub mean_ewma_qlen: f64,
    pub mean_qlen: f64,
    pub window_s: f64,
    pub events: u64,
}

impl Simulation {
    /// Builds a run measured over `[window_start, window_end]`.
    pub fn new(
        topology: Topology,
        flows: &[FlowSetup],
        packet_size: u32,
        discipline: Box<dyn QueueDiscipline>,
        window_start: SimTime,
        window_end: SimTime,
    ) -> Self {
        let mut sched = Scheduler::new();
        let mut sources = Vec::with_capacity(flows.len());
        for (i, setup) in flows.iter().enumerate() {
            let id = FlowId(i as u32);
            match setup {
                FlowSetup::Tcp { start, config } => {
                    sources.push(Source::Tcp(TcpSource::new(id, config.clone())));
                    sched.schedule(*start, Action::SourceStart(id));
                }
                FlowSetup::Cbr { start, rate_bps } => {
                    sources.push(Source::Cbr(CbrSource::new(id, *rate_bps, packet_size, *start)));
                    sched.schedule(*start, Action::SourceStart(id));
                }
            }
        }
        let access = || Link::new(topology.access_bps, topology.access_delay);
        Self {
            sched,
            packet_size,
            kinds: flows.iter().map(FlowSetup::kind).collect(),
            ingress: flows.iter().map(|_| access()).collect(),
            egress: flows.iter().map(|_| access()).collect(),
            bottleneck: Link::new(topology.bottleneck_bps, topology.bottleneck_delay),
            transmitting: false,
            discipline,
            sink: Sink::new(flows.len()),
            ack_latency: topology.ack_latency(),
            counters: Counters::default(),
            flows: vec![FlowCounters::default(); flows.len()],
            tcp_queued: 0,
            udp_queued: 0,
            monitor: QueueMonitor::new(window_start, window_end),
            window_start,
            window_end,
            events: 0,
            sources,
            topology,
        }
    }

    pub fn now(&self) -> SimTime {
        self.sched.now()
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn flow_counters(&self) -> &[FlowCounters] {
        &self.flows
    }

    pub fn discipline(&self) -> &dyn QueueDiscipline {
        self.discipline.as_ref()
    }

    pub fn queued_by_class(&self) -> (usize, usize) {
        (self.tcp_queued, self.udp_queued)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn sink(&self) -> &Sink {
        &self.sink
    }

    pub fn run_until(&mut self, t_end: SimTime) {
        while let Some(ev) = self.sched.pop_due(t_end) {
            self.events += 1;
            self.handle(ev.time, ev.action);
        }
        self.sched.advance_to(t_end);
    }

    pub fn finish(mut self) -> SimOutcome {
        let end = self.window_end;
        self.run_until(end);
        self.monitor.finish(end);
        let window_s = end.saturating_sub(self.window_start).as_secs_f64();
        let flows = self
            .flows
            .iter()
            .enumerate()
            .map(|(i, c)| {
                FlowStats::new(
                    FlowId(i as u32),
                    self.kinds[i],
                    c.window_delivered_bytes,
                    c.window_dropped_packets,
                    window_s,
                )
            })
            .collect();
        SimOutcome {
            flows,
            flow_counters: self.flows,
            counters: self.counters,
            mean_ewma_qlen: self.monitor.mean_ewma(),
            mean_qlen: self.monitor.mean_qlen(),
            trace: self.monitor.into_trace(),
            window_s,
            events: self.events,
        }
    }

    fn in_window(&self, now: SimTime) -> bool {
        now >= self.window_start && now <= self.window_end
    }

    fn handle(&mut self, now: SimTime, action: Action) {
        match action {
            Action::SourceStart(id) => match &self.sources[id.index()] {
                Source::Tcp(_) => self.pump_tcp(id, now),
                Source::Cbr(_) => self.cbr_send(id, now),
            },
            Action::CbrSend(id) => self.cbr_send(id, now),
            Action::ArriveRouter(pkt) => self.arrive_router(pkt, now),
            Action::BottleneckDone => {
                self.transmitting = false;
                self.start_transmission(now);
            }
            Action::ArriveSink(pkt) => self.arrive_sink(pkt, now),
            Action::AckArrive(id, ack) => {
                if let Source::Tcp(src) = &mut self.sources[id.index()] {
                    src.on_ack(ack, now);
                }
                self.pump_tcp(id, now);
            }
            Action::TcpTimer(id) => {
                if let Source::Tcp(src) = &mut self.sources[id.index()] {
                    src.on_timer(now);
                }
                self.pump_tcp(id, now);
            }
        }
    }

    fn inject(&mut self, pkt: Packet, now: SimTime) {
        self.counters.injected += 1;
        self.counters.in_access += 1;
        self.flows[pkt.flow.index()].injected += 1;
        let tx = self.ingress[pkt.flow.index()].transmit(pkt.size_bytes, now);
        self.sched.schedule(tx.delivery, Action::ArriveRouter(pkt));
    }

    fn pump_tcp(&mut self, id: FlowId, now: SimTime) {
        let Source::Tcp(src) = &mut self.sources[id.index()] else {
            return;
        };
        let mut out = Vec::new();
        while let Some(seg) = src.next_segment(now) {
            out.push(Packet::data(id, seg.seq, self.packet_size, now));
        }
        if let Some(at) = src.timer_request() {
            self.sched.schedule(at.max(now), Action::TcpTimer(id));
        }
        for pkt in out {
            self.inject(pkt, now);
        }
    }

    fn cbr_send(&mut self, id: FlowId, now: SimTime) {
        let Source::Cbr(src) = &mut self.sources[id.index()] else {
            return;
        };
        let pkt = src.emit(now);
        let next = src.next_send();
        self.sched.schedule(next, Action::CbrSend(id));
        self.inject(pkt, now);
    }

    fn class_counter(&mut self, flow: FlowId) -> &mut usize {
        match self.kinds[flow.index()] {
            FlowKind::Tcp => &mut self.tcp_queued,
            FlowKind::Udp => &mut self.udp_queued,
        }
    }

    fn record_drop(&mut self, flow: FlowId, now: SimTime) {
        self.counters.dropped += 1;
        let in_window = self.in_window(now);
        let c = &mut self.flows[flow.index()];
        c.dropped_packets += 1;
        if in_window {
            c.window_dropped_packets += 1;
        }
    }

    fn sample_queue(&mut self, now: SimTime) {
        self.monitor.record(now, self.tcp_queued, self.udp_queued);
    }

    fn arrive_router(&mut self, pkt: Packet, now: SimTime) {
        self.counters.in_access -= 1;
        let verdict = self.discipline.enqueue(pkt, now);
        for victim in &verdict.evicted {
            self.counters.queued -= 1;
            *self.class_counter(victim.flow) -= 1;
            self.record_drop(victim.flow, now);
        }
        if verdict.is_accepted() {
            self.counters.queued += 1;
            *self.class_counter(pkt.flow) += 1;
        } else {
            self.record_drop(pkt.flow, now);
        }
        self.sample_queue(now);
        debug_assert_eq!(self.discipline.len(), self.tcp_queued + self.udp_queued);
        if !self.transmitting {
            self.start_transmission(now);
        }
    }

    fn start_transmission(&mut self, now: SimTime) {
        debug_assert!(!self.transmitting);
        let Some(pkt) = self.discipline.dequeue(now) else {
            return;
        };
        self.counters.queued -= 1;
        self.counters.in_wire += 1;
        *self.class_counter(pkt.flow) -= 1;
        self.sample_queue(now);
        self.transmitting = true;
        let tx = self.bottleneck.transmit(pkt.size_bytes, now);
        self.sched.schedule(tx.tx_end, Action::BottleneckDone);
        let hop = self.egress[pkt.flow.index()].transmit(pkt.size_bytes, tx.delivery);
        self.sched.schedule(hop.delivery, Action::ArriveSink(pkt));
    }

    fn arrive_sink(&mut self, pkt: Packet, now: SimTime) {
        debug_assert_eq!(pkt.kind, PacketKind::Data);
        self.counters.in_wire -= 1;
        self.counters.delivered += 1;
        let in_window = self.in_window(now);
        let c = &mut self.flows[pkt.flow.index()];
        c.delivered_packets += 1;
        c.delivered_bytes += u64::from(pkt.size_bytes);
        if in_window {
            c.window_delivered_bytes += u64::from(pkt.size_bytes);
        }
        let ack = self.sink.receive(&pkt);
        if self.kinds[pkt.flow.index()] == FlowKind::Tcp {
            self.sched.schedule(now + self.ack_latency, Action::AckArrive(pkt.flow, ack));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aqm::{Capacity, DropTail};

    fn droptail(n: usize) -> Box<dyn QueueDiscipline> {
        Box::new(DropTail::new(Capacity::Packets(n)))
    }

    #[test]
    fn single_cbr_at_link_rate_is_lossless() {
        let flows = [FlowSetup::Cbr {
            start: SimTime::ZERO,
            rate_bps: 1_000_000,
        }];
        let mut sim = Simulation::new(
            Topology::default(),
            &flows,
            1000,
            droptail(150),
            SimTime::ZERO,
            SimTime::from_secs(10),
        );
        sim.run_until(SimTime::from_secs(10));
        let c = sim.counters();
        assert!(c.balanced());
        assert_eq!(c.dropped, 0);
        assert!(c.queued <= 1);
        let out = sim.finish();
        let util = out.flows[0].throughput_bps / 1e6;
        assert!(util > 0.99 && util <= 1.0, "util {util}");
    }

    #[test]
    fn overload_drops_and_conserves() {
        let flows = [FlowSetup::Cbr {
            start: SimTime::ZERO,
            rate_bps: 4_000_000,
        }];
        let mut sim = Simulation::new(
            Topology::default(),
            &flows,
            1000,
            droptail(20),
            SimTime::ZERO,
            SimTime::from_secs(5),
        );
        for ms in (0..5000).step_by(7) {
            sim.run_until(SimTime::from_millis(ms));
            assert!(sim.counters().balanced());
        }
        assert!(sim.counters().dropped > 0);
        assert_eq!(sim.queued_by_class(), (0, sim.discipline().len()));
    }

    #[test]
    fn single_tcp_fills_pipe() {
        // Window-limited rate far above 1 Mbps, so the link is the limit.
        let flows = [FlowSetup::Tcp {
            start: SimTime::ZERO,
            config: TcpConfig::default(),
        }];
        let sim = Simulation::new(
            Topology::default(),
            &flows,
            1000,
            droptail(1000),
            SimTime::from_secs(5),
            SimTime::from_secs(30),
        );
        let out = sim.finish();
        assert!(out.flows[0].throughput_bps >= 0.9e6, "{:?}", out.flows[0]);
        assert_eq!(out.counters.dropped, 0);
    }

    #[test]
    fn window_limited_tcp_matches_window_over_rtt() {
        let topo = Topology {
            bottleneck_bps: 100_000_000,
            access_bps: 100_000_000,
            ..Topology::default()
        };
        let cfg = TcpConfig {
            max_window: 10,
            ..TcpConfig::default()
        };
        let flows = [FlowSetup::Tcp {
            start: SimTime::ZERO,
            config: cfg,
        }];
        let sim = Simulation::new(topo.clone(), &flows, 1000, droptail(1000), SimTime::from_secs(5), SimTime::from_secs(20));
        let out = sim.finish();
        // first segment's round trip: three data hops plus the ACK path
        let access = SimTime::serialization(1000, topo.access_bps) + topo.access_delay;
        let rtt = (access
            + access
            + SimTime::serialization(1000, topo.bottleneck_bps)
            + topo.bottleneck_delay
            + topo.ack_latency())
        .as_secs_f64();
        let bound = 10.0 * 8000.0 / rtt;
        let got = out.flows[0].throughput_bps;
        assert!(got >= 0.9 * bound && got <= 1.01 * bound, "got {got} bound {bound}");
    }
}
