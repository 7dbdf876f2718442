use proptest::prelude::*;

use aqmsim::aqm::{
    self, red_drop_probability, Blue, BlueParams, Capacity, Choke, ChokeParams, DisciplineKind, DisciplineParams, Fred,
    FredParams, QueueDiscipline, RedParams, Sfb, SfbParams,
};
use aqmsim::harness::{run_csvs, run_scenario, ScenarioConfig};
use aqmsim::metrics::jain_index;
use aqmsim::rng::{stream, Stream};
use aqmsim::sim::FlowSetup;
use aqmsim::traffic::{CbrSource, TcpConfig, TcpSource, TcpVariant};
use aqmsim::{FlowId, Packet, SimTime};

#[derive(Debug, Clone)]
enum Op {
    Enqueue { flow: u32, size: u32, dt_us: u64 },
    Dequeue { dt_us: u64 },
}

fn ops(max_flow: u32) -> impl Strategy<Value = Vec<Op>> {
    let op = prop_oneof![
        3 => (0..max_flow, prop_oneof![Just(1000u32), 40u32..1500], 0u64..3000)
            .prop_map(|(flow, size, dt_us)| Op::Enqueue { flow, size, dt_us }),
        2 => (0u64..3000).prop_map(|dt_us| Op::Dequeue { dt_us }),
    ];
    proptest::collection::vec(op, 1..600)
}

fn kind() -> impl Strategy<Value = DisciplineKind> {
    proptest::sample::select(DisciplineKind::ALL.to_vec())
}

/// Drives `q` through `ops`, checking FIFO bookkeeping after every step.
fn drive(q: &mut dyn QueueDiscipline, ops: &[Op], mut check: impl FnMut(&dyn QueueDiscipline)) {
    let mut now = SimTime::ZERO;
    for op in ops {
        match *op {
            Op::Enqueue { flow, size, dt_us } => {
                now += SimTime::from_nanos(dt_us * 1000);
                let before = q.len();
                let v = q.enqueue(Packet::data(FlowId(flow), 0, size, now), now);
                let added = usize::from(v.is_accepted());
                assert_eq!(q.len() + v.evicted.len(), before + added);
                assert!(v.evicted.iter().all(|p| p.flow == FlowId(flow)));
            }
            Op::Dequeue { dt_us } => {
                now += SimTime::from_nanos(dt_us * 1000);
                let before = q.len();
                let got = q.dequeue(now);
                assert_eq!(got.is_some(), before > 0);
            }
        }
        let bytes: u64 = q.contents().map(|p| u64::from(p.size_bytes)).sum();
        assert_eq!(bytes, q.byte_len());
        assert_eq!(q.contents().count(), q.len());
        check(q);
    }
}

proptest! {
    #[test]
    fn red_probability_is_a_probability(
        avg in -10.0f64..400.0,
        min_th in 0.0f64..100.0,
        width in 0.5f64..200.0,
        max_p in 0.0f64..=1.0,
        count in 0u64..10_000,
        spread: bool,
    ) {
        let p = RedParams { min_th, max_th: min_th + width, max_p, w_q: 0.002, count_spread: spread };
        let prob = red_drop_probability(avg, &p, count);
        prop_assert!((0.0..=1.0).contains(&prob), "{prob}");
    }

    #[test]
    fn every_discipline_keeps_fifo_bookkeeping(kind in kind(), ops in ops(20), cap in 1usize..200, seed: u64) {
        let mut q = aqm::build(kind, &DisciplineParams::default(), Capacity::Packets(cap), 1000, stream(seed, Stream::Discipline));
        drive(q.as_mut(), &ops, |q| assert!(q.len() <= cap));
    }

    #[test]
    fn byte_capacity_is_respected(kind in kind(), ops in ops(20), cap in 1500u64..50_000, seed: u64) {
        let mut q = aqm::build(kind, &DisciplineParams::default(), Capacity::Bytes(cap), 1000, stream(seed, Stream::Discipline));
        drive(q.as_mut(), &ops, |q| assert!(q.byte_len() <= cap));
    }

    #[test]
    fn fred_accounts_match_queue(ops in ops(12), two_packet: bool, seed: u64) {
        let params = FredParams { two_packet_mode: two_packet, ..FredParams::default() };
        let red = RedParams { min_th: 5.0, max_th: 15.0, ..RedParams::default() };
        let mut fred = Fred::new(red, params, Capacity::Packets(30), stream(seed, Stream::Discipline));
        let mut now = SimTime::ZERO;
        for op in &ops {
            match *op {
                Op::Enqueue { flow, dt_us, .. } => {
                    now += SimTime::from_nanos(dt_us * 1000);
                    fred.enqueue(Packet::data(FlowId(flow), 0, 1000, now), now);
                }
                Op::Dequeue { dt_us } => {
                    now += SimTime::from_nanos(dt_us * 1000);
                    fred.dequeue(now);
                }
            }
            prop_assert_eq!(fred.accounted_packets(), fred.len());
            for f in 0..12 {
                let n = fred.contents().filter(|p| p.flow == FlowId(f)).count();
                prop_assert_eq!(fred.account(FlowId(f)).map_or(0, |a| a.qlen), n);
            }
        }
    }

    #[test]
    fn sfb_bins_match_queue(ops in ops(40), levels in 1usize..4, bins in 1usize..30, seed: u64) {
        let params = SfbParams { levels, bins, h_interval: 0.05, ..SfbParams::default() };
        let mut sfb = Sfb::new(params, Capacity::Packets(60), 1000, stream(seed, Stream::Discipline));
        let mut now = SimTime::ZERO;
        for op in &ops {
            match *op {
                Op::Enqueue { flow, dt_us, .. } => {
                    now += SimTime::from_nanos(dt_us * 1000);
                    sfb.enqueue(Packet::data(FlowId(flow), 0, 1000, now), now);
                }
                Op::Dequeue { dt_us } => {
                    now += SimTime::from_nanos(dt_us * 1000);
                    sfb.dequeue(now);
                }
            }
            let (act, warm) = sfb.level_sums();
            prop_assert!(act.iter().chain(warm.iter()).all(|&s| s == sfb.len()));
            prop_assert!(sfb.tags_consistent());
            for f in 0..40 {
                let p = sfb.pmin(FlowId(f));
                prop_assert!((0.0..=1.0).contains(&p));
            }
        }
    }

    #[test]
    fn blue_probability_stays_in_unit_interval(events in proptest::collection::vec((any::<bool>(), 0u64..30_000), 1..500)) {
        let mut blue = Blue::new(BlueParams::default(), Capacity::Packets(1), stream(1, Stream::Discipline));
        let mut now = SimTime::ZERO;
        for (loss, dt_us) in events {
            now += SimTime::from_nanos(dt_us * 1000);
            if loss { blue.on_loss(now); } else { blue.on_idle(now); }
            prop_assert!((0.0..=1.0).contains(&blue.pm()));
        }
    }

    #[test]
    fn choke_preserves_survivor_order(ops in ops(4), cand in 1usize..8, seed: u64) {
        let red = RedParams { min_th: 3.0, max_th: 10.0, w_q: 0.2, ..RedParams::default() };
        let params = ChokeParams { adaptive: false, cand_num: cand, interval_num: 5 };
        let mut q = Choke::new(red, params, Capacity::Packets(40), stream(seed, Stream::Discipline));
        let mut now = SimTime::ZERO;
        let mut seq = 0u64;
        for op in &ops {
            match *op {
                Op::Enqueue { flow, dt_us, .. } => {
                    now += SimTime::from_nanos(dt_us * 1000);
                    seq += 1;
                    q.enqueue(Packet::data(FlowId(flow), seq, 1000, now), now);
                }
                Op::Dequeue { dt_us } => {
                    now += SimTime::from_nanos(dt_us * 1000);
                    q.dequeue(now);
                }
            }
            let seqs: Vec<u64> = q.contents().map(|p| p.seq).collect();
            prop_assert!(seqs.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn jain_is_scale_invariant(xs in proptest::collection::vec(0.0f64..1e6, 1..50), c in 1e-3f64..1e3) {
        prop_assume!(xs.iter().any(|&x| x > 0.0));
        let j = jain_index(&xs).unwrap();
        let scaled: Vec<f64> = xs.iter().map(|x| x * c).collect();
        let js = jain_index(&scaled).unwrap();
        prop_assert!((j - js).abs() <= 1e-12 * j);
        prop_assert!(j >= 1.0 / xs.len() as f64 - 1e-12 && j <= 1.0 + 1e-12);
    }

    #[test]
    fn tcp_never_exceeds_window(
        max_window in 1u32..100,
        variant in prop_oneof![Just(TcpVariant::Tahoe), Just(TcpVariant::Reno), Just(TcpVariant::NewReno)],
        events in proptest::collection::vec((0u8..10, 0u64..60), 1..400),
    ) {
        let mut src = TcpSource::new(FlowId(0), TcpConfig { max_window, variant, ..TcpConfig::default() });
        let mut now = SimTime::ZERO;
        let mut highest_sent = 0u64;
        for (kind, x) in events {
            now += SimTime::from_millis(1);
            match kind {
                0 => src.on_timeout(),
                1..=3 => src.on_ack(src.highest_acked(), now),
                _ => {
                    let ack = (src.highest_acked() + x % 8).min(highest_sent);
                    src.on_ack(ack, now);
                }
            }
            while let Some(seg) = src.next_segment(now) {
                highest_sent = highest_sent.max(seg.seq + 1);
                // the fast-retransmitted hole may go out after cwnd was halved
                prop_assert!(src.in_flight() <= src.window() || (seg.retransmit && src.in_recovery()));
            }
            prop_assert!(src.cwnd() >= 1.0);
            prop_assert!(src.cwnd() <= f64::from(max_window));
        }
    }

    #[test]
    fn cbr_offered_load_is_exact(rate in 1_000u64..100_000_000, size in 40u32..1500, gaps in 1u64..2000) {
        let mut src = CbrSource::new(FlowId(0), rate, size, SimTime::ZERO);
        let mut last = SimTime::ZERO;
        for _ in 0..=gaps {
            last = src.next_send();
            src.emit(last);
        }
        // gaps * size * 8 bits delivered across `last` seconds, to the nanosecond
        let exact_ns = u128::from(gaps) * u128::from(size) * 8 * 1_000_000_000 / u128::from(rate);
        prop_assert_eq!(u128::from(last.as_nanos()), exact_ns);
    }
}

fn small_config() -> impl Strategy<Value = ScenarioConfig> {
    (kind(), 0usize..5, 0usize..3, 100_000u64..4_000_000, 5usize..80, any::<u64>(), 1.0f64..4.0).prop_map(
        |(discipline, tcp, udp, rate, buffer, seed, duration)| {
            let mut cfg = ScenarioConfig {
                discipline,
                tcp_flows: tcp.max(usize::from(udp == 0)),
                udp_flows: udp,
                udp_rate_bps: rate,
                buffer: Capacity::Packets(buffer),
                seed,
                duration_s: duration,
                ..ScenarioConfig::default()
            };
            cfg.params.red.min_th = buffer as f64 / 3.0;
            cfg.params.red.max_th = 2.0 * buffer as f64 / 3.0;
            cfg
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn packets_are_conserved(cfg in small_config(), checkpoints in proptest::collection::vec(1u64..4000, 1..20)) {
        let mut sim = aqmsim::harness::build_simulation(&cfg);
        let mut marks = checkpoints;
        marks.sort_unstable();
        for ms in marks {
            sim.run_until(SimTime::from_millis(ms));
            let c = sim.counters();
            prop_assert!(c.balanced(), "{c:?}");
            let (tcp, udp) = sim.queued_by_class();
            prop_assert_eq!((tcp + udp) as u64, c.queued);
            prop_assert_eq!(sim.discipline().len() as u64, c.queued);
            let delivered: u64 = sim.sink().flows().iter().map(|f| f.received_packets).sum();
            prop_assert_eq!(delivered, c.delivered);
        }
    }

    #[test]
    fn same_seed_same_bytes(cfg in small_config()) {
        let a = run_csvs(&run_scenario(&cfg).unwrap()).unwrap();
        let b = run_csvs(&run_scenario(&cfg).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn window_throughput_bounded_by_link(cfg in small_config()) {
        let r = run_scenario(&cfg).unwrap();
        // one packet of quantization at each window edge
        let slack = 2.0 * 8.0 * f64::from(cfg.packet_size) / r.window_s;
        let total: f64 = r.flows.iter().map(|f| f.throughput_bps).sum();
        prop_assert!(total <= cfg.topology.bottleneck_bps as f64 + slack);
    }

    #[test]
    fn config_round_trips(cfg in small_config(), stagger in 0.0f64..1.0, window in 1u32..400, jitter in 0.0f64..0.99) {
        let mut cfg = cfg;
        cfg.start_stagger_s = stagger;
        cfg.tcp_max_window = window;
        cfg.params.sfb.boxtime_jitter = jitter;
        let back = ScenarioConfig::parse(&cfg.to_text()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn flow_setup_kinds() {
    let cfg = ScenarioConfig::default();
    let flows = aqmsim::harness::flow_setups(&cfg);
    assert!(matches!(flows.last(), Some(FlowSetup::Cbr { .. })));
}
