use rayon::prelude::*;

use super::config::{ConfigError, ConfigIssue, ScenarioConfig};
use crate::aqm;
use crate::metrics::{jain_index, utilization, FlowStats, QueueTraceSample};
use crate::rng::{stream, Stream};
use crate::sim::{Counters, FlowSetup, Simulation, Topology};
use crate::time::SimTime;
use crate::traffic::{FlowKind, TcpConfig};

#[derive(Debug, Clone)]
pub struct RunReport {
    pub flows: Vec<FlowStats>,
    pub trace: Vec<QueueTraceSample>,
    /// Delivered bits in the window over bottleneck capacity.
    pub utilization: f64,
    /// `None` when nothing was delivered.
    pub jain_index: Option<f64>,
    /// TCP aggregate throughput as a fraction of bottleneck capacity.
    pub tcp_share: f64,
    pub udp_share: f64,
    /// Time-weighted mean of the averaged total queue over the window.
    pub mean_ewma_qlen: f64,
    pub mean_qlen: f64,
    pub window_s: f64,
    pub bottleneck_bps: u64,
    pub counters: Counters,
}

impl RunReport {
    fn aggregate_bps(&self, kind: FlowKind) -> f64 {
        self.flows
            .iter()
            .filter(|f| f.kind == kind)
            .fold(0.0, |acc, f| acc + f.throughput_bps)
    }

    pub fn tcp_throughput_bps(&self) -> f64 {
        self.aggregate_bps(FlowKind::Tcp)
    }

    pub fn udp_throughput_bps(&self) -> f64 {
        self.aggregate_bps(FlowKind::Udp)
    }

    /// UDP fraction of all bytes delivered in the window.
    pub fn udp_byte_share(&self) -> f64 {
        let total: u64 = self.flows.iter().map(|f| f.delivered_bytes).sum();
        let udp: u64 = self
            .flows
            .iter()
            .filter(|f| f.kind == FlowKind::Udp)
            .map(|f| f.delivered_bytes)
            .sum();
        if total == 0 {
            0.0
        } else {
            udp as f64 / total as f64
        }
    }
}

/// Flow layout: TCP flows first, then UDP; flow `i` starts at `i * stagger`.
pub fn flow_setups(cfg: &ScenarioConfig) -> Vec<FlowSetup> {
    let start = |i: usize| SimTime::from_secs_f64(i as f64 * cfg.start_stagger_s);
    let tcp = TcpConfig {
        max_window: cfg.tcp_max_window,
        variant: cfg.tcp_variant,
        ..TcpConfig::default()
    };
    let mut flows: Vec<FlowSetup> = (0..cfg.tcp_flows)
        .map(|i| FlowSetup::Tcp {
            start: start(i),
            config: tcp.clone(),
        })
        .collect();
    flows.extend((0..cfg.udp_flows).map(|j| FlowSetup::Cbr {
        start: start(cfg.tcp_flows + j),
        rate_bps: cfg.udp_rate_bps,
    }));
    flows
}

pub fn build_simulation(cfg: &ScenarioConfig) -> Simulation {
    let t = &cfg.topology;
    let topology = Topology {
        access_bps: t.access_bps,
        access_delay: SimTime::from_secs_f64(t.access_delay_s),
        bottleneck_bps: t.bottleneck_bps,
        bottleneck_delay: SimTime::from_secs_f64(t.bottleneck_delay_s),
    };
    let discipline = aqm::build(
        cfg.discipline,
        &cfg.params,
        cfg.buffer,
        cfg.packet_size,
        stream(cfg.seed, Stream::Discipline),
    );
    let end = SimTime::from_secs_f64(cfg.duration_s);
    let warmup = SimTime::from_secs_f64(cfg.effective_warmup_s()).min(end);
    Simulation::new(topology, &flow_setups(cfg), cfg.packet_size, discipline, warmup, end)
}

/// Runs one scenario to completion. Deterministic in `(cfg, cfg.seed)`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport, ConfigError> {
    cfg.validate()?;
    let out = build_simulation(cfg).finish();
    let bps = cfg.topology.bottleneck_bps;
    let throughputs: Vec<f64> = out.flows.iter().map(|f| f.throughput_bps).collect();
    let delivered_bits: f64 = out.flows.iter().map(|f| f.delivered_bytes as f64 * 8.0).sum();
    let mut report = RunReport {
        utilization: utilization(delivered_bits, bps as f64, out.window_s),
        jain_index: jain_index(&throughputs).ok(),
        tcp_share: 0.0,
        udp_share: 0.0,
        mean_ewma_qlen: out.mean_ewma_qlen,
        mean_qlen: out.mean_qlen,
        window_s: out.window_s,
        bottleneck_bps: bps,
        counters: out.counters,
        trace: out.trace,
        flows: out.flows,
    };
    report.tcp_share = report.tcp_throughput_bps() / bps as f64;
    report.udp_share = report.udp_throughput_bps() / bps as f64;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: String,
    pub repetition: u32,
    pub seed: u64,
    pub report: RunReport,
}

/// Means over the repetitions of one value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAggregate {
    pub value: String,
    pub runs: u32,
    pub utilization: f64,
    pub jain_index: Option<f64>,
    pub tcp_share: f64,
    pub udp_share: f64,
    pub tcp_throughput_bps: f64,
    pub udp_throughput_bps: f64,
    pub mean_ewma_qlen: f64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub param: String,
    /// Ordered by value as listed, then by repetition.
    pub points: Vec<SweepPoint>,
    pub aggregates: Vec<SweepAggregate>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Runs every `(value, repetition)` point of `cfg.sweep`, in parallel.
///
/// Repetition `r` uses seed `cfg.seed + r`.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<SweepReport, ConfigError> {
    cfg.validate()?;
    let Some(spec) = &cfg.sweep else {
        return Err(ConfigError {
            issues: vec![ConfigIssue {
                path: "sweep.param".into(),
                reason: "missing; not a sweep".into(),
            }],
        });
    };
    let mut jobs = Vec::new();
    for value in &spec.values {
        for rep in 0..spec.repetitions {
            let mut point = cfg.clone();
            point.sweep = None;
            point.seed = cfg.seed.wrapping_add(u64::from(rep));
            point
                .set(&spec.param, value)
                .map_err(|e| ConfigError { issues: vec![e] })?;
            jobs.push((value.clone(), rep, point));
        }
    }
    let points = jobs
        .into_par_iter()
        .map(|(value, repetition, point)| {
            run_scenario(&point).map(|report| SweepPoint {
                value,
                repetition,
                seed: point.seed,
                report,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let aggregates = spec
        .values
        .iter()
        .map(|v| {
            let runs: Vec<&RunReport> = points.iter().filter(|p| &p.value == v).map(|p| &p.report).collect();
            let jains: Option<Vec<f64>> = runs.iter().map(|r| r.jain_index).collect();
            SweepAggregate {
                value: v.clone(),
                runs: runs.len() as u32,
                utilization: mean(runs.iter().map(|r| r.utilization)),
                jain_index: jains.map(|j| mean(j.into_iter())),
                tcp_share: mean(runs.iter().map(|r| r.tcp_share)),
                udp_share: mean(runs.iter().map(|r| r.udp_share)),
                tcp_throughput_bps: mean(runs.iter().map(|r| r.tcp_throughput_bps())),
                udp_throughput_bps: mean(runs.iter().map(|r| r.udp_throughput_bps())),
                mean_ewma_qlen: mean(runs.iter().map(|r| r.mean_ewma_qlen)),
            }
        })
        .collect();
    Ok(SweepReport {
        param: spec.param.clone(),
        points,
        aggregates,
    })
}
