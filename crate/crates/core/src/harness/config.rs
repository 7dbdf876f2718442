//! Scenario configuration in flat `key = value` text.
//!
//! ```text
//! # comments start with '#'
//! discipline = red
//! discipline.red.min_th = 50
//! tcp.flows = 10
//! udp.rate_bps = 8000000
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::aqm::{Capacity, DisciplineKind, DisciplineParams};
use crate::packet::DEFAULT_PACKET_SIZE;
use crate::traffic::TcpVariant;

/// One violation, named by key path.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {reason}")]
pub struct ConfigIssue {
    pub path: String,
    pub reason: String,
}

impl ConfigIssue {
    fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

/// Every problem found in a document.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid configuration:\n{}", .issues.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyConfig {
    pub access_bps: u64,
    pub access_delay_s: f64,
    pub bottleneck_bps: u64,
    pub bottleneck_delay_s: f64,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            access_bps: 10_000_000,
            access_delay_s: 0.001,
            bottleneck_bps: 1_000_000,
            bottleneck_delay_s: 0.010,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

/// A parameter sweep over a base scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Any settable key, e.g. `udp.rate_bps`.
    pub param: String,
    pub values: Vec<String>,
    /// Runs per value, with seeds `seed, seed + 1, ...`.
    pub repetitions: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub topology: TopologyConfig,
    pub buffer: Capacity,
    pub discipline: DisciplineKind,
    pub params: DisciplineParams,
    pub tcp_flows: usize,
    pub tcp_max_window: u32,
    pub tcp_variant: TcpVariant,
    pub udp_flows: usize,
    pub udp_rate_bps: u64,
    pub packet_size: u32,
    /// Flow `i` starts at `i * start_stagger_s`.
    pub start_stagger_s: f64,
    pub duration_s: f64,
    /// `None` measures from 10% of the duration.
    pub warmup_s: Option<f64>,
    pub seed: u64,
    pub output: OutputConfig,
    pub sweep: Option<SweepSpec>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            topology: TopologyConfig::default(),
            buffer: Capacity::Packets(150),
            discipline: DisciplineKind::DropTail,
            params: DisciplineParams::default(),
            tcp_flows: 10,
            tcp_max_window: 50,
            tcp_variant: TcpVariant::Reno,
            udp_flows: 1,
            udp_rate_bps: 8_000_000,
            packet_size: DEFAULT_PACKET_SIZE,
            start_stagger_s: 0.1,
            duration_s: 100.0,
            warmup_s: None,
            seed: 1,
            output: OutputConfig::default(),
            sweep: None,
        }
    }
}

fn parse_num<T: FromStr>(value: &str) -> Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("cannot parse {value:?} as a number"))
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(format!("expected true or false, got {value:?}")),
    }
}

fn parse_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

impl ScenarioConfig {
    /// Parses and validates a document, reporting every violation.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        let mut issues = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                issues.push(ConfigIssue::new(format!("line {}", n + 1), "expected `key = value`"));
                continue;
            };
            if let Err(e) = cfg.set(key.trim(), value.trim()) {
                issues.push(e);
            }
        }
        if let Err(mut e) = cfg.validate() {
            issues.append(&mut e.issues);
        }
        if issues.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError { issues })
        }
    }

    /// Sets one key. Shared by the parser and by sweeps.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigIssue> {
        self.set_inner(key, value)
            .map_err(|reason| ConfigIssue::new(key, reason))
    }

    fn set_inner(&mut self, key: &str, v: &str) -> Result<(), String> {
        let red = &mut self.params.red;
        let fred = &mut self.params.fred;
        let blue = &mut self.params.blue;
        let sfb = &mut self.params.sfb;
        let choke = &mut self.params.choke;
        match key {
            "topology.access_bps" => self.topology.access_bps = parse_num(v)?,
            "topology.access_delay_s" => self.topology.access_delay_s = parse_num(v)?,
            "topology.bottleneck_bps" => self.topology.bottleneck_bps = parse_num(v)?,
            "topology.bottleneck_delay_s" => self.topology.bottleneck_delay_s = parse_num(v)?,
            "buffer.packets" => self.buffer = Capacity::Packets(parse_num(v)?),
            "buffer.bytes" => self.buffer = Capacity::Bytes(parse_num(v)?),
            "buffer.scaled_packets" => {
                // Buffer in packets with RED thresholds at one and two thirds.
                let n: usize = parse_num(v)?;
                self.buffer = Capacity::Packets(n);
                red.min_th = n as f64 / 3.0;
                red.max_th = 2.0 * n as f64 / 3.0;
            }
            "discipline" => self.discipline = v.parse()?,
            "discipline.red.min_th" => red.min_th = parse_num(v)?,
            "discipline.red.max_th" => red.max_th = parse_num(v)?,
            "discipline.red.max_p" => red.max_p = parse_num(v)?,
            "discipline.red.w_q" => red.w_q = parse_num(v)?,
            "discipline.red.count_spread" => red.count_spread = parse_bool(v)?,
            "discipline.fred.min_q" => fred.min_q = parse_num(v)?,
            "discipline.fred.two_packet_mode" => fred.two_packet_mode = parse_bool(v)?,
            "discipline.blue.d1" => blue.d1 = parse_num(v)?,
            "discipline.blue.d2" => blue.d2 = parse_num(v)?,
            "discipline.blue.freeze_time" => blue.freeze_time = parse_num(v)?,
            "discipline.sfb.levels" => sfb.levels = parse_num(v)?,
            "discipline.sfb.bins" => sfb.bins = parse_num(v)?,
            "discipline.sfb.d1" => sfb.d1 = parse_num(v)?,
            "discipline.sfb.d2" => sfb.d2 = parse_num(v)?,
            "discipline.sfb.freeze_time" => sfb.freeze_time = parse_num(v)?,
            "discipline.sfb.bin_size" => {
                sfb.bin_size = if v == "auto" { None } else { Some(parse_num(v)?) }
            }
            "discipline.sfb.boxtime" => sfb.boxtime = parse_num(v)?,
            "discipline.sfb.boxtime_jitter" => sfb.boxtime_jitter = parse_num(v)?,
            "discipline.sfb.h_interval" => sfb.h_interval = parse_num(v)?,
            "discipline.choke.adaptive" => choke.adaptive = parse_bool(v)?,
            "discipline.choke.cand_num" => choke.cand_num = parse_num(v)?,
            "discipline.choke.interval_num" => choke.interval_num = parse_num(v)?,
            "tcp.flows" => self.tcp_flows = parse_num(v)?,
            "tcp.max_window" => self.tcp_max_window = parse_num(v)?,
            "tcp.variant" => self.tcp_variant = v.parse()?,
            "udp.flows" => self.udp_flows = parse_num(v)?,
            "udp.rate_bps" => self.udp_rate_bps = parse_num(v)?,
            "traffic.packet_size" => self.packet_size = parse_num(v)?,
            "traffic.start_stagger_s" => self.start_stagger_s = parse_num(v)?,
            "traffic.mix" => {
                let (t, u) = v
                    .split_once(':')
                    .ok_or_else(|| format!("expected `tcp:udp` flow counts, got {v:?}"))?;
                self.tcp_flows = parse_num(t.trim())?;
                self.udp_flows = parse_num(u.trim())?;
            }
            "run.duration_s" => self.duration_s = parse_num(v)?,
            "run.warmup_s" => {
                self.warmup_s = if v == "auto" { None } else { Some(parse_num(v)?) }
            }
            "run.seed" => self.seed = parse_num(v)?,
            "output.dir" => self.output.dir = (!v.is_empty()).then(|| PathBuf::from(v)),
            "sweep.param" => self.sweep_mut().param = v.to_string(),
            "sweep.values" => self.sweep_mut().values = parse_list(v),
            "sweep.repetitions" => self.sweep_mut().repetitions = parse_num(v)?,
            _ => return Err("unknown key".to_string()),
        }
        Ok(())
    }

    fn sweep_mut(&mut self) -> &mut SweepSpec {
        self.sweep.get_or_insert_with(|| SweepSpec {
            param: String::new(),
            values: Vec::new(),
            repetitions: 1,
        })
    }

    /// Start of the measurement window.
    pub fn effective_warmup_s(&self) -> f64 {
        self.warmup_s.unwrap_or(0.1 * self.duration_s)
    }

    pub fn total_flows(&self) -> usize {
        self.tcp_flows + self.udp_flows
    }

    /// Checks every invariant, collecting all violations.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut issues = Vec::new();
        let mut check = |ok: bool, path: &str, reason: &str| {
            if !ok {
                issues.push(ConfigIssue::new(path, reason));
            }
        };
        let t = &self.topology;
        check(t.access_bps > 0, "topology.access_bps", "must be positive");
        check(t.bottleneck_bps > 0, "topology.bottleneck_bps", "must be positive");
        check(t.access_delay_s >= 0.0 && t.access_delay_s.is_finite(), "topology.access_delay_s", "must be non-negative");
        check(
            t.bottleneck_delay_s >= 0.0 && t.bottleneck_delay_s.is_finite(),
            "topology.bottleneck_delay_s",
            "must be non-negative",
        );
        match self.buffer {
            Capacity::Packets(n) => check(n > 0, "buffer.packets", "must be positive"),
            Capacity::Bytes(n) => check(n >= u64::from(self.packet_size), "buffer.bytes", "must hold at least one packet"),
        }

        let red = &self.params.red;
        check(red.min_th >= 0.0, "discipline.red.min_th", "must be non-negative");
        check(red.min_th < red.max_th, "discipline.red.max_th", "min_th < max_th required");
        check((0.0..=1.0).contains(&red.max_p), "discipline.red.max_p", "must lie in [0, 1]");
        check(red.w_q > 0.0 && red.w_q <= 1.0, "discipline.red.w_q", "must lie in (0, 1]");
        check(self.params.fred.min_q >= 0.0, "discipline.fred.min_q", "must be non-negative");
        let blue = &self.params.blue;
        check((0.0..=1.0).contains(&blue.d1), "discipline.blue.d1", "must lie in [0, 1]");
        check((0.0..=1.0).contains(&blue.d2), "discipline.blue.d2", "must lie in [0, 1]");
        check(blue.freeze_time >= 0.0, "discipline.blue.freeze_time", "must be non-negative");
        let sfb = &self.params.sfb;
        check(sfb.levels >= 1, "discipline.sfb.levels", "must be at least 1");
        check(sfb.bins >= 1, "discipline.sfb.bins", "must be at least 1");
        check((0.0..=1.0).contains(&sfb.d1), "discipline.sfb.d1", "must lie in [0, 1]");
        check((0.0..=1.0).contains(&sfb.d2), "discipline.sfb.d2", "must lie in [0, 1]");
        check(sfb.freeze_time >= 0.0, "discipline.sfb.freeze_time", "must be non-negative");
        check(sfb.bin_size.is_none_or(|b| b > 0.0), "discipline.sfb.bin_size", "must be positive");
        check(sfb.boxtime >= 0.0, "discipline.sfb.boxtime", "must be non-negative");
        check((0.0..1.0).contains(&sfb.boxtime_jitter), "discipline.sfb.boxtime_jitter", "must lie in [0, 1)");
        check(sfb.h_interval >= 0.0, "discipline.sfb.h_interval", "must be non-negative");
        let choke = &self.params.choke;
        check(choke.cand_num >= 1, "discipline.choke.cand_num", "must be at least 1");
        check(choke.interval_num >= 1, "discipline.choke.interval_num", "must be at least 1");

        check(self.total_flows() >= 1, "tcp.flows", "at least one flow required");
        check(self.tcp_max_window >= 1, "tcp.max_window", "must be at least 1");
        check(self.udp_flows == 0 || self.udp_rate_bps > 0, "udp.rate_bps", "must be positive");
        check(self.packet_size > 0, "traffic.packet_size", "must be positive");
        check(self.start_stagger_s >= 0.0, "traffic.start_stagger_s", "must be non-negative");
        check(self.duration_s >= 0.0 && self.duration_s.is_finite(), "run.duration_s", "must be non-negative");
        if let Some(w) = self.warmup_s {
            check(w >= 0.0 && w <= self.duration_s, "run.warmup_s", "must lie in [0, duration_s]");
        }
        if let Some(sweep) = &self.sweep {
            check(!sweep.values.is_empty(), "sweep.values", "at least one value required");
            check(sweep.repetitions >= 1, "sweep.repetitions", "must be at least 1");
            if sweep.param.is_empty() {
                check(false, "sweep.param", "missing");
            } else if sweep.param.starts_with("sweep.") {
                check(false, "sweep.param", "cannot sweep a sweep key");
            } else {
                for v in &sweep.values {
                    let mut probe = self.clone();
                    probe.sweep = None;
                    if let Err(e) = probe.set(&sweep.param, v) {
                        check(false, "sweep.param", &format!("{} = {v}: {}", e.path, e.reason));
                    } else if let Err(e) = probe.validate() {
                        for i in e.issues {
                            check(false, "sweep.values", &format!("{} = {v} gives {i}", sweep.param));
                        }
                    }
                }
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { issues })
        }
    }

    /// Emits a document that parses back to an identical config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        let t = &self.topology;
        kv("topology.access_bps", t.access_bps.to_string());
        kv("topology.access_delay_s", t.access_delay_s.to_string());
        kv("topology.bottleneck_bps", t.bottleneck_bps.to_string());
        kv("topology.bottleneck_delay_s", t.bottleneck_delay_s.to_string());
        match self.buffer {
            Capacity::Packets(n) => kv("buffer.packets", n.to_string()),
            Capacity::Bytes(n) => kv("buffer.bytes", n.to_string()),
        }
        kv("discipline", self.discipline.to_string());
        let p = &self.params;
        kv("discipline.red.min_th", p.red.min_th.to_string());
        kv("discipline.red.max_th", p.red.max_th.to_string());
        kv("discipline.red.max_p", p.red.max_p.to_string());
        kv("discipline.red.w_q", p.red.w_q.to_string());
        kv("discipline.red.count_spread", p.red.count_spread.to_string());
        kv("discipline.fred.min_q", p.fred.min_q.to_string());
        kv("discipline.fred.two_packet_mode", p.fred.two_packet_mode.to_string());
        kv("discipline.blue.d1", p.blue.d1.to_string());
        kv("discipline.blue.d2", p.blue.d2.to_string());
        kv("discipline.blue.freeze_time", p.blue.freeze_time.to_string());
        kv("discipline.sfb.levels", p.sfb.levels.to_string());
        kv("discipline.sfb.bins", p.sfb.bins.to_string());
        kv("discipline.sfb.d1", p.sfb.d1.to_string());
        kv("discipline.sfb.d2", p.sfb.d2.to_string());
        kv("discipline.sfb.freeze_time", p.sfb.freeze_time.to_string());
        kv(
            "discipline.sfb.bin_size",
            p.sfb.bin_size.map_or_else(|| "auto".to_string(), |b| b.to_string()),
        );
        kv("discipline.sfb.boxtime", p.sfb.boxtime.to_string());
        kv("discipline.sfb.boxtime_jitter", p.sfb.boxtime_jitter.to_string());
        kv("discipline.sfb.h_interval", p.sfb.h_interval.to_string());
        kv("discipline.choke.adaptive", p.choke.adaptive.to_string());
        kv("discipline.choke.cand_num", p.choke.cand_num.to_string());
        kv("discipline.choke.interval_num", p.choke.interval_num.to_string());
        kv("tcp.flows", self.tcp_flows.to_string());
        kv("tcp.max_window", self.tcp_max_window.to_string());
        kv("tcp.variant", self.tcp_variant.to_string());
        kv("udp.flows", self.udp_flows.to_string());
        kv("udp.rate_bps", self.udp_rate_bps.to_string());
        kv("traffic.packet_size", self.packet_size.to_string());
        kv("traffic.start_stagger_s", self.start_stagger_s.to_string());
        kv("run.duration_s", self.duration_s.to_string());
        kv(
            "run.warmup_s",
            self.warmup_s.map_or_else(|| "auto".to_string(), |w| w.to_string()),
        );
        kv("run.seed", self.seed.to_string());
        if let Some(dir) = &self.output.dir {
            kv("output.dir", dir.display().to_string());
        }
        if let Some(s) = &self.sweep {
            kv("sweep.param", s.param.clone());
            kv("sweep.values", s.values.join(", "));
            kv("sweep.repetitions", s.repetitions.to_string());
        }
        out
    }
}
