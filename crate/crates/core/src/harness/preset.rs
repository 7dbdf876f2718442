//! Named experiment settings.

use thiserror::Error;

use super::config::{ScenarioConfig, SweepSpec};
use crate::aqm::{Capacity, DisciplineKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown preset {name:?}; available: {}", .available.join(", "))]
pub struct UnknownPreset {
    pub name: String,
    pub available: Vec<String>,
}

/// Every preset name, in a stable order.
pub fn preset_names() -> Vec<String> {
    let mut names = vec!["baseline".to_string()];
    names.extend(DisciplineKind::ALL.iter().map(|k| format!("baseline-{k}")));
    names.extend(DisciplineKind::ALL.iter().map(|k| format!("fig4-sweep-{k}")));
    names.extend(
        [
            "fig5-traces",
            "table1-fred",
            "fred-buffer-sensitivity",
            "blue-49tcp",
            "blue-49tcp-1udp",
            "sfb-49tcp",
            "sfb-49tcp-1udp",
            "sfb-boxtime",
            "sfb-5udp-fairness",
            "choke-candidates",
            "choke-intervals",
            "choke-flow-mix",
        ]
        .map(String::from),
    );
    names
}

fn sweep(param: &str, values: &[&str]) -> Option<SweepSpec> {
    Some(SweepSpec {
        param: param.to_string(),
        values: values.iter().map(|v| v.to_string()).collect(),
        repetitions: 1,
    })
}

/// 10 TCP flows and one 8 Mbps CBR flow over a 1 Mbps bottleneck with a
/// 150-packet buffer.
fn baseline(kind: DisciplineKind) -> ScenarioConfig {
    ScenarioConfig {
        discipline: kind,
        ..ScenarioConfig::default()
    }
}

/// 49 long-lived TCP flows with 300-packet windows, optionally joined by
/// a 40 Mbps CBR flow.
fn many_tcp(kind: DisciplineKind, buffer_bytes: u64, with_udp: bool) -> ScenarioConfig {
    let mut cfg = baseline(kind);
    cfg.tcp_flows = 49;
    cfg.tcp_max_window = 300;
    cfg.buffer = Capacity::Bytes(buffer_bytes);
    cfg.udp_flows = usize::from(with_udp);
    cfg.udp_rate_bps = 40_000_000;
    // Access links must carry the 40 Mbps source.
    cfg.topology.access_bps = 100_000_000;
    cfg
}

pub fn preset(name: &str) -> Result<ScenarioConfig, UnknownPreset> {
    if let Some(kind) = name.strip_prefix("baseline-").and_then(|k| k.parse().ok()) {
        return Ok(baseline(kind));
    }
    if let Some(kind) = name.strip_prefix("fig4-sweep-").and_then(|k| k.parse().ok()) {
        let mut cfg = baseline(kind);
        cfg.sweep = sweep(
            "udp.rate_bps",
            &["100000", "500000", "1000000", "2000000", "4000000", "6000000", "8000000"],
        );
        return Ok(cfg);
    }
    let cfg = match name {
        "baseline" => baseline(DisciplineKind::Red),
        "fig5-traces" => {
            let mut cfg = baseline(DisciplineKind::DropTail);
            cfg.sweep = sweep("discipline", &DisciplineKind::ALL.map(|k| k.as_str()));
            cfg
        }
        "table1-fred" => {
            let mut cfg = baseline(DisciplineKind::Fred);
            cfg.udp_rate_bps = 2_000_000;
            cfg.sweep = sweep(
                "topology.bottleneck_bps",
                &["500000", "1000000", "2000000", "4000000", "8000000", "10000000", "20000000"],
            );
            cfg
        }
        "fred-buffer-sensitivity" => {
            let mut cfg = baseline(DisciplineKind::Fred);
            cfg.sweep = sweep("buffer.scaled_packets", &["15", "30", "45", "60", "90", "120", "150"]);
            cfg
        }
        "blue-49tcp" => many_tcp(DisciplineKind::Blue, 300_000, false),
        "blue-49tcp-1udp" => many_tcp(DisciplineKind::Blue, 300_000, true),
        "sfb-49tcp" => many_tcp(DisciplineKind::Sfb, 150_000, false),
        "sfb-49tcp-1udp" => many_tcp(DisciplineKind::Sfb, 150_000, true),
        "sfb-boxtime" => {
            let mut cfg = many_tcp(DisciplineKind::Sfb, 150_000, true);
            cfg.sweep = sweep("discipline.sfb.boxtime", &["0.5", "0.05", "0.02"]);
            cfg
        }
        "sfb-5udp-fairness" => {
            let mut cfg = baseline(DisciplineKind::Sfb);
            cfg.udp_flows = 5;
            cfg.udp_rate_bps = 4_000_000;
            cfg.sweep = sweep("discipline.sfb.boxtime_jitter", &["0", "0.5"]);
            cfg
        }
        "choke-candidates" => {
            let mut cfg = baseline(DisciplineKind::Choke);
            cfg.params.choke.adaptive = false;
            cfg.sweep = sweep("discipline.choke.cand_num", &["1", "2", "3", "4", "5"]);
            cfg
        }
        "choke-intervals" => {
            let mut cfg = baseline(DisciplineKind::Choke);
            cfg.sweep = sweep("discipline.choke.interval_num", &["1", "2", "3", "4", "5"]);
            cfg
        }
        "choke-flow-mix" => {
            let mut cfg = baseline(DisciplineKind::Choke);
            cfg.sweep = sweep("traffic.mix", &["1:1", "10:1", "10:5"]);
            cfg
        }
        _ => {
            return Err(UnknownPreset {
                name: name.to_string(),
                available: preset_names(),
            })
        }
    };
    Ok(cfg)
}
