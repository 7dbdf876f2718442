//! CSV emission.

use std::fs;
use std::io;
use std::path::Path;

use super::run::{RunReport, SweepReport};

/// Named CSV documents, in emission order.
pub type CsvFiles = Vec<(&'static str, Vec<u8>)>;

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> io::Result<Vec<u8>> {
    w.into_inner().map_err(|e| e.into_error())
}

pub fn flows_csv(r: &RunReport) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["flow_id", "kind", "delivered_bytes", "dropped_packets", "throughput_bps"])?;
    for f in &r.flows {
        w.write_record([
            f.flow_id.0.to_string(),
            f.kind.to_string(),
            f.delivered_bytes.to_string(),
            f.dropped_packets.to_string(),
            f.throughput_bps.to_string(),
        ])?;
    }
    finish(w)
}

pub fn queue_csv(r: &RunReport) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["time_s", "total_qlen", "tcp_qlen", "udp_qlen", "ewma_qlen"])?;
    for s in &r.trace {
        w.write_record([
            s.time.as_secs_f64().to_string(),
            s.total_qlen.to_string(),
            s.tcp_qlen.to_string(),
            s.udp_qlen.to_string(),
            s.ewma_qlen.to_string(),
        ])?;
    }
    finish(w)
}

pub fn summary_csv(r: &RunReport) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["utilization", "jain_index", "tcp_share", "udp_share"])?;
    w.write_record([
        r.utilization.to_string(),
        opt(r.jain_index),
        r.tcp_share.to_string(),
        r.udp_share.to_string(),
    ])?;
    finish(w)
}

pub fn run_csvs(r: &RunReport) -> io::Result<CsvFiles> {
    Ok(vec![
        ("flows.csv", flows_csv(r)?),
        ("queue.csv", queue_csv(r)?),
        ("summary.csv", summary_csv(r)?),
    ])
}

pub fn sweep_csvs(s: &SweepReport) -> io::Result<CsvFiles> {
    let mut points = csv::Writer::from_writer(Vec::new());
    points.write_record([
        "param",
        "value",
        "repetition",
        "seed",
        "utilization",
        "jain_index",
        "tcp_share",
        "udp_share",
        "tcp_throughput_bps",
        "udp_throughput_bps",
        "mean_ewma_qlen",
    ])?;
    let mut flows = csv::Writer::from_writer(Vec::new());
    flows.write_record([
        "value",
        "repetition",
        "flow_id",
        "kind",
        "delivered_bytes",
        "dropped_packets",
        "throughput_bps",
    ])?;
    for p in &s.points {
        let r = &p.report;
        points.write_record([
            s.param.clone(),
            p.value.clone(),
            p.repetition.to_string(),
            p.seed.to_string(),
            r.utilization.to_string(),
            opt(r.jain_index),
            r.tcp_share.to_string(),
            r.udp_share.to_string(),
            r.tcp_throughput_bps().to_string(),
            r.udp_throughput_bps().to_string(),
            r.mean_ewma_qlen.to_string(),
        ])?;
        for f in &r.flows {
            flows.write_record([
                p.value.clone(),
                p.repetition.to_string(),
                f.flow_id.0.to_string(),
                f.kind.to_string(),
                f.delivered_bytes.to_string(),
                f.dropped_packets.to_string(),
                f.throughput_bps.to_string(),
            ])?;
        }
    }
    let mut agg = csv::Writer::from_writer(Vec::new());
    agg.write_record([
        "value",
        "runs",
        "utilization",
        "jain_index",
        "tcp_share",
        "udp_share",
        "tcp_throughput_bps",
        "udp_throughput_bps",
        "mean_ewma_qlen",
    ])?;
    for a in &s.aggregates {
        agg.write_record([
            a.value.clone(),
            a.runs.to_string(),
            a.utilization.to_string(),
            opt(a.jain_index),
            a.tcp_share.to_string(),
            a.udp_share.to_string(),
            a.tcp_throughput_bps.to_string(),
            a.udp_throughput_bps.to_string(),
            a.mean_ewma_qlen.to_string(),
        ])?;
    }
    Ok(vec![
        ("sweep.csv", finish(points)?),
        ("sweep_flows.csv", finish(flows)?),
        ("sweep_summary.csv", finish(agg)?),
    ])
}

pub fn write_files(dir: &Path, files: &CsvFiles) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for (name, bytes) in files {
        fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_scenario, ScenarioConfig};

    #[test]
    fn schemas() {
        let cfg = ScenarioConfig {
            duration_s: 2.0,
            ..ScenarioConfig::default()
        };
        let r = run_scenario(&cfg).unwrap();
        let files = run_csvs(&r).unwrap();
        let header = |i: usize| {
            String::from_utf8(files[i].1.clone())
                .unwrap()
                .lines()
                .next()
                .unwrap()
                .to_string()
        };
        assert_eq!(header(0), "flow_id,kind,delivered_bytes,dropped_packets,throughput_bps");
        assert_eq!(header(1), "time_s,total_qlen,tcp_qlen,udp_qlen,ewma_qlen");
        assert_eq!(header(2), "utilization,jain_index,tcp_share,udp_share");
        let flows = String::from_utf8(files[0].1.clone()).unwrap();
        assert_eq!(flows.lines().count(), 12);
    }

    #[test]
    fn write_to_dir() {
        let dir = tempfile::tempdir().unwrap();
        let files: CsvFiles = vec![("a.csv", b"x\n1\n".to_vec())];
        write_files(&dir.path().join("nested"), &files).unwrap();
        assert_eq!(fs::read(dir.path().join("nested/a.csv")).unwrap(), b"x\n1\n");
    }
}
