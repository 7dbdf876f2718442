use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use aqmsim::harness::{
    preset, run_csvs, run_scenario, run_sweep, sweep_csvs, write_files, RunReport, ScenarioConfig, SweepReport,
};

/// Packet-level AQM comparison simulator.
#[derive(Parser)]
#[command(name = "aqmsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the simulated duration in seconds.
    #[arg(long, global = true)]
    duration: Option<f64>,
    /// Directory for CSV output.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single scenario from a config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the sweep described by a config file.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a named preset, or print its config.
    Preset {
        /// Preset name; `list` prints every name.
        name: String,
        /// Print the config document instead of running it.
        #[arg(long)]
        emit_config: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ScenarioConfig::parse(&text)?)
}

fn apply(cfg: &mut ScenarioConfig, common: &Common) {
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(d) = common.duration {
        cfg.duration_s = d;
        if cfg.warmup_s.is_some_and(|w| w > d) {
            cfg.warmup_s = None;
        }
    }
    if let Some(dir) = &common.out_dir {
        cfg.output.dir = Some(dir.clone());
    }
}

fn print_run(r: &RunReport) {
    println!(
        "utilization {:.4}  jain {}  tcp_share {:.4}  udp_share {:.4}  mean_ewma_qlen {:.2}",
        r.utilization,
        r.jain_index.map_or("n/a".to_string(), |j| format!("{j:.4}")),
        r.tcp_share,
        r.udp_share,
        r.mean_ewma_qlen
    );
    for f in &r.flows {
        println!(
            "  flow {:>3} {}  {:>12.0} bps  dropped {}",
            f.flow_id.0, f.kind, f.throughput_bps, f.dropped_packets
        );
    }
}

fn print_sweep(s: &SweepReport) {
    println!(
        "{:>14}  {:>6}  {:>6}  {:>9}  {:>9}  {:>8}",
        s.param, "util", "jain", "tcp_share", "udp_share", "ewma_q"
    );
    for a in &s.aggregates {
        println!(
            "{:>14}  {:>6.3}  {:>6}  {:>9.4}  {:>9.4}  {:>8.2}",
            a.value,
            a.utilization,
            a.jain_index.map_or("n/a".to_string(), |j| format!("{j:.3}")),
            a.tcp_share,
            a.udp_share,
            a.mean_ewma_qlen
        );
    }
}

fn execute(cfg: &ScenarioConfig, force_sweep: bool) -> Result<()> {
    if force_sweep || cfg.sweep.is_some() {
        if cfg.sweep.is_none() {
            bail!("config has no sweep.param / sweep.values");
        }
        let report = run_sweep(cfg)?;
        print_sweep(&report);
        if let Some(dir) = &cfg.output.dir {
            write_files(dir, &sweep_csvs(&report)?)?;
        }
    } else {
        let report = run_scenario(cfg)?;
        print_run(&report);
        if let Some(dir) = &cfg.output.dir {
            write_files(dir, &run_csvs(&report)?)?;
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, common } => {
            let mut cfg = load(&config)?;
            apply(&mut cfg, &common);
            cfg.sweep = None;
            execute(&cfg, false)
        }
        Command::Sweep { config, common } => {
            let mut cfg = load(&config)?;
            apply(&mut cfg, &common);
            execute(&cfg, true)
        }
        Command::Preset {
            name,
            emit_config,
            common,
        } => {
            if name == "list" {
                for n in aqmsim::harness::preset_names() {
                    println!("{n}");
                }
                return Ok(());
            }
            let mut cfg = preset(&name)?;
            apply(&mut cfg, &common);
            if emit_config {
                print!("{}", cfg.to_text());
                return Ok(());
            }
            execute(&cfg, false)
        }
    }
}
