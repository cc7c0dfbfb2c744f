use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use agile_sim::config::{RunConfig, TraceLevel};
use agile_sim::experiments::{run_scenario, summary_line, sweep, write_metrics_csv};
use agile_sim::netsim::write_trace_csv;
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

/// Packet-level dumbbell simulator for Agile-SD, NewReno and Cubic.
#[derive(Debug, Parser)]
#[command(name = "agile-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write metrics.csv.
    Run(Common),
    /// Run every buffer x PER x algorithm combination and write sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated buffer sizes, in packets.
        #[arg(long)]
        buffers: Option<String>,
        /// Comma-separated packet error rates.
        #[arg(long)]
        pers: Option<String>,
        /// Comma-separated algorithms (the pairing, for inter-fairness).
        #[arg(long)]
        ccas: Option<String>,
    },
    /// Run one scenario and also write the cwnd time series to trace.csv.
    Trace {
        #[command(flatten)]
        common: Common,
        /// Record every ACK instead of sampling.
        #[arg(long)]
        full: bool,
        /// Sampling interval, e.g. `10ms`.
        #[arg(long)]
        interval: Option<String>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Config file of `key=value` lines; flags override it.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides, applied after the other flags.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    scenario: Option<String>,
    /// Algorithm, or comma-separated list of one per flow.
    #[arg(long)]
    cca: Option<String>,
    /// Bottleneck buffer, in packets.
    #[arg(long)]
    buffer: Option<String>,
    /// Packet error rate on the bottleneck.
    #[arg(long)]
    per: Option<String>,
    #[arg(long)]
    flows: Option<String>,
    #[arg(long)]
    duration: Option<String>,
    #[arg(long)]
    bandwidth: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// 100 Mbps / 10 s instead of the reference scale.
    #[arg(long)]
    scaled: bool,
    /// Output directory.
    #[arg(long, short, env = "AGILE_SIM_OUT")]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self, extra: &[(&str, Option<&String>)]) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            cfg.apply_text(&text).with_context(|| format!("in config {}", path.display()))?;
        }
        let flags = [
            ("scenario", self.scenario.as_ref()),
            ("cca", self.cca.as_ref()),
            ("buffer", self.buffer.as_ref()),
            ("per", self.per.as_ref()),
            ("flows", self.flows.as_ref()),
            ("duration", self.duration.as_ref()),
            ("bandwidth", self.bandwidth.as_ref()),
            ("seed", self.seed.as_ref()),
        ];
        for (key, value) in flags.iter().chain(extra) {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.scaled {
            cfg.scaled = true;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        for pair in &self.sets {
            cfg.apply_pair(pair)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.load(&[])?;
            cmd_run(&cfg, false)
        }
        Command::Trace { common, full, interval } => {
            let mut cfg = common.load(&[("trace_interval", interval.as_ref())])?;
            cfg.trace = if full { TraceLevel::Full } else { TraceLevel::Sampled };
            cmd_run(&cfg, true)
        }
        Command::Sweep { common, buffers, pers, ccas } => {
            let cfg = common.load(&[("buffers", buffers.as_ref()), ("pers", pers.as_ref()), ("ccas", ccas.as_ref())])?;
            cmd_sweep(&cfg)
        }
    }
}

fn prepare_dir(cfg: &RunConfig) -> Result<&Path> {
    let dir = cfg.output_dir.as_path();
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    fs::write(dir.join("config.txt"), cfg.emit())
        .with_context(|| format!("writing to output directory {}", dir.display()))?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn cmd_run(cfg: &RunConfig, with_trace: bool) -> Result<()> {
    let dir = prepare_dir(cfg)?;
    let run = run_scenario(&cfg.scenario()).context("simulation failed")?;
    let path = dir.join("metrics.csv");
    let mut out = create(&path)?;
    write_metrics_csv(&mut out, std::slice::from_ref(&run.report))?;
    out.flush().with_context(|| format!("writing {}", path.display()))?;
    if with_trace {
        let path = dir.join("trace.csv");
        let mut out = create(&path)?;
        write_trace_csv(&mut out, &run.result.trace)?;
        out.flush().with_context(|| format!("writing {}", path.display()))?;
    }
    println!("{}", summary_line(&run.report));
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig) -> Result<()> {
    if cfg.trace != TraceLevel::Off {
        bail!("tracing is only available for single runs; use the trace subcommand");
    }
    let dir = prepare_dir(cfg)?;
    let spec = cfg.scenario();
    let reports = sweep(&spec, &cfg.buffers, &cfg.pers, &cfg.ccas).context("sweep failed")?;
    let path = dir.join("sweep.csv");
    let mut out = create(&path)?;
    write_metrics_csv(&mut out, &reports)?;
    out.flush().with_context(|| format!("writing {}", path.display()))?;
    for report in &reports {
        println!("{}", summary_line(report));
    }
    Ok(())
}
