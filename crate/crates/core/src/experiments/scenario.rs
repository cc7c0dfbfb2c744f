use std::fmt;
use std::str::FromStr;

use super::metrics::{average_throughput, jain_fairness, loss_ratio};
use crate::cca::{CcaKind, ControllerConfig};
use crate::netsim::{
    self, build_dumbbell, DumbbellTopology, FlowSpec, RunOptions, RunResult, SimTime, TraceMode,
    DEFAULT_BANDWIDTH_BPS, DEFAULT_PAYLOAD_BYTES,
};
use crate::{ConfigError, Error};

/// Access delays, in milliseconds, given to successive flows of an
/// RTT-fairness run.
pub const RTT_FAIRNESS_DELAYS_MS: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

pub const DEFAULT_MULTI_FLOWS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    SingleFlow,
    /// Flows start one after another and stop in reverse order, so every
    /// flow's lifetime contains the next one's.
    SequentialMulti,
    /// All flows share the whole run.
    SynchronousMulti,
    /// One flow per listed algorithm, all concurrent.
    InterFairness,
    /// Homogeneous flows with different access delays.
    RttFairness,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::SingleFlow,
        ScenarioKind::SequentialMulti,
        ScenarioKind::SynchronousMulti,
        ScenarioKind::InterFairness,
        ScenarioKind::RttFairness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::SingleFlow => "single-flow",
            ScenarioKind::SequentialMulti => "sequential",
            ScenarioKind::SynchronousMulti => "synchronous",
            ScenarioKind::InterFairness => "inter-fairness",
            ScenarioKind::RttFairness => "rtt-fairness",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                ConfigError::invalid(
                    "scenario",
                    s,
                    "expected single-flow, sequential, synchronous, inter-fairness or rtt-fairness",
                )
            })
    }
}

/// Which delivered bytes count toward throughput.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThroughputMode {
    /// Unique payload delivered in order.
    #[default]
    Goodput,
    /// Every payload byte that reached the receiver, duplicates included.
    Raw,
}

impl ThroughputMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ThroughputMode::Goodput => "goodput",
            ThroughputMode::Raw => "raw",
        }
    }
}

impl FromStr for ThroughputMode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "goodput" => Ok(ThroughputMode::Goodput),
            "raw" => Ok(ThroughputMode::Raw),
            other => Err(ConfigError::invalid("throughput", other, "expected goodput or raw")),
        }
    }
}

/// Everything needed to reproduce one simulation run. Times in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    /// Ignored by single-flow and inter-fairness runs, whose flow count is
    /// implied.
    pub n_flows: usize,
    /// One entry per flow, or a single entry used by every flow.
    pub ccas: Vec<CcaKind>,
    pub buffer: usize,
    pub per: f64,
    pub duration: f64,
    /// Sequential runs only; `None` means `duration / (2 n)`.
    pub stagger: Option<f64>,
    /// Per-flow access delays; empty means the scenario default.
    pub access_delays: Vec<f64>,
    pub access_delay: f64,
    pub bottleneck_delay: f64,
    pub bandwidth_bps: u64,
    pub payload_bytes: u32,
    pub seed: u64,
    pub controllers: ControllerConfig,
    /// Seconds trimmed from the start of each flow before averaging.
    pub warmup: f64,
    pub throughput: ThroughputMode,
    pub trace: TraceMode,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::SingleFlow,
            n_flows: DEFAULT_MULTI_FLOWS,
            ccas: vec![CcaKind::AgileSd],
            buffer: 100,
            per: 0.0,
            duration: 100.0,
            stagger: None,
            access_delays: Vec::new(),
            access_delay: 0.001,
            bottleneck_delay: 0.004,
            bandwidth_bps: DEFAULT_BANDWIDTH_BPS,
            payload_bytes: DEFAULT_PAYLOAD_BYTES,
            seed: 1,
            controllers: ControllerConfig::default(),
            warmup: 0.0,
            throughput: ThroughputMode::Goodput,
            trace: TraceMode::Off,
        }
    }
}

impl ScenarioSpec {
    pub fn flow_count(&self) -> usize {
        match self.kind {
            ScenarioKind::SingleFlow => 1,
            ScenarioKind::InterFairness => self.ccas.len(),
            _ => self.n_flows,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.ccas.is_empty() {
            return Err(ConfigError::invalid("cca", "", "at least one algorithm is required"));
        }
        let n = self.flow_count();
        if n == 0 {
            return Err(ConfigError::invalid("flows", n, "must be >= 1"));
        }
        if self.ccas.len() != 1 && self.ccas.len() != n {
            return Err(ConfigError::invalid(
                "cca",
                self.ccas.len(),
                "give one algorithm for all flows or one per flow",
            ));
        }
        if self.kind == ScenarioKind::InterFairness && self.ccas.len() < 2 {
            return Err(ConfigError::invalid("cca", self.ccas.len(), "inter-fairness needs at least two algorithms"));
        }
        if self.buffer == 0 {
            return Err(ConfigError::invalid("buffer", 0, "must be >= 1 packet"));
        }
        if !(0.0..=1.0).contains(&self.per) {
            return Err(ConfigError::invalid("per", self.per, "must lie in [0, 1]"));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(ConfigError::invalid("duration", self.duration, "must be positive"));
        }
        if !(self.warmup >= 0.0 && self.warmup < self.duration) {
            return Err(ConfigError::invalid("warmup", self.warmup, "must lie in [0, duration)"));
        }
        if self.bandwidth_bps == 0 {
            return Err(ConfigError::invalid("bandwidth", 0, "must be positive"));
        }
        if self.payload_bytes == 0 {
            return Err(ConfigError::invalid("packet_size", 0, "must be positive"));
        }
        for (key, d) in [("access_delay", self.access_delay), ("bottleneck_delay", self.bottleneck_delay)] {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(ConfigError::invalid(key, d, "must be a non-negative time"));
            }
        }
        if !self.access_delays.is_empty() && self.access_delays.len() != n {
            return Err(ConfigError::invalid("access_delays", self.access_delays.len(), "need one delay per flow"));
        }
        if let Some(&d) = self.access_delays.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
            return Err(ConfigError::invalid("access_delays", d, "must be non-negative times"));
        }
        if let Some(s) = self.stagger {
            if !(s >= 0.0) || 2.0 * s * (n as f64 - 1.0) >= self.duration {
                return Err(ConfigError::invalid("stagger", s, "nested lifetimes must fit inside the run"));
            }
        }
        self.controllers.agile.validate()?;
        self.controllers.cubic.validate()?;
        if self.controllers.initial_cwnd == 0 {
            return Err(ConfigError::invalid("initial_cwnd", 0, "must be >= 1"));
        }
        Ok(())
    }

    pub fn cca_per_flow(&self) -> Vec<CcaKind> {
        let n = self.flow_count();
        if self.ccas.len() == n {
            self.ccas.clone()
        } else {
            vec![self.ccas[0]; n]
        }
    }

    /// Access delay of each flow in seconds.
    pub fn resolved_access_delays(&self) -> Vec<f64> {
        let n = self.flow_count();
        if !self.access_delays.is_empty() {
            return self.access_delays.clone();
        }
        match self.kind {
            ScenarioKind::RttFairness => (0..n)
                .map(|i| {
                    // keep doubling past the listed defaults
                    let ms = RTT_FAIRNESS_DELAYS_MS
                        .get(i)
                        .copied()
                        .unwrap_or_else(|| RTT_FAIRNESS_DELAYS_MS[4] * 2f64.powi(i as i32 - 4));
                    ms / 1000.0
                })
                .collect(),
            _ => vec![self.access_delay; n],
        }
    }

    pub fn effective_stagger(&self) -> f64 {
        self.stagger.unwrap_or(self.duration / (2.0 * self.flow_count() as f64))
    }

    /// `(start, stop)` of each flow in seconds.
    pub fn flow_windows(&self) -> Vec<(f64, f64)> {
        let n = self.flow_count();
        match self.kind {
            ScenarioKind::SequentialMulti => {
                let s = self.effective_stagger();
                (0..n).map(|i| (i as f64 * s, self.duration - i as f64 * s)).collect()
            }
            _ => vec![(0.0, self.duration); n],
        }
    }

    pub fn topology(&self) -> Result<DumbbellTopology, Error> {
        let delays: Vec<SimTime> = self.resolved_access_delays().into_iter().map(SimTime::from_secs_f64).collect();
        let topo = build_dumbbell(self.flow_count(), self.buffer, self.per, &delays)?
            .with_bandwidth(self.bandwidth_bps)?
            .with_bottleneck_delay(SimTime::from_secs_f64(self.bottleneck_delay))
            .with_payload(self.payload_bytes);
        Ok(topo)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowMetrics {
    pub flow_id: usize,
    pub cca: CcaKind,
    pub throughput_bps: f64,
    pub loss_ratio: f64,
    /// Seconds over which throughput was averaged.
    pub active_time: f64,
    pub sent: u64,
    pub dropped: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scenario: ScenarioKind,
    pub buffer: usize,
    pub per: f64,
    pub seed: u64,
    pub bandwidth_bps: u64,
    pub flows: Vec<FlowMetrics>,
    pub aggregate_throughput_bps: f64,
    /// Aggregate throughput over bottleneck bandwidth.
    pub utilization: f64,
    pub loss_ratio: f64,
    /// Jain's index over all flows of the run.
    pub jfi: f64,
}

impl MetricsReport {
    pub fn ccas(&self) -> Vec<CcaKind> {
        self.flows.iter().map(|f| f.cca).collect()
    }
}

/// The metrics and the raw simulator output of one run.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub report: MetricsReport,
    pub result: RunResult,
}

pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioRun, Error> {
    spec.validate()?;
    let topology = spec.topology()?;
    let windows = spec.flow_windows();
    let ccas = spec.cca_per_flow();
    let schedule = windows
        .iter()
        .zip(&ccas)
        .map(|(&(start, stop), &cca)| FlowSpec {
            start: SimTime::from_secs_f64(start),
            stop: SimTime::from_secs_f64(stop),
            controller: spec.controllers.build(cca),
        })
        .collect();
    let opts = RunOptions { trace: spec.trace, warmup: SimTime::from_secs_f64(spec.warmup), record_bottleneck: false };
    let result = netsim::run(&topology, schedule, SimTime::from_secs_f64(spec.duration), spec.seed, &opts)?;
    let report = summarize(spec, &ccas, &windows, &result)?;
    Ok(ScenarioRun { report, result })
}

fn summarize(
    spec: &ScenarioSpec,
    ccas: &[CcaKind],
    windows: &[(f64, f64)],
    result: &RunResult,
) -> Result<MetricsReport, Error> {
    let mut flows = Vec::with_capacity(result.flows.len());
    let mut total_bytes = 0u64;
    for ((stats, &cca), &(start, stop)) in result.flows.iter().zip(ccas).zip(windows) {
        let counted = match spec.throughput {
            ThroughputMode::Goodput => stats.goodput_bytes.saturating_sub(stats.goodput_bytes_at_warmup),
            ThroughputMode::Raw => stats.raw_bytes.saturating_sub(stats.raw_bytes_at_warmup),
        };
        let active = stop.min(spec.duration) - start - spec.warmup;
        total_bytes += counted;
        flows.push(FlowMetrics {
            flow_id: stats.flow,
            cca,
            throughput_bps: average_throughput(counted, active)?,
            loss_ratio: if stats.sent == 0 { 0.0 } else { loss_ratio(stats.dropped(), stats.sent)? },
            active_time: active,
            sent: stats.sent,
            dropped: stats.dropped(),
        });
    }
    let span_start = windows.iter().map(|w| w.0).fold(f64::INFINITY, f64::min);
    let span_stop = windows.iter().map(|w| w.1.min(spec.duration)).fold(0.0, f64::max);
    let aggregate = average_throughput(total_bytes, span_stop - span_start - spec.warmup)?;
    let sent: u64 = result.flows.iter().map(|f| f.sent).sum();
    let dropped: u64 = result.flows.iter().map(|f| f.dropped()).sum();
    let throughputs: Vec<f64> = flows.iter().map(|f| f.throughput_bps).collect();
    Ok(MetricsReport {
        scenario: spec.kind,
        buffer: spec.buffer,
        per: spec.per,
        seed: spec.seed,
        bandwidth_bps: spec.bandwidth_bps,
        flows,
        aggregate_throughput_bps: aggregate,
        utilization: aggregate / spec.bandwidth_bps as f64,
        loss_ratio: if sent == 0 { 0.0 } else { loss_ratio(dropped, sent)? },
        jfi: jain_fairness(&throughputs)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_lifetimes_nest() {
        let spec = ScenarioSpec { kind: ScenarioKind::SequentialMulti, ..ScenarioSpec::default() };
        let w = spec.flow_windows();
        assert_eq!(w.len(), 5);
        assert_eq!(w[0], (0.0, 100.0));
        assert_eq!(w[4], (40.0, 60.0));
        for pair in w.windows(2) {
            assert!(pair[0].0 <= pair[1].0 && pair[1].1 <= pair[0].1);
        }
    }

    #[test]
    fn synchronous_flows_share_the_run() {
        let spec = ScenarioSpec { kind: ScenarioKind::SynchronousMulti, n_flows: 3, ..ScenarioSpec::default() };
        assert_eq!(spec.flow_windows(), vec![(0.0, 100.0); 3]);
    }

    #[test]
    fn single_flow_ignores_flow_count() {
        let spec = ScenarioSpec { n_flows: 9, ..ScenarioSpec::default() };
        assert_eq!(spec.flow_count(), 1);
        assert_eq!(spec.flow_windows().len(), 1);
    }

    #[test]
    fn rtt_fairness_defaults() {
        let spec = ScenarioSpec { kind: ScenarioKind::RttFairness, ..ScenarioSpec::default() };
        assert_eq!(spec.resolved_access_delays(), vec![0.001, 0.002, 0.004, 0.008, 0.016]);
        let topo = spec.topology().unwrap();
        assert_eq!(topo.base_rtt(4), SimTime::from_millis(2 * (16 + 4 + 16)));
    }

    #[test]
    fn inter_fairness_uses_one_flow_per_algorithm() {
        let spec = ScenarioSpec {
            kind: ScenarioKind::InterFairness,
            ccas: vec![CcaKind::AgileSd, CcaKind::Cubic],
            ..ScenarioSpec::default()
        };
        assert_eq!(spec.flow_count(), 2);
        assert_eq!(spec.cca_per_flow(), vec![CcaKind::AgileSd, CcaKind::Cubic]);
        let lonely = ScenarioSpec { ccas: vec![CcaKind::Cubic], ..spec };
        assert!(lonely.validate().is_err());
    }

    #[test]
    fn rejects_invalid_specs() {
        let base = ScenarioSpec::default();
        assert!(ScenarioSpec { buffer: 0, ..base.clone() }.validate().is_err());
        assert!(ScenarioSpec { per: 1.5, ..base.clone() }.validate().is_err());
        assert!(ScenarioSpec { duration: 0.0, ..base.clone() }.validate().is_err());
        assert!(ScenarioSpec { ccas: vec![], ..base.clone() }.validate().is_err());
        let seq = ScenarioSpec { kind: ScenarioKind::SequentialMulti, stagger: Some(20.0), ..base };
        assert!(seq.validate().is_err());
    }

    #[test]
    fn short_single_flow_run() {
        let spec = ScenarioSpec {
            buffer: 50,
            duration: 2.0,
            bandwidth_bps: 100_000_000,
            ..ScenarioSpec::default()
        };
        let run = run_scenario(&spec).unwrap();
        let r = &run.report;
        assert_eq!(r.flows.len(), 1);
        assert_eq!(r.jfi, 1.0);
        assert!(r.utilization > 0.2 && r.utilization <= 1.0, "utilization {}", r.utilization);
        assert!(run.result.flows[0].conserved());
    }
}
