//! Run configuration: whitespace- or line-separated `key=value` pairs, `#`
//! starts a comment. Unset keys keep the reference defaults (1 Gbps links,
//! 1 ms / 4 ms delays, 1000-byte packets, drop-tail, 100 s).
//!
//! Times are seconds unless suffixed with `ms`, `us` or `s`; bandwidth is
//! bits per second unless suffixed with `Kbps`, `Mbps` or `Gbps`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::cca::{CcaKind, TimeoutThreshold};
use crate::experiments::{ScenarioSpec, ThroughputMode};
use crate::netsim::{SimTime, TraceMode};
use crate::{ConfigError, Error};

pub const SCALED_BANDWIDTH_BPS: u64 = 100_000_000;
pub const SCALED_DURATION: f64 = 10.0;
pub const DEFAULT_OUTPUT_DIR: &str = "results";
pub const DEFAULT_BUFFERS: [usize; 5] = [5, 25, 100, 250, 500];
pub const DEFAULT_PERS: [f64; 3] = [0.0, 1e-5, 1e-4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceLevel {
    #[default]
    Off,
    Sampled,
    Full,
}

impl TraceLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceLevel::Off => "off",
            TraceLevel::Sampled => "sampled",
            TraceLevel::Full => "full",
        }
    }
}

impl FromStr for TraceLevel {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(TraceLevel::Off),
            "sampled" => Ok(TraceLevel::Sampled),
            "full" => Ok(TraceLevel::Full),
            other => Err(ConfigError::invalid("trace", other, "expected off, sampled or full")),
        }
    }
}

/// Parsed configuration. `spec` holds the scenario exactly as written;
/// [`RunConfig::scenario`] applies scaling and tracing on top.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: ScenarioSpec,
    pub output_dir: PathBuf,
    pub trace: TraceLevel,
    /// Seconds between sampled cwnd records.
    pub trace_interval: f64,
    /// 100 Mbps / 10 s instead of the reference scale; delays are kept.
    pub scaled: bool,
    /// Sweep dimensions. For inter-fairness sweeps `ccas` is the pairing
    /// run at every point rather than a dimension.
    pub buffers: Vec<usize>,
    pub pers: Vec<f64>,
    pub ccas: Vec<CcaKind>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            spec: ScenarioSpec::default(),
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
            trace: TraceLevel::Off,
            trace_interval: 0.01,
            scaled: false,
            buffers: DEFAULT_BUFFERS.to_vec(),
            pers: DEFAULT_PERS.to_vec(),
            ccas: CcaKind::ALL.to_vec(),
        }
    }
}

const KEYS: &[&str] = &[
    "scenario",
    "flows",
    "cca",
    "buffer",
    "per",
    "duration",
    "stagger",
    "access_delays",
    "access_delay",
    "bottleneck_delay",
    "bandwidth",
    "packet_size",
    "seed",
    "lambda_min",
    "lambda_max",
    "beta1",
    "beta2",
    "initial_cwnd",
    "timeout_ssthresh",
    "cubic_c",
    "cubic_beta",
    "warmup",
    "throughput",
    "trace",
    "trace_interval",
    "scaled",
    "output_dir",
    "buffers",
    "pers",
    "ccas",
];

impl RunConfig {
    /// Every key [`RunConfig::set`] understands, in emission order.
    pub fn keys() -> &'static [&'static str] {
        KEYS
    }

    /// Parses and validates `text` on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::parse(&text)?)
    }

    /// Applies every pair in `text` without validating the result.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or_default();
            for pair in line.split_whitespace() {
                self.apply_pair(pair)?;
            }
        }
        Ok(())
    }

    /// Applies one `key=value` pair.
    pub fn apply_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| ConfigError::Malformed(format!("expected key=value, got `{pair}`")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let spec = &mut self.spec;
        match key {
            "scenario" => spec.kind = value.parse()?,
            "flows" => spec.n_flows = parse_num(key, value)?,
            "cca" => spec.ccas = parse_list(key, value, |v| v.parse::<CcaKind>().map_err(|_| bad(key, v, "unknown algorithm")))?,
            "buffer" => spec.buffer = parse_num(key, value)?,
            "per" => spec.per = parse_num(key, value)?,
            "duration" => spec.duration = parse_time(key, value)?,
            "stagger" => {
                spec.stagger = if value == "auto" { None } else { Some(parse_time(key, value)?) };
            }
            "access_delays" => spec.access_delays = parse_list(key, value, |v| parse_time(key, v))?,
            "access_delay" => spec.access_delay = parse_time(key, value)?,
            "bottleneck_delay" => spec.bottleneck_delay = parse_time(key, value)?,
            "bandwidth" => spec.bandwidth_bps = parse_bandwidth(key, value)?,
            "packet_size" => spec.payload_bytes = parse_num(key, value)?,
            "seed" => spec.seed = parse_num(key, value)?,
            "lambda_min" => spec.controllers.agile.lambda_min = parse_num(key, value)?,
            "lambda_max" => spec.controllers.agile.lambda_max = parse_num(key, value)?,
            "beta1" => spec.controllers.agile.beta1 = parse_num(key, value)?,
            "beta2" => spec.controllers.agile.beta2 = parse_num(key, value)?,
            "initial_cwnd" => {
                let n = parse_num(key, value)?;
                spec.controllers.initial_cwnd = n;
                spec.controllers.agile.initial_cwnd = n;
            }
            "timeout_ssthresh" => spec.controllers.timeout_ssthresh = value.parse::<TimeoutThreshold>()?,
            "cubic_c" => spec.controllers.cubic.c = parse_num(key, value)?,
            "cubic_beta" => spec.controllers.cubic.beta = parse_num(key, value)?,
            "warmup" => spec.warmup = parse_time(key, value)?,
            "throughput" => spec.throughput = value.parse::<ThroughputMode>()?,
            "trace" => self.trace = value.parse()?,
            "trace_interval" => self.trace_interval = parse_time(key, value)?,
            "scaled" => self.scaled = parse_num(key, value)?,
            "output_dir" => {
                if value.is_empty() {
                    return Err(bad(key, value, "must not be empty"));
                }
                self.output_dir = PathBuf::from(value);
            }
            "buffers" => self.buffers = parse_list(key, value, |v| parse_num(key, v))?,
            "pers" => self.pers = parse_list(key, value, |v| parse_num(key, v))?,
            "ccas" => self.ccas = parse_list(key, value, |v| v.parse::<CcaKind>().map_err(|_| bad(key, v, "unknown algorithm")))?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// The scenario actually run: scaling and trace settings applied.
    pub fn scenario(&self) -> ScenarioSpec {
        let mut spec = self.spec.clone();
        if self.scaled {
            spec.bandwidth_bps = SCALED_BANDWIDTH_BPS;
            spec.duration = SCALED_DURATION;
        }
        spec.trace = match self.trace {
            TraceLevel::Off => TraceMode::Off,
            TraceLevel::Sampled => TraceMode::Sampled(SimTime::from_secs_f64(self.trace_interval)),
            TraceLevel::Full => TraceMode::Full,
        };
        spec
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scenario().validate()?;
        if !(self.trace_interval > 0.0 && self.trace_interval.is_finite()) {
            return Err(bad("trace_interval", self.trace_interval, "must be a positive time"));
        }
        if self.buffers.is_empty() {
            return Err(bad("buffers", "", "at least one buffer size is required"));
        }
        if self.buffers.contains(&0) {
            return Err(bad("buffers", 0, "must be >= 1 packet"));
        }
        if self.pers.is_empty() {
            return Err(bad("pers", "", "at least one error rate is required"));
        }
        if let Some(&p) = self.pers.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(bad("pers", p, "must lie in [0, 1]"));
        }
        if self.ccas.is_empty() {
            return Err(bad("ccas", "", "at least one algorithm is required"));
        }
        Ok(())
    }

    /// Canonical text form, one key per line; parsing it yields `self`.
    pub fn emit(&self) -> String {
        let s = &self.spec;
        let c = &s.controllers;
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        put("scenario", s.kind.as_str().to_string());
        put("flows", s.n_flows.to_string());
        put("cca", join(s.ccas.iter().map(|c| c.as_str())));
        put("buffer", s.buffer.to_string());
        put("per", s.per.to_string());
        put("duration", s.duration.to_string());
        put("stagger", s.stagger.map_or_else(|| "auto".to_string(), |x| x.to_string()));
        put("access_delays", join(s.access_delays.iter()));
        put("access_delay", s.access_delay.to_string());
        put("bottleneck_delay", s.bottleneck_delay.to_string());
        put("bandwidth", s.bandwidth_bps.to_string());
        put("packet_size", s.payload_bytes.to_string());
        put("seed", s.seed.to_string());
        put("lambda_min", c.agile.lambda_min.to_string());
        put("lambda_max", c.agile.lambda_max.to_string());
        put("beta1", c.agile.beta1.to_string());
        put("beta2", c.agile.beta2.to_string());
        put("initial_cwnd", c.initial_cwnd.to_string());
        put("timeout_ssthresh", c.timeout_ssthresh.as_str().to_string());
        put("cubic_c", c.cubic.c.to_string());
        put("cubic_beta", c.cubic.beta.to_string());
        put("warmup", s.warmup.to_string());
        put("throughput", s.throughput.as_str().to_string());
        put("trace", self.trace.as_str().to_string());
        put("trace_interval", self.trace_interval.to_string());
        put("scaled", self.scaled.to_string());
        put("output_dir", self.output_dir.display().to_string());
        put("buffers", join(self.buffers.iter()));
        put("pers", join(self.pers.iter()));
        put("ccas", join(self.ccas.iter().map(|c| c.as_str())));
        out
    }
}

fn bad(key: &str, value: impl std::fmt::Display, reason: &str) -> ConfigError {
    ConfigError::invalid(key, value, reason)
}

fn join<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| bad(key, value, "not a valid value"))
}

fn parse_list<T>(
    key: &str,
    value: &str,
    item: impl Fn(&str) -> Result<T, ConfigError>,
) -> Result<Vec<T>, ConfigError> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| item(v.trim())).collect::<Result<_, _>>().map_err(|e| match e {
        ConfigError::Invalid { value: v, reason, .. } => ConfigError::Invalid { key: key.to_string(), value: v, reason },
        other => other,
    })
}

fn parse_time(key: &str, value: &str) -> Result<f64, ConfigError> {
    let (num, scale) = if let Some(n) = value.strip_suffix("ms") {
        (n, 1e-3)
    } else if let Some(n) = value.strip_suffix("us") {
        (n, 1e-6)
    } else if let Some(n) = value.strip_suffix('s') {
        (n, 1.0)
    } else {
        (value, 1.0)
    };
    let x: f64 = num.trim().parse().map_err(|_| bad(key, value, "not a valid time"))?;
    if !(x.is_finite() && x >= 0.0) {
        return Err(bad(key, value, "must be a non-negative time"));
    }
    Ok(if scale == 1.0 { x } else { x * scale })
}

fn parse_bandwidth(key: &str, value: &str) -> Result<u64, ConfigError> {
    let lower = value.to_ascii_lowercase();
    let (num, scale) = [("gbps", 1e9), ("mbps", 1e6), ("kbps", 1e3), ("bps", 1.0)]
        .into_iter()
        .find_map(|(suffix, scale)| lower.strip_suffix(suffix).map(|n| (n.to_string(), scale)))
        .unwrap_or((lower.clone(), 1.0));
    if let Ok(n) = num.trim().parse::<u64>() {
        if scale == 1.0 {
            return if n == 0 { Err(bad(key, value, "must be a positive bandwidth")) } else { Ok(n) };
        }
    }
    let x: f64 = num.trim().parse().map_err(|_| bad(key, value, "not a valid bandwidth"))?;
    let bps = (x * scale).round();
    if !(bps >= 1.0 && bps < u64::MAX as f64) {
        return Err(bad(key, value, "must be a positive bandwidth"));
    }
    Ok(bps as u64)
}
