//! Congestion-control algorithms.
//!
//! Every controller is a single-flow state machine driven by three
//! signals coming from the sender: a new cumulative ACK, the third
//! duplicate ACK of a loss episode, and a retransmission timeout. The
//! window is kept in fractional segments.

mod agile;
mod cubic;
mod newreno;
mod replay;

use std::fmt;
use std::str::FromStr;

pub use agile::{agility_factor, epoch_time, gap_current, gap_total, AgileParams, AgileSd, LossThreshold};
pub use cubic::{Cubic, CubicParams};
pub use newreno::NewReno;
pub use replay::{replay, write_trace_csv, TracePoint};

use crate::error::ConfigError;

/// Congestion window used by every controller at start-up and after a timeout.
pub const DEFAULT_INITIAL_CWND: u32 = 2;

/// Smallest window a loss reaction may leave behind.
pub const MIN_CWND_AFTER_LOSS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    SlowStart,
    CongestionAvoidance,
    FastRecovery,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::SlowStart => "slow-start",
            Phase::CongestionAvoidance => "congestion-avoidance",
            Phase::FastRecovery => "fast-recovery",
        }
    }

    /// Phase a controller settles in once it is outside fast recovery.
    pub(crate) fn for_window(cwnd: f64, ssthresh: f64) -> Phase {
        if cwnd < ssthresh {
            Phase::SlowStart
        } else {
            Phase::CongestionAvoidance
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-flow congestion variables.
///
/// `cwnd_loss` and `cwnd_degraded` stay `None` until the first loss
/// reaction records them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    pub cwnd: f64,
    pub ssthresh: f64,
    pub cwnd_loss: Option<f64>,
    pub cwnd_degraded: Option<f64>,
    pub phase: Phase,
}

impl ControllerState {
    pub fn initial(initial_cwnd: u32) -> Self {
        Self {
            cwnd: f64::from(initial_cwnd),
            ssthresh: f64::INFINITY,
            cwnd_loss: None,
            cwnd_degraded: None,
            phase: Phase::SlowStart,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    AckReceived { acked_segments: u64 },
    TripleDupAck,
    Timeout,
    /// The cumulative ACK covering the loss episode arrived.
    RecoveryExit,
}

/// A signal delivered to a controller at simulation time `now` (seconds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerEvent {
    pub kind: EventKind,
    pub now: f64,
}

impl ControllerEvent {
    pub fn ack(now: f64) -> Self {
        Self { kind: EventKind::AckReceived { acked_segments: 1 }, now }
    }

    pub fn triple_dup(now: f64) -> Self {
        Self { kind: EventKind::TripleDupAck, now }
    }

    pub fn timeout(now: f64) -> Self {
        Self { kind: EventKind::Timeout, now }
    }

    pub fn recovery_exit(now: f64) -> Self {
        Self { kind: EventKind::RecoveryExit, now }
    }
}

/// Contract shared by all congestion-control algorithms.
///
/// Implementations must be deterministic: the same sequence of calls
/// always yields the same sequence of states.
pub trait CongestionControl: fmt::Debug + Send {
    fn name(&self) -> &'static str;

    /// One new cumulative ACK. The window grows once per ACK regardless of
    /// how many segments it covers.
    fn on_ack(&mut self, acked_segments: u64, now: f64);

    fn on_triple_dup_ack(&mut self, now: f64);

    fn on_timeout(&mut self, now: f64);

    /// Leave fast recovery after the loss episode has been repaired.
    fn on_recovery_exit(&mut self, now: f64);

    fn state(&self) -> ControllerState;

    /// Agility factor applied by the most recent window increase, for
    /// controllers that have one.
    fn agility(&self) -> Option<f64> {
        None
    }

    fn cwnd(&self) -> f64 {
        self.state().cwnd
    }

    fn ssthresh(&self) -> f64 {
        self.state().ssthresh
    }

    fn phase(&self) -> Phase {
        self.state().phase
    }

    fn apply(&mut self, event: &ControllerEvent) {
        match event.kind {
            EventKind::AckReceived { acked_segments } => self.on_ack(acked_segments, event.now),
            EventKind::TripleDupAck => self.on_triple_dup_ack(event.now),
            EventKind::Timeout => self.on_timeout(event.now),
            EventKind::RecoveryExit => self.on_recovery_exit(event.now),
        }
    }
}

/// ssthresh installed by a retransmission timeout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeoutThreshold {
    /// `max(cwnd / 2, 2)`.
    #[default]
    HalfWindow,
    /// Keep whatever ssthresh was in force.
    Unchanged,
}

impl TimeoutThreshold {
    pub(crate) fn apply(self, cwnd_before: f64, current: f64) -> f64 {
        match self {
            TimeoutThreshold::HalfWindow => (cwnd_before / 2.0).max(MIN_CWND_AFTER_LOSS),
            TimeoutThreshold::Unchanged => current,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TimeoutThreshold::HalfWindow => "half",
            TimeoutThreshold::Unchanged => "unchanged",
        }
    }
}

impl FromStr for TimeoutThreshold {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "half" => Ok(TimeoutThreshold::HalfWindow),
            "unchanged" => Ok(TimeoutThreshold::Unchanged),
            other => Err(ConfigError::invalid("timeout_ssthresh", other, "expected half or unchanged")),
        }
    }
}

/// The algorithms this crate ships.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CcaKind {
    AgileSd,
    NewReno,
    Cubic,
}

impl CcaKind {
    pub const ALL: [CcaKind; 3] = [CcaKind::AgileSd, CcaKind::Cubic, CcaKind::NewReno];

    pub fn as_str(self) -> &'static str {
        match self {
            CcaKind::AgileSd => "agile-sd",
            CcaKind::NewReno => "newreno",
            CcaKind::Cubic => "cubic",
        }
    }
}

impl fmt::Display for CcaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CcaKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "agile-sd" | "agilesd" | "agile" => Ok(CcaKind::AgileSd),
            "newreno" | "new-reno" | "reno" => Ok(CcaKind::NewReno),
            "cubic" => Ok(CcaKind::Cubic),
            other => Err(ConfigError::invalid("cca", other, "expected agile-sd, newreno or cubic")),
        }
    }
}

/// Tunables for every algorithm; [`ControllerConfig::build`] picks the
/// relevant subset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub agile: AgileParams,
    pub cubic: CubicParams,
    pub initial_cwnd: u32,
    pub timeout_ssthresh: TimeoutThreshold,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            agile: AgileParams::default(),
            cubic: CubicParams::default(),
            initial_cwnd: DEFAULT_INITIAL_CWND,
            timeout_ssthresh: TimeoutThreshold::HalfWindow,
        }
    }
}

impl ControllerConfig {
    pub fn build(&self, kind: CcaKind) -> Box<dyn CongestionControl> {
        match kind {
            CcaKind::AgileSd => {
                let params = AgileParams { initial_cwnd: self.initial_cwnd, ..self.agile };
                Box::new(AgileSd::new(params).with_timeout_threshold(self.timeout_ssthresh))
            }
            CcaKind::NewReno => Box::new(
                NewReno::new(self.initial_cwnd).with_timeout_threshold(self.timeout_ssthresh),
            ),
            CcaKind::Cubic => Box::new(
                Cubic::new(self.cubic, self.initial_cwnd).with_timeout_threshold(self.timeout_ssthresh),
            ),
        }
    }
}
