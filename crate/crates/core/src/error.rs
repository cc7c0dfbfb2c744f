use std::fmt::Display;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    Invalid { key: String, value: String, reason: String },
    #[error("malformed entry `{0}`, expected key=value")]
    Malformed(String),
}

impl ConfigError {
    pub fn invalid(key: &str, value: impl Display, reason: &str) -> Self {
        ConfigError::Invalid { key: key.to_string(), value: value.to_string(), reason: reason.to_string() }
    }

    /// Name of the offending key, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::UnknownKey(k) => Some(k),
            ConfigError::Invalid { key, .. } => Some(key),
            ConfigError::Malformed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetsimError {
    #[error("a dumbbell needs at least one flow")]
    NoFlows,
    #[error("bottleneck buffer must hold at least one packet")]
    ZeroBuffer,
    #[error("packet error rate {0} is outside [0, 1]")]
    InvalidPer(f64),
    #[error("{flows} flows but {delays} access delays")]
    DelayCountMismatch { flows: usize, delays: usize },
    #[error("link bandwidth must be positive")]
    ZeroBandwidth,
    #[error("flow {flow}: {reason}")]
    InvalidSchedule { flow: usize, reason: String },
    #[error("flow {flow}: ACK {ack} beyond highest sent sequence {high}")]
    AckBeyondSent { flow: usize, ack: u64, high: u64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("fairness index of an empty set is undefined")]
    EmptySample,
    #[error("fairness index is undefined when every throughput is zero")]
    AllZero,
    #[error("throughput sample {0} is negative or not finite")]
    InvalidSample(f64),
    #[error("active time must be positive")]
    ZeroActiveTime,
    #[error("loss ratio needs at least one sent packet")]
    NothingSent,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Netsim(#[from] NetsimError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
