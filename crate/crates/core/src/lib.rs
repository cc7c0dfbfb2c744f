//! Packet-level simulation of TCP congestion control on a dumbbell.
//!
//! * [`cca`]: Agile-SD, NewReno and Cubic behind one controller trait.
//! * [`netsim`]: deterministic discrete-event simulator driving them.
//! * [`experiments`]: scenarios, metrics, sweeps and CSV output.
//! * [`config`]: the line-oriented `key=value` run configuration.

pub mod cca;
pub mod config;
pub mod error;
pub mod experiments;
pub mod netsim;

pub use error::{ConfigError, Error, MetricsError, NetsimError, Result};
