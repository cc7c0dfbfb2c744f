//! Evaluation scenarios, metrics and parameter sweeps.

mod metrics;
mod report;
mod scenario;
mod sweep;

pub use metrics::{average_throughput, jain_fairness, loss_ratio};
pub use report::{summary_line, write_metrics_csv, METRICS_HEADER};
pub use scenario::{
    run_scenario, FlowMetrics, MetricsReport, ScenarioKind, ScenarioRun, ScenarioSpec, ThroughputMode,
    DEFAULT_MULTI_FLOWS, RTT_FAIRNESS_DELAYS_MS,
};
pub use sweep::{derive_seed, point_spec, run_points, sweep, sweep_points, SweepPoint};
