use std::io::{self, Write};

use super::scenario::{MetricsReport, ScenarioKind};

pub const METRICS_HEADER: &str = "cca,scenario,buffer,per,seed,flow_id,throughput_bps,loss_ratio,jfi_intra,jfi_rtt";

/// One row per flow. `jfi_intra` is the index over all flows of the run
/// (the cross-algorithm index for inter-fairness runs); `jfi_rtt` is only
/// filled for RTT-fairness runs.
pub fn write_metrics_csv<W: Write>(mut out: W, reports: &[MetricsReport]) -> io::Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for report in reports {
        let rtt = if report.scenario == ScenarioKind::RttFairness { report.jfi.to_string() } else { String::new() };
        for flow in &report.flows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                flow.cca,
                report.scenario,
                report.buffer,
                report.per,
                report.seed,
                flow.flow_id,
                flow.throughput_bps,
                flow.loss_ratio,
                report.jfi,
                rtt
            )?;
        }
    }
    Ok(())
}

/// Human-readable one-liner for a run.
pub fn summary_line(report: &MetricsReport) -> String {
    let ccas: Vec<&str> = {
        let mut names: Vec<&str> = report.flows.iter().map(|f| f.cca.as_str()).collect();
        names.dedup();
        names
    };
    format!(
        "{} cca={} buffer={} per={} seed={} flows={} throughput={:.3}Mbps utilization={:.4} loss_ratio={:.6} jfi={:.4}",
        report.scenario,
        ccas.join("+"),
        report.buffer,
        report.per,
        report.seed,
        report.flows.len(),
        report.aggregate_throughput_bps / 1e6,
        report.utilization,
        report.loss_ratio,
        report.jfi
    )
}
