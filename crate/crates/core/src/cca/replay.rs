use std::io::{self, Write};

use super::{CongestionControl, ControllerEvent, Phase};

/// Controller state right after one event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub time: f64,
    pub cwnd: f64,
    pub ssthresh: f64,
    pub phase: Phase,
    pub lambda: Option<f64>,
}

/// Drive `cc` through `events`, recording the state after each one.
pub fn replay(cc: &mut dyn CongestionControl, events: &[ControllerEvent]) -> Vec<TracePoint> {
    events
        .iter()
        .map(|event| {
            cc.apply(event);
            let st = cc.state();
            TracePoint { time: event.now, cwnd: st.cwnd, ssthresh: st.ssthresh, phase: st.phase, lambda: cc.agility() }
        })
        .collect()
}

pub fn write_trace_csv<W: Write>(mut out: W, points: &[TracePoint]) -> io::Result<()> {
    writeln!(out, "time_s,cwnd,ssthresh,phase,lambda")?;
    for p in points {
        write!(out, "{},{},{},{},", p.time, p.cwnd, p.ssthresh, p.phase)?;
        match p.lambda {
            Some(l) => writeln!(out, "{l}")?,
            None => writeln!(out)?,
        }
    }
    Ok(())
}
