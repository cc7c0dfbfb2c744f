//! Bulk-transfer sender and cumulative-ACK receiver.
//!
//! The sender follows NewReno loss recovery: fast retransmit on the third
//! duplicate ACK, window inflation by one segment per further duplicate,
//! a retransmission per partial ACK (only the first of which restarts the
//! retransmission timer), and recovery exit once the
//! cumulative ACK covers everything outstanding at loss time. How far the
//! window shrinks is left to the congestion controller.

use std::collections::BTreeSet;

use super::{RtoEstimator, SimTime};
use crate::cca::CongestionControl;
use crate::NetsimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub seq: u64,
    pub retransmit: bool,
}

/// Controller-visible happenings, reported for tracing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Ack,
    TripleDupAck,
    RecoveryExit,
    Timeout,
}

/// What the simulator must do after the sender handled an input.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Actions {
    pub sends: Vec<Segment>,
    pub signals: Vec<Signal>,
    /// Schedule an RTO expiry event: (time, generation).
    pub timer: Option<(SimTime, u64)>,
}

impl Actions {
    pub fn clear(&mut self) {
        self.sends.clear();
        self.signals.clear();
        self.timer = None;
    }
}

#[derive(Debug, Clone, Copy)]
struct Recovery {
    /// Recovery ends once the cumulative ACK reaches this sequence.
    exit_at: u64,
    inflation: f64,
    /// Only the first partial ACK restarts the retransmission timer, so a
    /// window with many holes falls back to a timeout instead of
    /// repairing one hole per round trip.
    partial_seen: bool,
}

#[derive(Debug, Default, Clone, Copy)]
struct Timer {
    deadline: Option<SimTime>,
    scheduled: Option<SimTime>,
    generation: u64,
}

#[derive(Debug)]
pub struct Sender {
    cc: Box<dyn CongestionControl>,
    flow: usize,
    snd_una: u64,
    snd_nxt: u64,
    high_tx: u64,
    dup_acks: u32,
    recovery: Option<Recovery>,
    /// After a timeout, fast retransmit stays disabled until everything
    /// sent before it is acknowledged.
    recover_guard: Option<u64>,
    rto: RtoEstimator,
    timer: Timer,
    active: bool,
}

impl Sender {
    pub fn new(flow: usize, cc: Box<dyn CongestionControl>) -> Self {
        Self {
            cc,
            flow,
            snd_una: 0,
            snd_nxt: 0,
            high_tx: 0,
            dup_acks: 0,
            recovery: None,
            recover_guard: None,
            rto: RtoEstimator::default(),
            timer: Timer::default(),
            active: false,
        }
    }

    pub fn controller(&self) -> &dyn CongestionControl {
        self.cc.as_ref()
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    pub fn in_recovery(&self) -> bool {
        self.recovery.is_some()
    }

    pub fn highest_cum_ack(&self) -> u64 {
        self.snd_una
    }

    pub fn next_seq(&self) -> u64 {
        self.snd_nxt
    }

    pub fn dup_ack_count(&self) -> u32 {
        self.dup_acks
    }

    /// Segments sent but not yet cumulatively acknowledged.
    pub fn inflight(&self) -> u64 {
        self.snd_nxt - self.snd_una
    }

    pub fn rto(&self) -> &RtoEstimator {
        &self.rto
    }

    pub fn timer_deadline(&self) -> Option<SimTime> {
        self.timer.deadline
    }

    pub fn start(&mut self, now: SimTime, out: &mut Actions) {
        self.active = true;
        self.fill_window(now, out);
    }

    pub fn stop(&mut self) {
        self.active = false;
        self.timer.deadline = None;
    }

    /// Effective window in whole segments.
    pub fn window(&self) -> u64 {
        let inflation = self.recovery.map_or(0.0, |r| r.inflation);
        (self.cc.cwnd() + inflation).floor().max(1.0) as u64
    }

    pub fn on_ack(&mut self, ack: u64, echo: SimTime, now: SimTime, out: &mut Actions) -> Result<(), NetsimError> {
        if !self.active {
            return Ok(());
        }
        if ack > self.high_tx {
            return Err(NetsimError::AckBeyondSent { flow: self.flow, ack, high: self.high_tx });
        }
        let t = now.as_secs_f64();
        if ack > self.snd_una {
            let acked = ack - self.snd_una;
            self.snd_una = ack;
            if self.snd_nxt < ack {
                self.snd_nxt = ack;
            }
            self.dup_acks = 0;
            self.rto.on_sample(now.saturating_sub(echo));
            let restart = match self.recovery {
                Some(r) if ack >= r.exit_at => {
                    self.recovery = None;
                    self.cc.on_recovery_exit(t);
                    out.signals.push(Signal::RecoveryExit);
                    true
                }
                Some(mut r) => {
                    // partial ACK: the next hole is lost too
                    r.inflation = (r.inflation - acked as f64 + 1.0).max(0.0);
                    let first = !r.partial_seen;
                    r.partial_seen = true;
                    self.recovery = Some(r);
                    self.emit(self.snd_una, out);
                    first
                }
                None => {
                    self.cc.on_ack(acked, t);
                    out.signals.push(Signal::Ack);
                    true
                }
            };
            if self.snd_una < self.high_tx {
                if restart || self.timer.deadline.is_none() {
                    self.arm(now + self.rto.rto(), out);
                }
            } else {
                self.timer.deadline = None;
            }
        } else if ack == self.snd_una && self.snd_una < self.high_tx {
            self.dup_acks += 1;
            if let Some(r) = self.recovery.as_mut() {
                r.inflation += 1.0;
            } else if self.dup_acks == 3 && self.recover_guard.map_or(true, |g| self.snd_una >= g) {
                self.recover_guard = None;
                self.cc.on_triple_dup_ack(t);
                out.signals.push(Signal::TripleDupAck);
                self.recovery = Some(Recovery { exit_at: self.high_tx, inflation: 3.0, partial_seen: false });
                self.emit(self.snd_una, out);
            }
        }
        self.fill_window(now, out);
        Ok(())
    }

    /// Handles an RTO expiry event carrying `generation`.
    pub fn on_timer(&mut self, generation: u64, now: SimTime, out: &mut Actions) {
        if generation != self.timer.generation {
            return;
        }
        self.timer.scheduled = None;
        let Some(deadline) = self.timer.deadline else { return };
        if !self.active {
            return;
        }
        if deadline > now {
            self.schedule(deadline, out);
            return;
        }
        if self.snd_una == self.high_tx {
            self.timer.deadline = None;
            return;
        }
        self.cc.on_timeout(now.as_secs_f64());
        out.signals.push(Signal::Timeout);
        self.rto.back_off();
        self.recovery = None;
        self.dup_acks = 0;
        self.recover_guard = Some(self.high_tx);
        self.snd_nxt = self.snd_una;
        self.timer.deadline = None;
        self.fill_window(now, out);
    }

    fn fill_window(&mut self, now: SimTime, out: &mut Actions) {
        if !self.active {
            return;
        }
        let window = self.window();
        while self.snd_nxt - self.snd_una < window {
            let seq = self.snd_nxt;
            self.snd_nxt += 1;
            self.emit(seq, out);
        }
        if self.timer.deadline.is_none() && self.snd_una < self.high_tx {
            self.arm(now + self.rto.rto(), out);
        }
    }

    fn emit(&mut self, seq: u64, out: &mut Actions) {
        let retransmit = seq < self.high_tx;
        if seq >= self.high_tx {
            self.high_tx = seq + 1;
        }
        out.sends.push(Segment { seq, retransmit });
    }

    fn arm(&mut self, deadline: SimTime, out: &mut Actions) {
        self.timer.deadline = Some(deadline);
        match self.timer.scheduled {
            // the pending event fires early and re-arms itself
            Some(at) if at <= deadline => {}
            _ => self.schedule(deadline, out),
        }
    }

    fn schedule(&mut self, at: SimTime, out: &mut Actions) {
        self.timer.generation += 1;
        self.timer.scheduled = Some(at);
        out.timer = Some((at, self.timer.generation));
    }
}

/// Cumulative-ACK receiver, one ACK per data segment.
#[derive(Debug, Default, Clone)]
pub struct Receiver {
    rcv_nxt: u64,
    out_of_order: BTreeSet<u64>,
    /// Segments that became in-order, i.e. unique segments delivered.
    in_order: u64,
    arrivals: u64,
}

impl Receiver {
    /// Accepts data segment `seq` and returns the ACK value (next expected).
    pub fn on_data(&mut self, seq: u64) -> u64 {
        self.arrivals += 1;
        if seq == self.rcv_nxt {
            self.rcv_nxt += 1;
            self.in_order += 1;
            while self.out_of_order.remove(&self.rcv_nxt) {
                self.rcv_nxt += 1;
                self.in_order += 1;
            }
        } else if seq > self.rcv_nxt {
            self.out_of_order.insert(seq);
        }
        self.rcv_nxt
    }

    pub fn next_expected(&self) -> u64 {
        self.rcv_nxt
    }

    pub fn unique_segments(&self) -> u64 {
        self.in_order
    }

    pub fn arrivals(&self) -> u64 {
        self.arrivals
    }
}
