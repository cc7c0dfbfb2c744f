use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::endpoint::{Actions, Receiver, Sender, Signal};
use super::{maybe_corrupt, Corruption, DumbbellTopology, EventQueue, Link, Offer, Packet, QueuedLink, SimTime};
use crate::cca::CongestionControl;
use crate::NetsimError;

/// One bulk (FTP-like) flow: sender `i` to receiver `i` over access link `i`.
#[derive(Debug)]
pub struct FlowSpec {
    pub start: SimTime,
    pub stop: SimTime,
    pub controller: Box<dyn CongestionControl>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceMode {
    #[default]
    Off,
    /// Every loss reaction, plus at most one ACK record per interval.
    Sampled(SimTime),
    Full,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub trace: TraceMode,
    /// Goodput is additionally snapshotted this long after each flow starts.
    pub warmup: SimTime,
    /// Keep the bottleneck's arrival and departure order for inspection.
    pub record_bottleneck: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    Start,
    Ack,
    TripleDupAck,
    RecoveryExit,
    Timeout,
    Stop,
}

impl TraceEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceEvent::Start => "start",
            TraceEvent::Ack => "ack",
            TraceEvent::TripleDupAck => "triple-dup-ack",
            TraceEvent::RecoveryExit => "recovery-exit",
            TraceEvent::Timeout => "timeout",
            TraceEvent::Stop => "stop",
        }
    }
}

/// Sender state right after an event. `queue_len` counts packets waiting
/// in the flow's egress queue plus the shared bottleneck queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub time: SimTime,
    pub flow: usize,
    pub event: TraceEvent,
    pub cwnd: f64,
    pub ssthresh: f64,
    pub queue_len: usize,
}

pub fn write_trace_csv<W: Write>(mut out: W, records: &[TraceRecord]) -> io::Result<()> {
    writeln!(out, "time_s,flow_id,event,cwnd,ssthresh,queue_len")?;
    for r in records {
        writeln!(out, "{},{},{},{},{},{}", r.time, r.flow, r.event.as_str(), r.cwnd, r.ssthresh, r.queue_len)?;
    }
    Ok(())
}

/// Per-flow counters. Data packets only; retransmissions count as sent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlowStats {
    pub flow: usize,
    pub start: SimTime,
    pub stop: SimTime,
    pub sent: u64,
    pub retransmits: u64,
    /// Data packets that reached the receiver, duplicates included.
    pub delivered: u64,
    pub dropped_queue: u64,
    pub dropped_per: u64,
    pub in_flight_at_end: u64,
    /// Unique payload bytes delivered in order before the flow stopped.
    pub goodput_bytes: u64,
    /// Payload bytes of every arrival before the flow stopped.
    pub raw_bytes: u64,
    /// Unique payload bytes delivered before `start + warmup`.
    pub goodput_bytes_at_warmup: u64,
    pub raw_bytes_at_warmup: u64,
    pub fast_retransmits: u64,
    pub timeouts: u64,
    pub min_rtt: Option<SimTime>,
    pub max_cwnd: f64,
    pub final_cwnd: f64,
}

impl FlowStats {
    pub fn dropped(&self) -> u64 {
        self.dropped_queue + self.dropped_per
    }

    /// `delivered + dropped + in flight == sent`.
    pub fn conserved(&self) -> bool {
        self.delivered + self.dropped_queue + self.dropped_per + self.in_flight_at_end == self.sent
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BottleneckStats {
    pub capacity: usize,
    pub max_queue_len: usize,
    pub departures: u64,
    pub serialization_respected: bool,
    /// Packet ids in the order they were accepted into the queue or link.
    pub accepted_order: Vec<u64>,
    /// Packet ids with their departure times.
    pub departures_log: Vec<(SimTime, u64)>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub flows: Vec<FlowStats>,
    pub trace: Vec<TraceRecord>,
    pub bottleneck: BottleneckStats,
    /// Largest drop-tail occupancy over every egress queue.
    pub max_egress_queue_len: usize,
    pub end_time: SimTime,
    /// The event queue ran dry before the configured duration.
    pub ended_early: bool,
    pub events_processed: u64,
}

#[derive(Debug, Clone, Copy)]
enum Hop {
    /// Ingress router, in front of the bottleneck.
    Router1,
    Receiver,
    /// Egress router on the ACK path.
    Router2,
    Sender,
}

#[derive(Debug, Clone, Copy)]
enum LinkId {
    Egress(usize),
    Bottleneck,
}

#[derive(Debug, Clone, Copy)]
enum Event {
    FlowStart(usize),
    FlowStop(usize),
    TransmitComplete(LinkId),
    PacketArrival { hop: Hop, packet: Packet, uid: u64 },
    RtoExpiry { flow: usize, generation: u64 },
}

struct FlowState {
    sender: Sender,
    receiver: Receiver,
    egress: QueuedLink,
    /// Router to receiver, receiver to router, router to sender.
    to_receiver: Link,
    ack_out: Link,
    ack_in: Link,
    stats: FlowStats,
    warmup_end: SimTime,
    warmup_marked: bool,
    stopped: bool,
    next_sample: SimTime,
}

struct Simulator<'a> {
    topology: &'a DumbbellTopology,
    opts: &'a RunOptions,
    events: EventQueue<Event>,
    flows: Vec<FlowState>,
    bottleneck: QueuedLink,
    bottleneck_uids: std::collections::VecDeque<u64>,
    ack_bottleneck: Link,
    rng: ChaCha8Rng,
    trace: Vec<TraceRecord>,
    log: BottleneckStats,
    actions: Actions,
    next_uid: u64,
    processed: u64,
    now: SimTime,
}

/// Runs the flows in `schedule` over `topology` until `duration`.
///
/// Flow `i` of the schedule uses access link `i`, so the schedule may not
/// be longer than the topology has flows.
pub fn run(
    topology: &DumbbellTopology,
    schedule: Vec<FlowSpec>,
    duration: SimTime,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunResult, NetsimError> {
    if schedule.len() > topology.n_flows() {
        return Err(NetsimError::InvalidSchedule {
            flow: schedule.len() - 1,
            reason: format!("topology only has {} access links", topology.n_flows()),
        });
    }
    for (i, f) in schedule.iter().enumerate() {
        if f.stop < f.start {
            return Err(NetsimError::InvalidSchedule { flow: i, reason: "stops before it starts".into() });
        }
    }
    let mut sim = Simulator::new(topology, schedule, seed, opts);
    sim.run(duration)?;
    Ok(sim.finish(duration))
}

impl<'a> Simulator<'a> {
    fn new(topology: &'a DumbbellTopology, schedule: Vec<FlowSpec>, seed: u64, opts: &'a RunOptions) -> Self {
        let mut events = EventQueue::new();
        let flows = schedule
            .into_iter()
            .enumerate()
            .map(|(i, spec)| {
                events.push(spec.start, Event::FlowStart(i));
                events.push(spec.stop, Event::FlowStop(i));
                let access = topology.access[i];
                FlowState {
                    sender: Sender::new(i, spec.controller),
                    receiver: Receiver::default(),
                    egress: QueuedLink::new(access.bandwidth_bps, access.prop_delay, topology.buffer),
                    to_receiver: Link::new(access.bandwidth_bps, access.prop_delay),
                    ack_out: Link::new(access.bandwidth_bps, access.prop_delay),
                    ack_in: Link::new(access.bandwidth_bps, access.prop_delay),
                    stats: FlowStats { flow: i, start: spec.start, stop: spec.stop, ..FlowStats::default() },
                    warmup_end: spec.start + opts.warmup,
                    warmup_marked: false,
                    stopped: false,
                    next_sample: spec.start,
                }
            })
            .collect();
        let bn = topology.bottleneck;
        Simulator {
            topology,
            opts,
            events,
            flows,
            bottleneck: QueuedLink::new(bn.bandwidth_bps, bn.prop_delay, topology.buffer),
            bottleneck_uids: std::collections::VecDeque::new(),
            ack_bottleneck: Link::new(bn.bandwidth_bps, bn.prop_delay),
            rng: ChaCha8Rng::seed_from_u64(seed),
            trace: Vec::new(),
            log: BottleneckStats { capacity: topology.buffer, ..BottleneckStats::default() },
            actions: Actions::default(),
            next_uid: 0,
            processed: 0,
            now: SimTime::ZERO,
        }
    }

    fn run(&mut self, duration: SimTime) -> Result<(), NetsimError> {
        while let Some(t) = self.events.peek_time() {
            if t > duration {
                break;
            }
            let (time, event) = self.events.pop().expect("peeked");
            self.now = time;
            self.processed += 1;
            self.handle(event)?;
        }
        Ok(())
    }

    fn handle(&mut self, event: Event) -> Result<(), NetsimError> {
        match event {
            Event::FlowStart(f) => {
                let mut out = std::mem::take(&mut self.actions);
                out.clear();
                self.flows[f].sender.start(self.now, &mut out);
                self.record(f, TraceEvent::Start, true);
                self.apply(f, &mut out);
                self.actions = out;
            }
            Event::FlowStop(f) => {
                self.snapshot_stop(f);
                flow_stop(&mut self.flows[f]);
                self.record(f, TraceEvent::Stop, true);
            }
            Event::TransmitComplete(LinkId::Egress(f)) => {
                let (packet, next) = self.flows[f].egress.complete(self.now);
                if let Some(at) = next {
                    self.events.push(at, Event::TransmitComplete(LinkId::Egress(f)));
                }
                let uid = self.uid();
                let at = self.now + self.flows[f].egress.prop_delay;
                self.events.push(at, Event::PacketArrival { hop: Hop::Router1, packet, uid });
            }
            Event::TransmitComplete(LinkId::Bottleneck) => self.bottleneck_departure(),
            Event::PacketArrival { hop: Hop::Router1, packet, uid } => match self.bottleneck.offer(self.now, packet) {
                Offer::Started(at) => {
                    self.note_accepted(uid);
                    self.events.push(at, Event::TransmitComplete(LinkId::Bottleneck));
                }
                Offer::Queued => self.note_accepted(uid),
                Offer::Dropped(p) => self.flows[p.flow].stats.dropped_queue += 1,
            },
            Event::PacketArrival { hop: Hop::Receiver, packet, .. } => self.receive_data(packet),
            Event::PacketArrival { hop: Hop::Router2, packet, uid } => {
                let at_router1 = self.ack_bottleneck.transmit(self.now, packet.size);
                let at_sender = self.flows[packet.flow].ack_in.transmit(at_router1, packet.size);
                self.events.push(at_sender, Event::PacketArrival { hop: Hop::Sender, packet, uid });
            }
            Event::PacketArrival { hop: Hop::Sender, packet, .. } => {
                let f = packet.flow;
                let mut out = std::mem::take(&mut self.actions);
                out.clear();
                self.flows[f].sender.on_ack(packet.seq, packet.echo, self.now, &mut out)?;
                self.apply(f, &mut out);
                self.actions = out;
            }
            Event::RtoExpiry { flow, generation } => {
                let mut out = std::mem::take(&mut self.actions);
                out.clear();
                self.flows[flow].sender.on_timer(generation, self.now, &mut out);
                self.apply(flow, &mut out);
                self.actions = out;
            }
        }
        Ok(())
    }

    fn uid(&mut self) -> u64 {
        self.next_uid += 1;
        self.next_uid
    }

    fn note_accepted(&mut self, uid: u64) {
        if self.opts.record_bottleneck {
            self.log.accepted_order.push(uid);
            self.bottleneck_uids.push_back(uid);
        }
    }

    fn bottleneck_departure(&mut self) {
        let (packet, next) = self.bottleneck.complete(self.now);
        if let Some(at) = next {
            self.events.push(at, Event::TransmitComplete(LinkId::Bottleneck));
        }
        if self.opts.record_bottleneck {
            let uid = self.bottleneck_uids.pop_front().expect("accepted packet");
            self.log.departures_log.push((self.now, uid));
        }
        let f = packet.flow;
        match maybe_corrupt(packet, self.topology.per, &mut self.rng) {
            Corruption::Dropped(_) => self.flows[f].stats.dropped_per += 1,
            Corruption::Kept(packet) => {
                let at_router2 = self.now + self.bottleneck.prop_delay;
                let at = self.flows[f].to_receiver.transmit(at_router2, packet.size);
                self.events.push(at, Event::PacketArrival { hop: Hop::Receiver, packet, uid: 0 });
            }
        }
    }

    fn receive_data(&mut self, packet: Packet) {
        let payload = u64::from(self.topology.payload_bytes);
        let now = self.now;
        let flow = &mut self.flows[packet.flow];
        flow.stats.delivered += 1;
        if !flow.warmup_marked && now >= flow.warmup_end {
            flow.warmup_marked = true;
            flow.stats.goodput_bytes_at_warmup = flow.receiver.unique_segments() * payload;
            flow.stats.raw_bytes_at_warmup = flow.stats.raw_bytes;
        }
        let ack_value = flow.receiver.on_data(packet.seq);
        if !flow.stopped {
            flow.stats.raw_bytes += payload;
        }
        let ack = Packet::ack(packet.flow, ack_value, packet.sent_at, now);
        let at = flow.ack_out.transmit(now, ack.size);
        self.events.push(at, Event::PacketArrival { hop: Hop::Router2, packet: ack, uid: 0 });
    }

    fn snapshot_stop(&mut self, f: usize) {
        let payload = u64::from(self.topology.payload_bytes);
        let flow = &mut self.flows[f];
        if flow.stopped {
            return;
        }
        flow.stats.goodput_bytes = flow.receiver.unique_segments() * payload;
        if !flow.warmup_marked {
            flow.warmup_marked = true;
            flow.stats.goodput_bytes_at_warmup = flow.stats.goodput_bytes;
            flow.stats.raw_bytes_at_warmup = flow.stats.raw_bytes;
        }
    }

    fn apply(&mut self, f: usize, out: &mut Actions) {
        let payload = self.topology.payload_bytes;
        for seg in &out.sends {
            let packet = Packet::data(f, seg.seq, payload, self.now);
            let flow = &mut self.flows[f];
            flow.stats.sent += 1;
            if seg.retransmit {
                flow.stats.retransmits += 1;
            }
            match flow.egress.offer(self.now, packet) {
                Offer::Started(at) => self.events.push(at, Event::TransmitComplete(LinkId::Egress(f))),
                Offer::Queued => {}
                Offer::Dropped(_) => flow.stats.dropped_queue += 1,
            }
        }
        if let Some((at, generation)) = out.timer {
            self.events.push(at, Event::RtoExpiry { flow: f, generation });
        }
        let cwnd = self.flows[f].sender.controller().cwnd();
        let stats = &mut self.flows[f].stats;
        if cwnd > stats.max_cwnd {
            stats.max_cwnd = cwnd;
        }
        for &signal in &out.signals {
            let (event, always) = match signal {
                Signal::Ack => (TraceEvent::Ack, false),
                Signal::TripleDupAck => {
                    self.flows[f].stats.fast_retransmits += 1;
                    (TraceEvent::TripleDupAck, true)
                }
                Signal::RecoveryExit => (TraceEvent::RecoveryExit, true),
                Signal::Timeout => {
                    self.flows[f].stats.timeouts += 1;
                    (TraceEvent::Timeout, true)
                }
            };
            self.record(f, event, always);
        }
    }

    fn record(&mut self, f: usize, event: TraceEvent, always: bool) {
        let keep = match self.opts.trace {
            TraceMode::Off => false,
            TraceMode::Full => true,
            TraceMode::Sampled(interval) => {
                let flow = &mut self.flows[f];
                if always {
                    true
                } else if self.now >= flow.next_sample {
                    flow.next_sample = self.now + interval;
                    true
                } else {
                    false
                }
            }
        };
        if !keep {
            return;
        }
        let flow = &self.flows[f];
        let cc = flow.sender.controller();
        self.trace.push(TraceRecord {
            time: self.now,
            flow: f,
            event,
            cwnd: cc.cwnd(),
            ssthresh: cc.ssthresh(),
            queue_len: flow.egress.queue_len() + self.bottleneck.queue_len(),
        });
    }

    fn finish(mut self, duration: SimTime) -> RunResult {
        let ended_early = self.events.is_empty();
        let end_time = if ended_early { self.now } else { duration };
        for f in 0..self.flows.len() {
            self.snapshot_stop(f);
        }
        // whatever data is still queued, on a wire, or in a pending event
        let mut in_flight = vec![0u64; self.flows.len()];
        for flow in &self.flows {
            for p in flow.egress.queue().iter().chain(flow.egress.in_service()) {
                in_flight[p.flow] += 1;
            }
        }
        for p in self.bottleneck.queue().iter().chain(self.bottleneck.in_service()) {
            in_flight[p.flow] += 1;
        }
        for event in self.events.pending() {
            if let Event::PacketArrival { hop: Hop::Router1 | Hop::Receiver, packet, .. } = event {
                in_flight[packet.flow] += 1;
            }
        }
        let max_egress_queue_len = self.flows.iter().map(|f| f.egress.queue().max_len()).max().unwrap_or(0);
        let events_processed = self.processed;
        let mut bottleneck = std::mem::take(&mut self.log);
        bottleneck.departures = self.bottleneck.departures();
        bottleneck.max_queue_len = self.bottleneck.queue().max_len();
        bottleneck.serialization_respected = self.bottleneck.serialization_respected()
            && self.flows.iter().all(|f| f.egress.serialization_respected());
        let flows = self
            .flows
            .into_iter()
            .zip(in_flight)
            .map(|(flow, in_flight)| {
                let mut stats = flow.stats;
                stats.in_flight_at_end = in_flight;
                stats.min_rtt = flow.sender.rto().min_rtt();
                stats.final_cwnd = flow.sender.controller().cwnd();
                stats
            })
            .collect();
        RunResult {
            flows,
            trace: self.trace,
            bottleneck,
            max_egress_queue_len,
            end_time,
            ended_early,
            events_processed,
        }
    }
}

fn flow_stop(flow: &mut FlowState) {
    flow.stopped = true;
    flow.sender.stop();
}
