//! Deterministic discrete-event simulation of a dumbbell network.
//!
//! Time is kept in integer nanoseconds. Simultaneous events run in the
//! order they were scheduled, and the only randomness is the packet
//! error model, drawn from a seeded ChaCha stream, so a (configuration,
//! seed) pair fully determines a run.

mod endpoint;
mod event;
mod link;
mod packet;
mod per;
mod queue;
mod rto;
mod sim;
mod time;
mod topology;

pub use endpoint::{Actions, Receiver, Segment, Sender, Signal};
pub use event::EventQueue;
pub use link::{Link, Offer, QueuedLink};
pub use packet::{Packet, PacketKind, ACK_BYTES, DEFAULT_PAYLOAD_BYTES, HEADER_BYTES};
pub use per::{maybe_corrupt, Corruption};
pub use queue::{DropTailQueue, Enqueue};
pub use rto::{RtoEstimator, INITIAL_RTO, MAX_RTO, MIN_RTO};
pub use sim::{
    run, write_trace_csv, BottleneckStats, FlowSpec, FlowStats, RunOptions, RunResult, TraceEvent, TraceMode,
    TraceRecord,
};
pub use time::SimTime;
pub use topology::{
    build_dumbbell, DumbbellTopology, LinkSpec, DEFAULT_ACCESS_DELAY, DEFAULT_BANDWIDTH_BPS, DEFAULT_BOTTLENECK_DELAY,
};
